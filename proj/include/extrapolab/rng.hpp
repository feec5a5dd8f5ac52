#pragma once

// Seeded generators for weights, data and admissible exponent tuples.
// Everything downstream is deterministic given the seed.

#include <cmath>
#include <random>
#include <vector>

#include "extrapolab/dyadic.hpp"
#include "extrapolab/recip.hpp"

namespace extrapolab {

using Rng = std::mt19937_64;

inline StepFunction random_weight(int L, Rng& rng, double log_range = 1.5) {
    std::uniform_real_distribution<double> unif(-log_range, log_range);
    std::vector<double> v(static_cast<std::size_t>(cells_at_level(L)));
    for (double& x : v) x = std::exp(unif(rng));
    return StepFunction(L, std::move(v));
}

inline StepFunction random_function(int L, Rng& rng, double zero_prob = 0.0,
                                    double log_range = 1.5) {
    std::uniform_real_distribution<double> unif(-log_range, log_range);
    std::bernoulli_distribution zero(zero_prob);
    std::vector<double> v(static_cast<std::size_t>(cells_at_level(L)));
    for (double& x : v) x = zero(rng) ? 0.0 : std::exp(unif(rng));
    return StepFunction(L, std::move(v));
}

// n-1 free weights, last one fixed so the cellwise product is 1
inline std::vector<StepFunction> random_symmetric_weights(int n, int L, Rng& rng,
                                                          double log_range = 1.0) {
    std::vector<StepFunction> w;
    StepFunction prod = StepFunction::constant(L, 1.0);
    for (int j = 0; j + 1 < n; ++j) {
        w.push_back(random_weight(L, rng, log_range));
        prod = mul(prod, w.back());
    }
    w.push_back(cellpow(prod, -1.0));
    return w;
}

struct SymmetricSetup {
    std::vector<Recip> r;
    std::vector<Recip> p;
};

// random (m+1)-tuple with sum_j 1/p_j = 1 and margin 1/p_j <= margin/r_j
inline SymmetricSetup random_symmetric_setup(int n, Rng& rng, double margin = 0.85,
                                             double r_lo = 0.5, double r_hi = 1.2) {
    std::uniform_real_distribution<double> rdist(r_lo, r_hi);
    std::uniform_real_distribution<double> udist(0.1, 1.0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        SymmetricSetup s;
        s.r.resize(n);
        s.p.resize(n);
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            s.r[j] = Recip{rdist(rng)};
            s.p[j] = Recip{udist(rng) * s.r[j].v};
            total += s.p[j].v;
        }
        bool ok = true;
        for (int j = 0; j < n; ++j) {
            s.p[j].v /= total;
            if (s.p[j].v > margin * s.r[j].v) ok = false;
        }
        if (ok) return s;
    }
    throw std::runtime_error("no admissible tuple found");
}

// random target tuple for the same r, 1/q_j <= 1/r_j, reciprocals summing 1;
// occasionally pins a coordinate to the boundary or to p itself
inline std::vector<Recip> random_target_tuple(const SymmetricSetup& s, Rng& rng,
                                              double margin = 0.999) {
    std::uniform_real_distribution<double> udist(0.1, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const int n = static_cast<int>(s.r.size());
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<Recip> q(n);
        double total = 0.0;
        for (int j = 0; j < n; ++j) {
            q[j] = Recip{udist(rng) * s.r[j].v};
            total += q[j].v;
        }
        bool ok = true;
        for (int j = 0; j < n; ++j) {
            q[j].v /= total;
            if (q[j].v > margin * s.r[j].v) ok = false;
        }
        if (!ok) continue;
        const double c = coin(rng);
        if (c < 0.15) {
            // pin one coordinate to p and renormalize the rest
            const int fix = static_cast<int>(coin(rng) * n) % n;
            double rest = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != fix) rest += q[j].v;
            const double want = 1.0 - s.p[fix].v;
            ok = true;
            for (int j = 0; j < n; ++j) {
                if (j == fix) {
                    q[j] = s.p[fix];
                } else {
                    q[j].v *= want / rest;
                    if (q[j].v > margin * s.r[j].v) ok = false;
                }
            }
            if (!ok) continue;
        }
        return q;
    }
    throw std::runtime_error("no admissible target found");
}

}  // namespace extrapolab
