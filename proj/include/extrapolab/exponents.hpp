#pragma once

// Exponent calculus: admissibility, the extrapolation exponent, translation
// splits, rescaling, the stagewise path construction and the sparse-form
// exponents. Pure functions on reciprocal tuples.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "extrapolab/recip.hpp"

namespace extrapolab {

// Ratio (1/r - 1/q)/(1/r - 1/p) with the sanctioned 0/0 = 1 convention.
// A zero denominator without a zero numerator has no admissible meaning.
inline double exponent_ratio(double num, double den) {
    if (den == 0.0) {
        if (num == 0.0) return 1.0;
        throw std::domain_error("inadmissible pair: ratio pole without matching equality");
    }
    return num / den;
}

// max over the m+1 ratios ((1/r_j-1/q_j)/(1/r_j-1/p_j), s-ratio last) that
// governs how weight constants transfer from q-scale to p-scale.
inline double extrapolation_exponent(const std::vector<Recip>& p, const std::vector<Recip>& q,
                                     const std::vector<Recip>& r, Recip s) {
    if (p.size() != q.size() || p.size() != r.size())
        throw std::invalid_argument("tuple size mismatch");
    double best = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
        best = std::max(best, exponent_ratio(r[j].v - q[j].v, r[j].v - p[j].v));
    best = std::max(best, exponent_ratio(recip_sum(q) - s.v, recip_sum(p) - s.v));
    return best;
}

// Same maximum for symmetric (m+1)-tuples, where the s-term is already a column.
inline double extrapolation_exponent_sym(const std::vector<Recip>& p, const std::vector<Recip>& q,
                                         const std::vector<Recip>& r) {
    double best = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j)
        best = std::max(best, exponent_ratio(r[j].v - q[j].v, r[j].v - p[j].v));
    return best;
}

// increasing power law phi(t) = coeff * uncertainty * t^alpha; `uncertainty`
// collects the structural constants the estimates do not pin down, so they
// stay visible instead of silently becoming 1
struct PowerLaw {
    double coeff = 1.0;
    double alpha = 1.0;
    double uncertainty = 1.0;

    double operator()(double t) const { return coeff * uncertainty * std::pow(t, alpha); }
};

// Transfers a power-law bound at scale q to scale p:
//   t -> 2^(m^2/r) * phi( C * t^(r*E) )^(1/r),  E the extrapolation exponent.
// C is structural and unknown a priori; pass a measured value to fold it in.
inline PowerLaw phi_compose(const PowerLaw& phi_q, const std::vector<Recip>& p,
                            const std::vector<Recip>& q, const std::vector<Recip>& r, Recip s,
                            std::optional<double> measured_c = std::nullopt) {
    const double exponent = extrapolation_exponent(p, q, r, s);
    const double inv_r = recip_sum(r);  // 1/r = sum 1/r_j
    const double m = static_cast<double>(p.size());
    PowerLaw out;
    out.alpha = phi_q.alpha * exponent;
    out.coeff = std::pow(2.0, m * m * inv_r) * std::pow(phi_q.coeff, inv_r);
    out.uncertainty =
        std::pow(phi_q.uncertainty, inv_r) *
        std::pow(measured_c.value_or(1.0), phi_q.alpha * inv_r);
    return out;
}

struct TranslationSplit {
    std::vector<Recip> s_split;  // 1/s_j, sums to 1/s (may be negative)
    std::vector<Recip> p_s;      // 1/p_j(s) = 1/p_j - 1/s_j
    std::vector<Recip> r_s;      // 1/r_j(s) = 1/r_j - 1/s_j
};

namespace detail {
inline TranslationSplit make_split(const std::vector<Recip>& p, const std::vector<Recip>& r,
                                   std::vector<Recip> sj) {
    TranslationSplit out;
    out.s_split = std::move(sj);
    out.p_s.resize(p.size());
    out.r_s.resize(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        out.p_s[j] = Recip{p[j].v - out.s_split[j].v};
        out.r_s[j] = Recip{r[j].v - out.s_split[j].v};
    }
    return out;
}
}  // namespace detail

// Proportional split 1/s_j = (1/p_j)/(1/p) * (1/s); turns the (r,s)-scale
// into an equivalent (r(s),infinity)-scale.
inline TranslationSplit translation_params(const std::vector<Recip>& p, const std::vector<Recip>& r,
                                           Recip s) {
    const double pt = recip_sum(p);
    std::vector<Recip> sj(p.size());
    for (std::size_t j = 0; j < p.size(); ++j)
        sj[j] = Recip{pt == 0.0 ? 0.0 : p[j].v / pt * s.v};
    return detail::make_split(p, r, std::move(sj));
}

// Directional split toward a target tuple q:
//   1/s_j = ((1/p-1/s)(1/q_j) - (1/q-1/s)(1/p_j)) / (1/p - 1/q).
// Components with 1/q_j = 1/p_j get 1/s_j = 1/p_j exactly.
inline TranslationSplit translation_params_directed(const std::vector<Recip>& p,
                                                    const std::vector<Recip>& q,
                                                    const std::vector<Recip>& r, Recip s) {
    const double pt = recip_sum(p), qt = recip_sum(q);
    if (pt == qt) throw std::domain_error("degenerate direction: 1/p equals 1/q");
    std::vector<Recip> sj(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (q[j].v == p[j].v) {
            sj[j] = p[j];  // numerator factors exactly
        } else {
            sj[j] = Recip{((pt - s.v) * q[j].v - (qt - s.v) * p[j].v) / (pt - qt)};
        }
    }
    return detail::make_split(p, r, std::move(sj));
}

// One extrapolation path: the permutation sorting the tuple into the
// "all decreasing indices first" pattern, the blend parameters theta, the
// intermediate tuples and the stagewise constants gamma.
struct ExtrapolationPath {
    std::vector<int> perm;                    // sorted position -> original index
    int j1 = 0;                               // number of non-increasing indices
    std::vector<double> theta;                // theta_0 = 0 .. theta_S = 1
    std::vector<std::vector<Recip>> seq;      // seq[0] = p, ..., seq[S] = q (sorted coords)
    std::vector<double> gamma;                // per transition seq[t-1] -> seq[t]
    bool trivial = false;                     // p == q

    double gamma_product() const {
        double g = 1.0;
        for (double x : gamma) g *= x;
        return g;
    }
};

// Builds the stagewise path from p to q through intermediate tuples whose
// reciprocals all sum to 1, one strictly increasing index per stage.
inline ExtrapolationPath step2_path(const std::vector<Recip>& p, const std::vector<Recip>& q,
                                    const std::vector<Recip>& r) {
    const int n = static_cast<int>(p.size());  // n = m+1 components
    if (q.size() != p.size() || r.size() != p.size())
        throw std::invalid_argument("tuple size mismatch");
    if (rel_diff(recip_sum(p), 1.0) > 1e-9 || rel_diff(recip_sum(q), 1.0) > 1e-9)
        throw std::invalid_argument("reciprocals must sum to 1");
    for (int j = 0; j < n; ++j) {
        if (!(p[j].v < r[j].v)) throw std::domain_error("need 1/p_j < 1/r_j");
        if (!(q[j].v <= r[j].v)) throw std::domain_error("need 1/q_j <= 1/r_j");
    }

    ExtrapolationPath path;
    path.perm.resize(n);
    std::iota(path.perm.begin(), path.perm.end(), 0);
    // canonical order: decreasing indices first; total tie-break keys make
    // the construction independent of the input ordering
    std::stable_sort(path.perm.begin(), path.perm.end(), [&](int a, int b) {
        const double da = p[a].v - q[a].v, db = p[b].v - q[b].v;
        if (da != db) return da > db;
        if (p[a].v != p[b].v) return p[a].v > p[b].v;
        return r[a].v > r[b].v;
    });

    auto sorted = [&](const std::vector<Recip>& x) {
        std::vector<Recip> out(n);
        for (int i = 0; i < n; ++i) out[i] = x[path.perm[i]];
        return out;
    };
    const std::vector<Recip> ps = sorted(p), qs = sorted(q), rs = sorted(r);

    int j1 = 0;
    while (j1 < n && ps[j1].v >= qs[j1].v) ++j1;
    path.j1 = j1;

    if (j1 == n) {  // no increasing index: p == q by the sum constraint
        path.trivial = true;
        path.theta = {0.0, 1.0};
        path.seq = {ps, qs};
        return path;
    }

    const int stages = n - j1;  // m - j1 + 1 in (m+1)-component terms
    double denom = 0.0;
    for (int j = j1; j < n; ++j) denom += qs[j].v - ps[j].v;

    path.theta.assign(stages + 1, 0.0);
    for (int k = 1; k <= stages; ++k) {
        double num = 0.0;
        for (int j = n - k; j < n; ++j) num += qs[j].v - ps[j].v;
        path.theta[k] = num / denom;
    }
    path.theta[stages] = 1.0;

    // blend of the first j1 coordinates at stage k
    auto qk_head = [&](int k, int j) { return qs[j].v + path.theta[k] * (ps[j].v - qs[j].v); };

    // tuple q^k: blended head, untouched middle, already-moved tail
    auto tuple_at = [&](int k) {
        std::vector<Recip> t(n);
        for (int j = 0; j < j1; ++j) t[j] = Recip{qk_head(k, j)};
        for (int j = j1; j < n - k; ++j) t[j] = qs[j];
        for (int j = n - k; j < n; ++j) t[j] = ps[j];
        return t;
    };

    path.seq.resize(stages + 1);
    path.seq[0] = ps;  // = tuple_at(stages)
    for (int t = 1; t <= stages; ++t) path.seq[t] = tuple_at(stages - t);

    path.gamma.resize(stages);
    for (int t = 1; t <= stages; ++t) {
        const int k = stages - t + 1;  // transition t realizes gamma_k
        double g = 0.0;
        for (int j = 0; j < j1; ++j) {
            const double num = rs[j].v - qk_head(k - 1, j);
            const double den = rs[j].v - qk_head(k, j);
            g = std::max(g, den == 0.0 ? 1.0 : num / den);
        }
        path.gamma[t - 1] = j1 == 0 ? 1.0 : g;
    }

    // sanity: sums stay 1 and the gamma product collapses to the direct max
    for (const auto& tup : path.seq)
        if (rel_diff(recip_sum(tup), 1.0) > 1e-9)
            throw std::logic_error("intermediate tuple sum drifted");
    const double direct = extrapolation_exponent_sym(ps, qs, rs);
    if (rel_diff(path.gamma_product(), direct) > 1e-9)
        throw std::logic_error("gamma product identity failed");
    return path;
}

// max( (1/r_j)/((1/r_j)-(1/p_j)), (1-1/s)/((1/p)-(1/s)) ); poles at the
// admissibility boundary are reported as +infinity
inline double sparse_exponent(const std::vector<Recip>& p, const std::vector<Recip>& r, Recip s) {
    double best = 0.0;
    auto ratio = [](double num, double den) {
        if (den <= 0.0) return std::numeric_limits<double>::infinity();
        return num / den;
    };
    for (std::size_t j = 0; j < p.size(); ++j) best = std::max(best, ratio(r[j].v, r[j].v - p[j].v));
    best = std::max(best, ratio(1.0 - s.v, recip_sum(p) - s.v));
    return best;
}

struct CentralExponents {
    double tau = 0.0;           // 1/tau = 1/s' + sum 1/r_j
    std::vector<Recip> q;       // 1/q_j = tau / r_j
    double common_ratio = 0.0;  // every sparse-exponent ratio equals 1/(1-tau)
};

inline CentralExponents central_exponents(const std::vector<Recip>& r, Recip s) {
    const double inv_tau = (1.0 - s.v) + recip_sum(r);
    if (!(inv_tau > 1.0)) throw std::domain_error("empty admissible range: tau >= 1");
    CentralExponents out;
    out.tau = 1.0 / inv_tau;
    out.q.resize(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) out.q[j] = Recip{out.tau * r[j].v};
    out.common_ratio = 1.0 / (1.0 - out.tau);
    return out;
}

inline double vector_valued_exponent(const std::vector<Recip>& p, const std::vector<Recip>& q,
                                     const std::vector<Recip>& r, Recip s) {
    return sparse_exponent(q, r, s) * extrapolation_exponent(p, q, r, s);
}

// prod_j [ (1/r_j) / ((1/r_j)-(1/p_j)) ]^(1/r_j), for tuples of any length;
// a fully degenerate component (1/r_j = 1/p_j = 0) contributes 1
inline double constant_cpr(const std::vector<Recip>& p, const std::vector<Recip>& r) {
    double c = 1.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (r[j].v == 0.0 && p[j].v == 0.0) continue;
        const double den = r[j].v - p[j].v;
        if (!(den > 0.0)) throw std::domain_error("constant_cpr pole: 1/p_j = 1/r_j");
        c *= std::pow(r[j].v / den, r[j].v);
    }
    return c;
}

}  // namespace extrapolab
