#pragma once

// Reciprocal-exponent arithmetic. Every Lebesgue exponent p is stored as
// 1/p, so p = infinity is the ordinary value 0 and all Holder bookkeeping
// is additive.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace extrapolab {

struct Recip {
    double v = 0.0;  // 1/p >= 0; 0 encodes p = infinity

    constexpr Recip() = default;
    constexpr explicit Recip(double value) : v(value) {}

    static Recip of_exponent(double p) {
        if (std::isinf(p)) return Recip{0.0};
        if (!(p > 0.0)) throw std::invalid_argument("exponent must be positive");
        return Recip{1.0 / p};
    }

    double exponent() const {
        return v == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / v;
    }

    bool is_infinity() const { return v == 0.0; }

    // 1/p' = 1 - 1/p, defined only inside the Banach range
    Recip dual() const {
        if (v > 1.0) throw std::domain_error("dual exponent needs 1/p <= 1");
        return Recip{1.0 - v};
    }
};

inline std::vector<Recip> recips_of_exponents(const std::vector<double>& ps) {
    std::vector<Recip> out;
    out.reserve(ps.size());
    for (double p : ps) out.push_back(Recip::of_exponent(p));
    return out;
}

inline double recip_sum(const std::vector<Recip>& xs) {
    double t = 0.0;
    for (const Recip& x : xs) t += x.v;
    return t;
}

// (m, rvec, s, pvec) bundle with the admissibility predicates
struct ScaleSetup {
    std::vector<Recip> r;  // each 1/r_j > 0
    Recip s;               // 1/s >= 0
    std::vector<Recip> p;  // each 1/p_j >= 0

    int m() const { return static_cast<int>(r.size()); }
    double p_total() const { return recip_sum(p); }

    ScaleSetup() = default;
    ScaleSetup(std::vector<Recip> rv, Recip sv, std::vector<Recip> pv)
        : r(std::move(rv)), s(sv), p(std::move(pv)) {
        if (r.size() != p.size())
            throw std::invalid_argument("tuple size mismatch between r and p");
        for (const Recip& rj : r)
            if (!(rj.v > 0.0)) throw std::invalid_argument("1/r_j must be positive");
    }
};

struct SetupReport {
    bool ok = true;
    int index = -1;  // first violated component; m() marks the s constraint
    std::string what;
};

// (r,s) <= p  iff  1/p_j <= 1/r_j for all j and 1/p >= 1/s;
// strict flips every inequality to strict.
inline SetupReport validate_setup(const ScaleSetup& setup, bool strict) {
    for (int j = 0; j < setup.m(); ++j) {
        const bool bad = strict ? !(setup.p[j].v < setup.r[j].v)
                                : !(setup.p[j].v <= setup.r[j].v);
        if (bad)
            return {false, j,
                    "exponent " + std::to_string(j + 1) + " violates r_j " +
                        (strict ? "<" : "<=") + " p_j"};
    }
    const double pt = setup.p_total();
    const bool bad_s = strict ? !(pt > setup.s.v) : !(pt >= setup.s.v);
    if (bad_s)
        return {false, setup.m(),
                strict ? std::string("violates p < s") : std::string("violates p <= s")};
    return {};
}

// multiplies every reciprocal by alpha (Holder scale change)
inline ScaleSetup rescale(const ScaleSetup& setup, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("rescale needs alpha > 0");
    ScaleSetup out = setup;
    for (Recip& x : out.r) x.v *= alpha;
    for (Recip& x : out.p) x.v *= alpha;
    out.s.v *= alpha;
    return out;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace extrapolab
