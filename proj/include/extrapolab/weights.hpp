#pragma once

// Weight constants: the limited-range multilinear constant, its symmetric
// (m+1)-tuple form, classical A_1/A_p constants and the rescaling /
// translation identities.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "extrapolab/dyadic.hpp"
#include "extrapolab/exponents.hpp"
#include "extrapolab/recip.hpp"

namespace extrapolab {

struct WeightConstant {
    double value = 0.0;
    DyadicCube argmax;
};

namespace detail {

// <g>_{t,Q} where t = 1/(den) may be infinity (den = 0 -> esssup)
template <class Field>
double power_avg(const Field& g, double den, CellRange c) {
    if (den == 0.0) return g.max_on(c);
    return g.avg(1.0 / den, c);
}

template <class Field>
int common_level(const std::vector<Field>& w) {
    if (w.empty()) throw std::invalid_argument("empty weight tuple");
    const int L = w.front().level();
    for (const Field& wj : w)
        if (wj.level() != L) throw std::invalid_argument("level mismatch");
    return L;
}

inline StepFunction product_field(const std::vector<StepFunction>& w) {
    StepFunction out = w.front();
    for (std::size_t j = 1; j < w.size(); ++j) out = mul(out, w[j]);
    return out;
}

inline PowerField product_field(const std::vector<PowerField>& w) {
    PowerField out = w.front();
    for (std::size_t j = 1; j < w.size(); ++j) out = out.mul(w[j]);
    return out;
}

inline StepFunction field_pow(const StepFunction& f, double e) { return cellpow(f, e); }
inline PowerField field_pow(const PowerField& f, double e) { return f.pow(e); }

}  // namespace detail

// [w]_{p,(r,s)} = sup_Q (prod_j <w_j^-1>_{1/(1/r_j-1/p_j),Q}) <w>_{1/(1/p-1/s),Q}
template <class Field>
WeightConstant weight_constant(const std::vector<Field>& w, const ScaleSetup& setup,
                               GridFamily family = GridFamily::dyadic) {
    if (static_cast<int>(w.size()) != setup.m()) throw std::invalid_argument("tuple size mismatch");
    const SetupReport rep = validate_setup(setup, false);
    if (!rep.ok) throw std::domain_error("inadmissible setup: " + rep.what);
    const int L = detail::common_level(w);

    std::vector<Field> inv;
    inv.reserve(w.size());
    for (const Field& wj : w) inv.push_back(detail::field_pow(wj, -1.0));
    const Field prod = detail::product_field(w);

    std::vector<double> den(w.size());
    for (int j = 0; j < setup.m(); ++j) den[j] = setup.r[j].v - setup.p[j].v;
    const double den_s = setup.p_total() - setup.s.v;

    WeightConstant best;
    for (int g : family_grids(family)) {
        for (const DyadicCube& q : cubes(g, L, L)) {
            const CellRange c = cube_cells(q, L);
            double val = detail::power_avg(prod, den_s, c);
            for (std::size_t j = 0; j < w.size(); ++j)
                val *= detail::power_avg(inv[j], den[j], c);
            if (val > best.value) best = {val, q};
        }
    }
    return best;
}

// symmetric extension: appends 1/p_{m+1} = 1-1/p, 1/r_{m+1} = 1-1/s and
// w_{m+1} = w^{-1}, after which reciprocals sum to 1 and the product is 1
template <class Field>
struct SymmetricTuple {
    std::vector<Field> w;
    std::vector<Recip> p;
    std::vector<Recip> r;
};

template <class Field>
SymmetricTuple<Field> symmetric_extension(const std::vector<Field>& w, const ScaleSetup& setup) {
    const double pt = setup.p_total();
    if (pt > 1.0 + 1e-12) throw std::domain_error("use rescale first: 1/p > 1");
    if (setup.s.v >= 1.0) throw std::domain_error("symmetric extension needs s > 1");
    SymmetricTuple<Field> out{w, setup.p, setup.r};
    out.p.push_back(Recip{1.0 - std::min(pt, 1.0)});
    out.r.push_back(Recip{1.0 - setup.s.v});
    out.w.push_back(detail::field_pow(detail::product_field(w), -1.0));
    return out;
}

template <class Field>
void require_product_one(const std::vector<Field>& w, double tol = 1e-10);

template <>
inline void require_product_one(const std::vector<StepFunction>& w, double tol) {
    const StepFunction prod = detail::product_field(w);
    for (cell_t i = 0; i < prod.cells(); ++i)
        if (rel_diff(prod[i], 1.0) > tol) throw std::domain_error("not a symmetric tuple");
}

template <>
inline void require_product_one(const std::vector<PowerField>& w, double tol) {
    const PowerField prod = detail::product_field(w);
    if (rel_diff(prod.coeff(), 1.0) > tol || std::abs(prod.expnt()) > tol)
        throw std::domain_error("not a symmetric tuple");
}

// sup_Q prod_{j=1}^{m+1} <w_j^-1>_{1/(1/r_j-1/p_j),Q}; permutation invariant
template <class Field>
WeightConstant symmetric_constant(const std::vector<Field>& w, const std::vector<Recip>& p,
                                  const std::vector<Recip>& r,
                                  GridFamily family = GridFamily::dyadic) {
    if (w.size() != p.size() || w.size() != r.size())
        throw std::invalid_argument("tuple size mismatch");
    if (rel_diff(recip_sum(p), 1.0) > 1e-9)
        throw std::invalid_argument("symmetric tuple reciprocals must sum to 1");
    require_product_one(w);
    const int L = detail::common_level(w);

    std::vector<Field> inv;
    inv.reserve(w.size());
    for (const Field& wj : w) inv.push_back(detail::field_pow(wj, -1.0));
    std::vector<double> den(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        den[j] = r[j].v - p[j].v;
        if (den[j] < 0.0) throw std::domain_error("inadmissible symmetric tuple");
    }

    WeightConstant best;
    for (int g : family_grids(family)) {
        for (const DyadicCube& q : cubes(g, L, L)) {
            const CellRange c = cube_cells(q, L);
            double val = 1.0;
            for (std::size_t j = 0; j < w.size(); ++j)
                val *= detail::power_avg(inv[j], den[j], c);
            if (val > best.value) best = {val, q};
        }
    }
    return best;
}

// [w]_{A_1} = sup_Q <w>_{1,Q} / essinf_Q w
inline double classical_a1(const StepFunction& w, GridFamily family = GridFamily::dyadic) {
    const int L = w.level();
    double best = 0.0;
    for (int g : family_grids(family))
        for (const DyadicCube& q : cubes(g, L, L)) {
            const CellRange c = cube_cells(q, L);
            best = std::max(best, w.avg(1.0, c) / w.min_on(c));
        }
    return best;
}

// [w]_{A_p} = sup_Q <w>_{1,Q} <w^{1-p'}>_{1,Q}^{p-1},  p in (1,infinity)
inline double classical_ap(const StepFunction& w, double p, GridFamily family = GridFamily::dyadic) {
    if (!(p > 1.0) || std::isinf(p)) throw std::invalid_argument("A_p needs p in (1,inf)");
    const double dualexp = 1.0 - 1.0 / (1.0 - 1.0 / p);  // 1 - p'
    const StepFunction wd = cellpow(w, dualexp);
    const int L = w.level();
    double best = 0.0;
    for (int g : family_grids(family))
        for (const DyadicCube& q : cubes(g, L, L)) {
            const CellRange c = cube_cells(q, L);
            best = std::max(best, w.avg(1.0, c) * std::pow(wd.avg(1.0, c), p - 1.0));
        }
    return best;
}

// weights raised to 1/alpha, matching rescale() on the exponent side
inline std::vector<StepFunction> rescale_weights(const std::vector<StepFunction>& w, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("rescale needs alpha > 0");
    std::vector<StepFunction> out;
    out.reserve(w.size());
    for (const StepFunction& wj : w) out.push_back(cellpow(wj, 1.0 / alpha));
    return out;
}

struct IdentityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel = 0.0;
};

// [w^{1/alpha}]_{p,(r,s)} against [w]^{1/alpha} at the rescaled setup
inline IdentityReport rescale_check(const std::vector<StepFunction>& w, const ScaleSetup& setup,
                                    double alpha, GridFamily family = GridFamily::dyadic) {
    const double lhs = weight_constant(rescale_weights(w, alpha), setup, family).value;
    const double rhs =
        std::pow(weight_constant(w, rescale(setup, alpha), family).value, 1.0 / alpha);
    return {lhs, rhs, rel_diff(lhs, rhs)};
}

// translation identity: the constant is unchanged by any valid 1/s_j split
inline IdentityReport translation_check(const std::vector<StepFunction>& w, const ScaleSetup& setup,
                                        const TranslationSplit& split,
                                        GridFamily family = GridFamily::dyadic) {
    const double lhs = weight_constant(w, setup, family).value;
    ScaleSetup translated(split.r_s, Recip{0.0}, split.p_s);
    const double rhs = weight_constant(w, translated, family).value;
    return {lhs, rhs, rel_diff(lhs, rhs)};
}

struct CharReport {
    double optimal_c = 0.0;   // best constant in the v_j characterization
    double constant = 0.0;    // symmetric weight constant
    double rel = 0.0;
};

// optimal c with (prod_j <v_j>_{1,Q}^{1/r_j}) |Q| <= c prod_j v_j(Q)^{1/p_j}
// equals the symmetric constant; v_j = w_j^{-1/(1/r_j - 1/p_j)}
inline CharReport wconst_char_check(const std::vector<StepFunction>& w, const std::vector<Recip>& p,
                                    const std::vector<Recip>& r) {
    require_product_one(w);
    const int L = detail::common_level(w);
    std::vector<StepFunction> v;
    v.reserve(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double den = r[j].v - p[j].v;
        if (!(den > 0.0)) throw std::domain_error("characterization needs 1/p_j < 1/r_j");
        v.push_back(cellpow(w[j], -1.0 / den));
    }
    const cell_t n = cells_at_level(L);
    double best = 0.0;
    for (const DyadicCube& q : cubes(0, L, L)) {
        const CellRange c = cube_cells(q, L);
        double lhs = static_cast<double>(c.size()) / static_cast<double>(n);
        double rhs = 1.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            lhs *= std::pow(v[j].avg(1.0, c), r[j].v);
            rhs *= std::pow(v[j].mass_pow(1.0, c), p[j].v);
        }
        best = std::max(best, lhs / rhs);
    }
    const double sym = symmetric_constant(w, p, r).value;
    return {best, sym, rel_diff(best, sym)};
}

}  // namespace extrapolab
