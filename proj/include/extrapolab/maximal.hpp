#pragma once

// Multisublinear maximal operators on the dyadic model: the plain and
// weighted dyadic maximal functions, the three-grid variant, the composite
// N operators behind the sharp strong-type bound, weak/strong norm
// experiments and the sharp maximal function.
//
// Per-cell suprema are computed by one downward sweep over levels carrying
// the running ancestor maximum; the O(cells * cubes) brute force lives in
// the tests as the oracle.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "extrapolab/dyadic.hpp"
#include "extrapolab/exponents.hpp"
#include "extrapolab/recip.hpp"
#include "extrapolab/weights.hpp"

namespace extrapolab {

namespace detail {

inline cell_t floor_div2(cell_t i) { return i >= 0 ? i / 2 : (i - 1) / 2; }

// Sweeps all cubes of one grid, coarse to fine; cube_value(q, cells) gives
// the cube functional, and the result per leaf cell is the max over the
// cell's ancestors. Cells under no cube of the grid get 0.
template <class CubeValue>
StepFunction ancestor_max_sweep(int grid, int L, CubeValue cube_value) {
    std::vector<double> prev;     // inherited values at the previous level
    cell_t prev_lo = 0;
    std::vector<double> out(static_cast<std::size_t>(cells_at_level(L)), 0.0);
    const cell_t off = grid_offset(grid, L);
    for (int k = 0; k <= L; ++k) {
        const cell_t span = cells_at_level(L - k);
        const cell_t lo = first_cube_index(grid, k, L);
        std::vector<double> cur;
        for (cell_t i = lo; (i + 1) * span + off <= cells_at_level(L); ++i) {
            const DyadicCube q{grid, k, i};
            double val = cube_value(q, cube_cells(q, L));
            if (k > 0) {
                const cell_t pi = floor_div2(i);
                const cell_t pidx = pi - prev_lo;
                if (pidx >= 0 && pidx < static_cast<cell_t>(prev.size()))
                    val = std::max(val, prev[static_cast<std::size_t>(pidx)]);
            }
            cur.push_back(val);
            if (k == L) out[static_cast<std::size_t>(i + off)] = val;
        }
        prev = std::move(cur);
        prev_lo = lo;
    }
    return StepFunction(L, std::move(out));
}

}  // namespace detail

struct MaxOperatorSpec {
    std::vector<Recip> r;                       // 1/r_j > 0
    GridFamily grid_mode = GridFamily::dyadic;
};

// M^D over a single grid: per cell, sup over containing cubes of
// prod_j <f_j>_{r_j,Q}
template <class Field>
StepFunction maximal_single_grid(const std::vector<Field>& f, const std::vector<Recip>& r,
                                 int grid) {
    if (f.size() != r.size()) throw std::invalid_argument("tuple size mismatch");
    const int L = detail::common_level(f);
    return detail::ancestor_max_sweep(grid, L, [&](const DyadicCube&, CellRange c) {
        double prod = 1.0;
        for (std::size_t j = 0; j < f.size(); ++j) prod *= f[j].avg(r[j].exponent(), c);
        return prod;
    });
}

template <class Field>
StepFunction maximal(const MaxOperatorSpec& spec, const std::vector<Field>& f) {
    return maximal_single_grid(f, spec.r, 0);
}

struct ThreeGridMaximal {
    std::array<StepFunction, 3> per_grid;
    StepFunction sum;  // the dyadic-grids majorant of the full maximal operator
};

template <class Field>
ThreeGridMaximal maximal_three_grid(const std::vector<Field>& f, const std::vector<Recip>& r) {
    ThreeGridMaximal out;
    for (int g = 0; g < 3; ++g) out.per_grid[g] = maximal_single_grid(f, r, g);
    std::vector<double> s(out.per_grid[0].values());
    for (int g = 1; g < 3; ++g)
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += out.per_grid[g].values()[i];
    out.sum = StepFunction(out.per_grid[0].level(), std::move(s));
    return out;
}

// M^{u,D}_t h: per cell, sup over dyadic cubes of the u-weighted L^t average
// ((1/u(Q)) int_Q h^t u)^{1/t}; t = infinity reads as esssup over Q.
inline StepFunction weighted_dyadic_maximal(const StepFunction& u, double t,
                                            const StepFunction& h) {
    require_same_level(u, h);
    const int L = u.level();
    if (std::isinf(t)) {
        return detail::ancestor_max_sweep(0, L,
                                          [&](const DyadicCube&, CellRange c) { return h.max_on(c); });
    }
    const StepFunction hu = mul(cellpow(h, t), u);
    return detail::ancestor_max_sweep(0, L, [&](const DyadicCube&, CellRange c) {
        const double num = hu.mass_pow(1.0, c);
        const double den = u.mass_pow(1.0, c);
        return std::pow(num / den, 1.0 / t);
    });
}

// Composite operator behind the strong-type bound: for 1/p_j > 0,
//   N_j f = M^{w^p,D}_{rho_j}( M^{v_j,D}_{r_j}(f v_j^{-1/r_j}) v_j^{1/p_j} w^{-(1/p_j)/(1/p)} )
//           * w^{(1/p_j)/(1/p)} * w_j^{-1},
// with v_j = w_j^{-1/(1/r_j-1/p_j)} and 1/rho_j = (1/p_j)(1/r_j)/((1/r_j)-(1/p_j)).
// For 1/p_j = 0 it degenerates to || M^{v_j,D}_{r_j}(f w_j) ||_inf * w_j^{-1}.
inline StepFunction n_operator(const std::vector<StepFunction>& w, const std::vector<Recip>& r,
                               const std::vector<Recip>& p, int j, const StepFunction& fj) {
    const double invr = r[static_cast<std::size_t>(j)].v;
    const double invp = p[static_cast<std::size_t>(j)].v;

    if (invp == 0.0) {
        // upper-endpoint branch; v_j^{-1/r_j} collapses to w_j regardless of r_j
        const StepFunction inner_in = mul(fj, w[static_cast<std::size_t>(j)]);
        StepFunction m1 = inner_in;
        if (invr > 0.0)
            m1 = weighted_dyadic_maximal(cellpow(w[static_cast<std::size_t>(j)], -1.0 / invr),
                                         1.0 / invr, inner_in);
        double sup = 0.0;
        for (cell_t i = 0; i < m1.cells(); ++i) sup = std::max(sup, m1[i]);
        return scale(cellpow(w[static_cast<std::size_t>(j)], -1.0), sup);
    }

    if (!(invp < invr)) throw std::domain_error("n_operator needs 1/p_j < 1/r_j");
    const StepFunction& wj = w[static_cast<std::size_t>(j)];
    const StepFunction vj = cellpow(wj, -1.0 / (invr - invp));
    const double ptot = recip_sum(p);
    const StepFunction wprod = detail::product_field(w);
    const StepFunction inner_in = mul(fj, cellpow(vj, -invr));
    const StepFunction m1 = weighted_dyadic_maximal(vj, 1.0 / invr, inner_in);
    const StepFunction mid = mul(mul(m1, cellpow(vj, invp)), cellpow(wprod, -invp / ptot));
    const double rho = (invr - invp) / (invp * invr);  // outer exponent value
    const StepFunction u2 = cellpow(wprod, 1.0 / ptot);
    const StepFunction m2 = weighted_dyadic_maximal(u2, rho, mid);
    return mul(mul(m2, cellpow(wprod, invp / ptot)), cellpow(wj, -1.0));
}

inline StepFunction n_operator(const std::vector<StepFunction>& w, const ScaleSetup& setup, int j,
                               const StepFunction& fj) {
    return n_operator(w, setup.r, setup.p, j, fj);
}

// certified norm bound used to seed the majorant series
inline double n_operator_analytic_bound(const std::vector<Recip>& r, const std::vector<Recip>& p,
                                        int j) {
    const double invr = r[static_cast<std::size_t>(j)].v;
    const double invp = p[static_cast<std::size_t>(j)].v;
    if (invp == 0.0) return 1.0;
    return std::exp(invr) * std::pow(invr / (invr - invp), invr);
}

inline double n_operator_analytic_bound(const ScaleSetup& setup, int j) {
    return n_operator_analytic_bound(setup.r, setup.p, j);
}

inline double norm_in_setup(const StepFunction& f, const StepFunction& wj, Recip pj) {
    return norm_weighted(f, wj, pj.exponent());
}

// sup_lambda lambda |{g > lambda}|; exact on step functions by scanning the
// finitely many level-set candidates
inline double weak_l1_quasinorm(const StepFunction& g) {
    std::vector<double> v(g.values());
    std::sort(v.begin(), v.end(), std::greater<>());
    double best = 0.0;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i + 1 < v.size() && v[i + 1] == v[i]) continue;  // take the last of a run
        best = std::max(best, v[i] * static_cast<double>(i + 1) / n);
    }
    return best;
}

// sup_lambda lambda (u^p{g > lambda})^{1/p}
inline double weak_lp_quasinorm(const StepFunction& g, const StepFunction& u, double p) {
    require_same_level(g, u);
    std::vector<std::pair<double, double>> cells;  // (g value, u^p cell mass)
    cells.reserve(static_cast<std::size_t>(g.cells()));
    const double n = static_cast<double>(g.cells());
    for (cell_t i = 0; i < g.cells(); ++i)
        cells.emplace_back(g[i], std::pow(u[i], p) / n);
    std::sort(cells.begin(), cells.end(), [](auto& a, auto& b) { return a.first > b.first; });
    double best = 0.0;
    long double mass = 0.0L;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        mass += cells[i].second;
        if (i + 1 < cells.size() && cells[i + 1].first == cells[i].first) continue;
        best = std::max(best, cells[i].first * static_cast<double>(std::pow(mass, 1.0L / p)));
    }
    return best;
}

struct WeakNormReport {
    double constant = 0.0;     // [w]_D for the symmetric tuple
    double upper_ratio = 0.0;  // largest weak-norm ratio seen on random data
    double lower_ratio = 0.0;  // ratio attained by the extremal test functions
};

// Two one-sided experiments around the weak-type equality in the dyadic
// model: random inputs never beat [w]_D, and the test functions
// f_j = v_j^{1/r_j} chi_Q at the attaining cube recover it.
template <class Rng>
WeakNormReport weak_norm_experiment(const std::vector<StepFunction>& w,
                                    const std::vector<Recip>& p, const std::vector<Recip>& r,
                                    int trials, Rng& rng) {
    const int L = detail::common_level(w);
    const WeightConstant wc = symmetric_constant(w, p, r);
    WeakNormReport rep;
    rep.constant = wc.value;

    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    for (int t = 0; t < trials; ++t) {
        std::vector<StepFunction> f;
        double norms = 1.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            std::vector<double> vals(static_cast<std::size_t>(cells_at_level(L)));
            for (double& x : vals) x = std::exp(unif(rng));
            f.emplace_back(L, std::move(vals));
            norms *= norm_in_setup(f.back(), w[j], p[j]);
        }
        const StepFunction m = maximal_single_grid(f, r, 0);
        rep.upper_ratio = std::max(rep.upper_ratio, weak_l1_quasinorm(m) / norms);
    }

    // extremal inputs supported on the attaining cube
    const CellRange c = cube_cells(wc.argmax, L);
    std::vector<StepFunction> f;
    double norms = 1.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double den = r[j].v - p[j].v;
        if (!(den > 0.0)) throw std::domain_error("weak experiment needs 1/p_j < 1/r_j");
        const StepFunction vj = cellpow(w[j], -1.0 / den);
        std::vector<double> vals(static_cast<std::size_t>(cells_at_level(L)), 0.0);
        for (cell_t i = c.lo; i < c.hi; ++i) vals[static_cast<std::size_t>(i)] = std::pow(vj[i], r[j].v);
        f.emplace_back(L, std::move(vals));
        norms *= norm_in_setup(f.back(), w[j], p[j]);
    }
    const StepFunction m = maximal_single_grid(f, r, 0);
    rep.lower_ratio = weak_l1_quasinorm(m) / norms;
    return rep;
}

struct StrongBoundReport {
    double gamma = 0.0;       // claimed exponent
    double cpr = 0.0;         // the structural product constant
    double constant = 0.0;    // [w] at the setup
    double max_ratio = 0.0;   // worst measured norm ratio
    double measured_c = 0.0;  // max_ratio / (cpr * [w]^gamma)
};

// ||M^D(f)||_{L^p(w^p)} <= C c_{p,r} [w]^gamma with gamma the sharp exponent;
// C is measured and reported.
template <class Rng>
StrongBoundReport strong_bound_check(const std::vector<StepFunction>& w, const ScaleSetup& setup,
                                     int trials, Rng& rng) {
    const SetupReport rep = validate_setup(setup, true);
    if (!rep.ok) throw std::domain_error("inadmissible setup: " + rep.what);
    const int L = detail::common_level(w);
    StrongBoundReport out;
    for (int j = 0; j < setup.m(); ++j)
        out.gamma = std::max(out.gamma, setup.r[j].v / (setup.r[j].v - setup.p[j].v));
    out.cpr = constant_cpr(setup.p, setup.r);
    out.constant = weight_constant(w, setup).value;

    const StepFunction wprod = detail::product_field(w);
    const double p = Recip{setup.p_total()}.exponent();
    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    for (int t = 0; t < trials; ++t) {
        std::vector<StepFunction> f;
        double norms = 1.0;
        for (int j = 0; j < setup.m(); ++j) {
            std::vector<double> vals(static_cast<std::size_t>(cells_at_level(L)));
            for (double& x : vals) x = std::exp(unif(rng));
            f.emplace_back(L, std::move(vals));
            norms *= norm_in_setup(f.back(), w[j], setup.p[j]);
        }
        const StepFunction m = maximal_single_grid(f, setup.r, 0);
        out.max_ratio = std::max(out.max_ratio, norm_weighted(m, wprod, p) / norms);
    }
    out.measured_c = out.max_ratio / (out.cpr * std::pow(out.constant, out.gamma));
    return out;
}

// M^# f = sup_Q <|f - <f>_{1,Q}|>_{1,Q} chi_Q over the dyadic family
inline StepFunction sharp_maximal(const StepFunction& f) {
    const int L = f.level();
    return detail::ancestor_max_sweep(0, L, [&](const DyadicCube&, CellRange c) {
        const double mean = f.avg(1.0, c);
        long double osc = 0.0L;
        for (cell_t i = c.lo; i < c.hi; ++i) osc += std::abs(f[i] - mean);
        return static_cast<double>(osc / static_cast<long double>(c.size()));
    });
}

inline double bmo_norm(const StepFunction& f, const StepFunction& w) {
    return norm_weighted(sharp_maximal(f), w, std::numeric_limits<double>::infinity());
}

}  // namespace extrapolab
