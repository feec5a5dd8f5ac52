#pragma once

// Stopping-time sparse collections, sparse operators A and forms Lambda,
// and the weighted bound suite. Dimension 1, grid 0.
//
// The stopping thresholds are 2^((2/r) k) with 1/r = sum_j 1/r_j; a step
// function takes finitely many values so only finitely many k are active.
// The root is recorded once, at the largest k it qualifies for, and is
// exempt from the upper stopping inequality.

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "extrapolab/dyadic.hpp"
#include "extrapolab/maximal.hpp"
#include "extrapolab/recip.hpp"

namespace extrapolab {

struct SparseEntry {
    DyadicCube cube;
    CellRange cells;              // cube cells (grid 0)
    std::vector<cell_t> e_cells;  // the reserved subset E_Q
    int k = 0;                    // stopping level
    bool is_root = false;
};

struct SparseCollection {
    int level = 0;
    std::vector<SparseEntry> entries;
};

struct SparsityReport {
    bool ok = true;
    std::string what;
};

// disjointness of the E_Q, containment, and |Q| <= 2|E_Q|
inline SparsityReport validate_sparse(const SparseCollection& s) {
    std::vector<char> owned(static_cast<std::size_t>(cells_at_level(s.level)), 0);
    for (const SparseEntry& e : s.entries) {
        if (2 * static_cast<cell_t>(e.e_cells.size()) < e.cells.size())
            return {false, "sparsity violated: |Q| > 2|E_Q|"};
        for (cell_t c : e.e_cells) {
            if (c < e.cells.lo || c >= e.cells.hi) return {false, "E_Q escapes its cube"};
            if (owned[static_cast<std::size_t>(c)]) return {false, "E_Q sets overlap"};
            owned[static_cast<std::size_t>(c)] = 1;
        }
    }
    return {};
}

namespace detail {

// per-cube products prod_j <f_j>_{r_j,Q} for grid-0 cubes, level by level
template <class Field>
std::vector<std::vector<double>> cube_products(const std::vector<Field>& f,
                                               const std::vector<Recip>& r, int L) {
    std::vector<std::vector<double>> prods(static_cast<std::size_t>(L) + 1);
    for (int k = 0; k <= L; ++k) {
        const cell_t span = cells_at_level(L - k);
        prods[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(cells_at_level(k)));
        for (cell_t i = 0; i < cells_at_level(k); ++i) {
            double prod = 1.0;
            const CellRange c{i * span, (i + 1) * span};
            for (std::size_t j = 0; j < f.size(); ++j) prod *= f[j].avg(r[j].exponent(), c);
            prods[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = prod;
        }
    }
    return prods;
}

}  // namespace detail

// Calderon-Zygmund stopping construction: maximal cubes of the superlevel
// sets {M^D > 2^((2/r)k)}, with E_Q = Q minus the next superlevel set.
// The resulting collection is sparse and 2^(2/r) A_{r,S} dominates M^D.
template <class Field>
SparseCollection cz_sparse(const std::vector<Recip>& r, const std::vector<Field>& f) {
    if (f.size() != r.size()) throw std::invalid_argument("tuple size mismatch");
    const int L = detail::common_level(f);
    SparseCollection out;
    out.level = L;

    const auto prods = detail::cube_products(f, r, L);
    const double root_prod = prods[0][0];
    if (!(root_prod > 0.0)) return out;  // all data zero

    const StepFunction m = maximal_single_grid(f, r, 0);
    const double inv_r = recip_sum(r);
    const double step = 2.0 * inv_r;  // log2 of the threshold ratio
    auto threshold = [&](long k) { return std::exp2(step * static_cast<double>(k)); };

    // per-cube maxima of M, for pruning the descent
    std::vector<std::vector<double>> max_m_at(static_cast<std::size_t>(L) + 1);
    max_m_at[static_cast<std::size_t>(L)] = m.values();
    for (int k = L - 1; k >= 0; --k) {
        auto& cur = max_m_at[static_cast<std::size_t>(k)];
        const auto& fine = max_m_at[static_cast<std::size_t>(k) + 1];
        cur.resize(static_cast<std::size_t>(cells_at_level(k)));
        for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = std::max(fine[2 * i], fine[2 * i + 1]);
    }
    const double max_m = max_m_at[0][0];

    // largest k with root_prod > threshold(k)
    long k_root = static_cast<long>(std::floor(std::log2(root_prod) / step));
    while (threshold(k_root) >= root_prod) --k_root;
    while (threshold(k_root + 1) < root_prod) ++k_root;

    for (long k = k_root; threshold(k) < max_m; ++k) {
        const double lam = threshold(k);
        const double lam_next = threshold(k + 1);
        // DFS for maximal cubes with prod(Q) > lam
        std::vector<DyadicCube> stack{DyadicCube{0, 0, 0}};
        while (!stack.empty()) {
            const DyadicCube q = stack.back();
            stack.pop_back();
            const double prod =
                prods[static_cast<std::size_t>(q.level)][static_cast<std::size_t>(q.index)];
            const CellRange c = cube_cells(q, L);
            if (prod > lam) {
                SparseEntry e;
                e.cube = q;
                e.cells = c;
                e.k = static_cast<int>(k);
                e.is_root = q.level == 0;
                for (cell_t i = c.lo; i < c.hi; ++i)
                    if (!(m[i] > lam_next)) e.e_cells.push_back(i);
                out.entries.push_back(std::move(e));
            } else if (q.level < L &&
                       max_m_at[static_cast<std::size_t>(q.level)]
                               [static_cast<std::size_t>(q.index)] > lam) {
                const auto [a, b] = children(q);
                stack.push_back(b);
                stack.push_back(a);
            }
        }
    }

    const SparsityReport rep = validate_sparse(out);
    if (!rep.ok) throw std::logic_error("stopping construction broke sparsity: " + rep.what);
    return out;
}

// A_{r,S}(f) = sum_Q (prod_j <f_j>_{r_j,Q}) chi_Q
template <class Field>
StepFunction sparse_operator(const std::vector<Recip>& r, const SparseCollection& s,
                             const std::vector<Field>& f) {
    const int L = s.level;
    std::vector<double> acc(static_cast<std::size_t>(cells_at_level(L)), 0.0);
    for (const SparseEntry& e : s.entries) {
        double prod = 1.0;
        for (std::size_t j = 0; j < f.size(); ++j) prod *= f[j].avg(r[j].exponent(), e.cells);
        for (cell_t i = e.cells.lo; i < e.cells.hi; ++i) acc[static_cast<std::size_t>(i)] += prod;
    }
    return StepFunction(L, std::move(acc));
}

// same sum restricted to the reserved sets E_Q (the domination majorant)
template <class Field>
StepFunction sparse_operator_reserved(const std::vector<Recip>& r, const SparseCollection& s,
                                      const std::vector<Field>& f) {
    const int L = s.level;
    std::vector<double> acc(static_cast<std::size_t>(cells_at_level(L)), 0.0);
    for (const SparseEntry& e : s.entries) {
        double prod = 1.0;
        for (std::size_t j = 0; j < f.size(); ++j) prod *= f[j].avg(r[j].exponent(), e.cells);
        for (cell_t i : e.e_cells) acc[static_cast<std::size_t>(i)] += prod;
    }
    return StepFunction(L, std::move(acc));
}

// Lambda_{r,S}(f) = sum_Q (prod_j <f_j>_{r_j,Q}) |Q|
template <class Field>
double sparse_form(const std::vector<Recip>& r, const SparseCollection& s,
                   const std::vector<Field>& f) {
    long double acc = 0.0L;
    const long double n = static_cast<long double>(cells_at_level(s.level));
    for (const SparseEntry& e : s.entries) {
        double prod = 1.0;
        for (std::size_t j = 0; j < f.size(); ++j) prod *= f[j].avg(r[j].exponent(), e.cells);
        acc += static_cast<long double>(prod) * static_cast<long double>(e.cells.size()) / n;
    }
    return static_cast<double>(acc);
}

// random valid sparse collection: deepest-first greedy reservation of cells
template <class Rng>
SparseCollection random_sparse(int L, Rng& rng, double keep_prob = 0.35) {
    SparseCollection out;
    out.level = L;
    std::vector<char> owned(static_cast<std::size_t>(cells_at_level(L)), 0);
    std::bernoulli_distribution keep(keep_prob);
    for (int k = L; k >= 0; --k) {
        for (cell_t i = 0; i < cells_at_level(k); ++i) {
            if (!keep(rng)) continue;
            const DyadicCube q{0, k, i};
            const CellRange c = cube_cells(q, L);
            std::vector<cell_t> free;
            for (cell_t x = c.lo; x < c.hi; ++x)
                if (!owned[static_cast<std::size_t>(x)]) free.push_back(x);
            if (2 * static_cast<cell_t>(free.size()) < c.size()) continue;
            for (cell_t x : free) owned[static_cast<std::size_t>(x)] = 1;
            out.entries.push_back({q, c, std::move(free), 0, k == 0});
        }
    }
    return out;
}

struct LambdaEquivReport {
    double m_l1 = 0.0;            // ||M^D(f)||_{L^1}
    double lambda_cz = 0.0;       // Lambda over the stopping collection
    double upper_constant = 0.0;  // m_l1 / lambda_cz, bounded by 2^(2/r)
    double max_lower_ratio = 0.0; // Lambda_S' / m_l1 over random S', bounded by 2
};

// two-sided L^1 comparison between the maximal function and sparse forms
template <class Field, class Rng>
LambdaEquivReport lambda_equiv_check(const std::vector<Recip>& r, const std::vector<Field>& f,
                                     int random_collections, Rng& rng) {
    LambdaEquivReport rep;
    const StepFunction m = maximal_single_grid(f, r, 0);
    rep.m_l1 = norm_lp(m, 1.0);
    const SparseCollection s = cz_sparse(r, f);
    rep.lambda_cz = sparse_form(r, s, f);
    rep.upper_constant = rep.lambda_cz > 0.0 ? rep.m_l1 / rep.lambda_cz : 0.0;
    const int L = detail::common_level(f);
    for (int t = 0; t < random_collections; ++t) {
        const SparseCollection sr = random_sparse(L, rng);
        const double lam = sparse_form(r, sr, f);
        if (rep.m_l1 > 0.0) rep.max_lower_ratio = std::max(rep.max_lower_ratio, lam / rep.m_l1);
    }
    return rep;
}

struct LambdaWeightReport {
    double gamma = 0.0;
    double constant = 0.0;          // [w] for the symmetric tuple
    double percube_measured = 0.0;  // worst per-cube ratio over [w]^gamma
    double percube_bound = 0.0;     // 2^(1 - sum beta_j) from the proof chain
    double global_c = 0.0;          // Lambda / (c_{p,r} [w]^gamma prod ||f_j||)
};

// Per-cube reserved-set bound and the global weighted bound for the sparse
// form over a symmetric (m+1)-tuple with prod_j w_j = 1.
inline LambdaWeightReport lambda_weight_bound(const std::vector<Recip>& p,
                                              const std::vector<Recip>& r,
                                              const std::vector<StepFunction>& w,
                                              const std::vector<StepFunction>& f,
                                              const SparseCollection& s) {
    require_product_one(w);
    if (rel_diff(recip_sum(p), 1.0) > 1e-9)
        throw std::invalid_argument("symmetric tuple reciprocals must sum to 1");
    const int L = detail::common_level(w);
    const cell_t n = cells_at_level(L);

    LambdaWeightReport rep;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double den = r[j].v - p[j].v;
        if (!(den > 0.0)) throw std::domain_error("needs 1/p_j < 1/r_j");
        rep.gamma = std::max(rep.gamma, r[j].v / den);
    }
    rep.constant = symmetric_constant(w, p, r).value;

    std::vector<StepFunction> v;
    std::vector<double> beta(p.size());
    double beta_sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        v.push_back(cellpow(w[j], -1.0 / (r[j].v - p[j].v)));
        beta[j] = r[j].v - (r[j].v - p[j].v) * rep.gamma;
        beta_sum += beta[j];
    }
    rep.percube_bound = std::pow(2.0, 1.0 - beta_sum);

    const double wg = std::pow(rep.constant, rep.gamma);
    for (const SparseEntry& e : s.entries) {
        double lhs = static_cast<double>(e.cells.size()) / static_cast<double>(n);
        double rhs = 1.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            lhs *= std::pow(v[j].avg(1.0, e.cells), r[j].v);
            long double ve = 0.0L;
            for (cell_t c : e.e_cells) ve += v[j][c];
            rhs *= std::pow(static_cast<double>(ve / static_cast<long double>(n)), p[j].v);
        }
        rep.percube_measured = std::max(rep.percube_measured, lhs / (wg * rhs));
    }

    double norms = 1.0;
    for (std::size_t j = 0; j < p.size(); ++j) norms *= norm_weighted(f[j], w[j], p[j].exponent());
    const double lambda = sparse_form(r, s, f);
    rep.global_c = lambda / (constant_cpr(p, r) * wg * norms);
    return rep;
}

}  // namespace extrapolab
