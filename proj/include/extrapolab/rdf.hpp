#pragma once

// Majorant series built on the composite N operators, the single-stage and
// chained weight constructions that transfer an estimate from one exponent
// tuple to another, and the end-to-end pipeline check.
//
// The operator norm in the series denominator is replaced by a certified
// upper bound B, seeded with the analytic constant and doubled whenever an
// iterate violates ||N g|| <= B ||g||; any B >= ||N|| keeps the majorant
// properties, only the series tail changes.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "extrapolab/dyadic.hpp"
#include "extrapolab/exponents.hpp"
#include "extrapolab/maximal.hpp"
#include "extrapolab/recip.hpp"
#include "extrapolab/rng.hpp"
#include "extrapolab/sparse.hpp"
#include "extrapolab/weights.hpp"

namespace extrapolab {

struct RdfOperator {
    std::vector<StepFunction> w;  // m weights of the (translated) scale
    std::vector<Recip> r;         // 1/r_j(s) >= 0
    std::vector<Recip> p;         // 1/p_j(s) >= 0
    int j = 0;
    double bound = 0.0;           // certified norm bound B_j
    int truncation = 30;          // series length K
    int doublings = 0;

    RdfOperator(std::vector<StepFunction> weights, std::vector<Recip> rv, std::vector<Recip> pv,
                int index, int K = 30)
        : w(std::move(weights)), r(std::move(rv)), p(std::move(pv)), j(index), truncation(K) {
        bound = n_operator_analytic_bound(r, p, j);
    }

    double tail_slack() const { return std::exp2(-static_cast<double>(truncation)); }
};

// truncated majorant series sum_{k<=K} N^k f / (2B)^k; guarantees
// |f| <= Rf (the k = 0 term) and ||Rf|| <= 2 ||f||
inline StepFunction rdf_apply(RdfOperator& op, const StepFunction& f) {
    const Recip pj = op.p[static_cast<std::size_t>(op.j)];
    const StepFunction& wj = op.w[static_cast<std::size_t>(op.j)];
    const double fnorm = norm_weighted(f, wj, pj.exponent());
    if (!(fnorm > 0.0)) return f;
    if (!std::isfinite(fnorm)) throw std::domain_error("datum has infinite norm");

    for (;;) {
        StepFunction acc = f;
        StepFunction g = f;
        double gnorm = fnorm;
        double coeff = 1.0;
        bool recalibrated = false;
        for (int k = 1; k <= op.truncation; ++k) {
            g = n_operator(op.w, op.r, op.p, op.j, g);
            const double next_norm = norm_weighted(g, wj, pj.exponent());
            if (next_norm > op.bound * gnorm * (1.0 + 1e-12)) {
                op.bound *= 2.0;  // calibration rule: iterates audit the bound
                if (++op.doublings > 20) throw std::runtime_error("norm bound diverged");
                recalibrated = true;
                break;
            }
            gnorm = next_norm;
            coeff /= 2.0 * op.bound;
            acc = pointwise(acc, scale(g, coeff), [](double a, double b) { return a + b; });
        }
        if (!recalibrated) return acc;
    }
}

struct Property3Report {
    double gamma = 0.0;
    double constant = 0.0;   // [w] at the (translated) scale
    double max_ratio = 0.0;  // worst per-cube ratio against the infimum
    double measured_c = 0.0; // max_ratio / ((1+slack) 2^m c_{p,r} [w]^gamma)
};

// per-cube check of prod_j <Rf_j>_{r_j,Q} <= (1+slack) C 2^m c_{p,r} [w]^gamma
// inf_Q prod_j Rf_j; the majorants rf must come from the given operators
inline Property3Report rdf_property3_check(const std::vector<RdfOperator>& ops,
                                           const std::vector<StepFunction>& rf) {
    const std::size_t m = ops.size();
    const int L = detail::common_level(rf);
    Property3Report rep;
    std::vector<Recip> rv(m), pv(m);
    for (std::size_t j = 0; j < m; ++j) {
        rv[j] = ops[j].r[j];
        pv[j] = ops[j].p[j];
        const double den = rv[j].v - pv[j].v;
        rep.gamma = std::max(rep.gamma, den == 0.0 ? 1.0 : rv[j].v / den);
    }
    // the translated scale may carry zero r-components; the weight constant
    // formula only needs the average exponents, which stay valid
    {
        std::vector<StepFunction> inv;
        for (const StepFunction& wj : ops.front().w) inv.push_back(cellpow(wj, -1.0));
        const StepFunction prod = detail::product_field(ops.front().w);
        for (const DyadicCube& q : cubes(0, L, L)) {
            const CellRange c = cube_cells(q, L);
            double val = detail::power_avg(prod, recip_sum(pv), c);
            for (std::size_t j = 0; j < m; ++j)
                val *= detail::power_avg(inv[j], rv[j].v - pv[j].v, c);
            rep.constant = std::max(rep.constant, val);
        }
    }

    StepFunction prod_rf = rf.front();
    for (std::size_t j = 1; j < m; ++j) prod_rf = mul(prod_rf, rf[j]);

    // per-cube minima of the pointwise product
    std::vector<std::vector<double>> minv(static_cast<std::size_t>(L) + 1);
    minv[static_cast<std::size_t>(L)] = prod_rf.values();
    for (int k = L - 1; k >= 0; --k) {
        auto& cur = minv[static_cast<std::size_t>(k)];
        const auto& fine = minv[static_cast<std::size_t>(k) + 1];
        cur.resize(static_cast<std::size_t>(cells_at_level(k)));
        for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = std::min(fine[2 * i], fine[2 * i + 1]);
    }

    for (const DyadicCube& q : cubes(0, L, L)) {
        const CellRange c = cube_cells(q, L);
        double lhs = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double t = rv[j].v == 0.0 ? std::numeric_limits<double>::infinity()
                                            : 1.0 / rv[j].v;
            lhs *= rf[j].avg(t, c);
        }
        const double inf =
            minv[static_cast<std::size_t>(q.level)][static_cast<std::size_t>(q.index)];
        if (inf > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs / inf);
    }

    double slack = 0.0;
    for (const RdfOperator& op : ops) slack = std::max(slack, op.tail_slack());
    const double cpr = constant_cpr(pv, rv);
    rep.measured_c = rep.max_ratio /
                     ((1.0 + slack) * std::exp2(static_cast<double>(m)) * cpr *
                      std::pow(rep.constant, rep.gamma));
    return rep;
}

struct StageReport {
    int pivot = 0;               // index moved by this stage (original coordinates)
    double norm_factor = 0.0;    // prod new norms / prod old norms
    double norm_bound = 0.0;     // 2^m
    double constant_before = 0.0;
    double constant_after = 0.0;
    double claimed_exponent = 0.0;
    double measured_c = 0.0;     // constant_after / constant_before^claimed
};

struct ExtrapolatedWeights {
    std::vector<StepFunction> w;  // m+1 weights with cellwise product 1
    std::vector<StageReport> stages;
    double norm_transfer = 0.0;   // final norms over initial norms
    double norm_transfer_bound = 0.0;  // 2^(m^2)
};

namespace detail {

inline double norm_tuple(const std::vector<StepFunction>& f, const std::vector<StepFunction>& w,
                         const std::vector<Recip>& p) {
    double out = 1.0;
    for (std::size_t j = 0; j < f.size(); ++j)
        out *= norm_weighted(f[j], w[j], p[j].exponent());
    return out;
}

// ratio a/b with the 0/0 -> fallback convention of the equality indices
inline double ratio_or(double a, double b, double fallback) {
    if (b == 0.0) return fallback;
    return a / b;
}

}  // namespace detail

// One stage: exactly one index moves up (1/p_j < 1/q_j), every other index
// moves down or stays. Builds the m+1 new weights through the majorant
// series on the translated scale.
inline ExtrapolatedWeights build_weights_step1(const std::vector<StepFunction>& f,
                                               const std::vector<StepFunction>& w,
                                               const std::vector<Recip>& p,
                                               const std::vector<Recip>& q,
                                               const std::vector<Recip>& r, int K = 30) {
    const std::size_t n = p.size();
    if (f.size() != n || w.size() != n || q.size() != n || r.size() != n)
        throw std::invalid_argument("tuple size mismatch");
    if (rel_diff(recip_sum(p), 1.0) > 1e-9 || rel_diff(recip_sum(q), 1.0) > 1e-9)
        throw std::invalid_argument("reciprocals must sum to 1");
    require_product_one(w);
    for (std::size_t j = 0; j < n; ++j) {
        if (!(p[j].v < r[j].v)) throw std::domain_error("need 1/p_j < 1/r_j");
        if (!(q[j].v <= r[j].v)) throw std::domain_error("need 1/q_j <= 1/r_j");
    }
    for (const StepFunction& fj : f) {
        double sup = 0.0;
        for (cell_t i = 0; i < fj.cells(); ++i) sup = std::max(sup, fj[i]);
        if (!(sup > 0.0)) throw std::domain_error("zero datum");
    }

    std::vector<std::size_t> up;
    for (std::size_t j = 0; j < n; ++j)
        if (p[j].v < q[j].v) up.push_back(j);
    if (up.empty()) {  // p == q under the sum constraint
        ExtrapolatedWeights out;
        out.w = w;
        out.norm_transfer = 1.0;
        out.norm_transfer_bound = std::exp2(static_cast<double>((n - 1) * (n - 1)));
        return out;
    }
    if (up.size() > 1) throw std::domain_error("use step2: more than one increasing index");
    const std::size_t j0 = up.front();

    // local order: j0 last
    std::vector<std::size_t> loc(n);
    std::iota(loc.begin(), loc.end(), 0);
    std::swap(loc[j0], loc[n - 1]);
    const std::size_t m = n - 1;

    auto pick_r = [&](std::size_t t) { return r[loc[t]]; };
    auto pick_p = [&](std::size_t t) { return p[loc[t]]; };
    auto pick_q = [&](std::size_t t) { return q[loc[t]]; };

    const double inv_s = 1.0 - pick_r(m).v;
    double inv_p = 0.0, inv_q = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        inv_p += pick_p(t).v;
        inv_q += pick_q(t).v;
    }
    if (!(inv_p > inv_q)) throw std::domain_error("degenerate direction: 1/p equals 1/q");

    // directional split of 1/s across the m moving-down slots
    std::vector<double> sj(m), ps(m), qs(m), rs(m);
    for (std::size_t t = 0; t < m; ++t) {
        if (pick_q(t).v == pick_p(t).v) {
            sj[t] = pick_p(t).v;
        } else {
            sj[t] = ((inv_p - inv_s) * pick_q(t).v - (inv_q - inv_s) * pick_p(t).v) /
                    (inv_p - inv_q);
        }
        ps[t] = pick_p(t).v - sj[t];
        qs[t] = pick_q(t).v - sj[t];
        rs[t] = pick_r(t).v - sj[t];
    }
    const double inv_ps = inv_p - inv_s;  // = 1/r_{m+1} - 1/p_{m+1} > 0
    const double inv_qs = inv_q - inv_s;

    std::vector<StepFunction> w_loc;
    std::vector<StepFunction> f_loc;
    for (std::size_t t = 0; t < m; ++t) {
        w_loc.push_back(w[loc[t]]);
        f_loc.push_back(f[loc[t]]);
    }
    std::vector<Recip> rs_r(m), ps_r(m);
    for (std::size_t t = 0; t < m; ++t) {
        rs_r[t] = Recip{rs[t]};
        ps_r[t] = Recip{ps[t]};
    }

    // g_t = |f_t|^{(1/p_t(s))/(1/p_t)} w_t^{-(1/s_t)/(1/p_t)}; at an
    // upper-endpoint slot both exponent ratios degenerate to (1, 0)
    const double e_r = inv_ps == 0.0 ? 0.0 : (inv_ps - inv_qs) / inv_ps;
    const double e_w = inv_ps == 0.0 ? 1.0 : inv_qs / inv_ps;

    std::vector<StepFunction> new_w_loc;
    for (std::size_t t = 0; t < m; ++t) {
        const double ga = detail::ratio_or(ps[t], pick_p(t).v, 1.0);
        const double gb = detail::ratio_or(sj[t], pick_p(t).v, 0.0);
        const StepFunction g = mul(cellpow(f_loc[t], ga), cellpow(w_loc[t], -gb));
        RdfOperator op(w_loc, rs_r, ps_r, static_cast<int>(t), K);
        const StepFunction rg = rdf_apply(op, g);
        new_w_loc.push_back(mul(cellpow(rg, -e_r), cellpow(w_loc[t], e_w)));
    }

    // last weight closes the product to 1
    StepFunction prod = StepFunction::constant(w.front().level(), 1.0);
    for (const StepFunction& wj : new_w_loc) prod = mul(prod, wj);
    new_w_loc.push_back(cellpow(prod, -1.0));

    ExtrapolatedWeights out;
    out.w.resize(n, StepFunction::constant(w.front().level(), 1.0));
    for (std::size_t t = 0; t < n; ++t) out.w[loc[t]] = new_w_loc[t];

    StageReport st;
    st.pivot = static_cast<int>(j0);
    st.norm_bound = std::exp2(static_cast<double>(m));
    st.norm_factor = detail::norm_tuple(f, out.w, q) / detail::norm_tuple(f, w, p);
    st.constant_before = symmetric_constant(w, p, r).value;
    st.constant_after = symmetric_constant(out.w, q, r).value;
    st.claimed_exponent = extrapolation_exponent_sym(p, q, r);
    st.measured_c = st.constant_after / std::pow(st.constant_before, st.claimed_exponent);
    out.stages.push_back(st);
    out.norm_transfer = st.norm_factor;
    out.norm_transfer_bound = std::exp2(static_cast<double>(m * m));
    return out;
}

// Full construction: chains single stages along the extrapolation path.
// Inputs are (m+1)-tuples with reciprocals summing to 1 and cellwise
// product-one weights.
inline ExtrapolatedWeights build_weights(const std::vector<StepFunction>& f,
                                         const std::vector<StepFunction>& w,
                                         const std::vector<Recip>& p, const std::vector<Recip>& q,
                                         const std::vector<Recip>& r, int K = 30) {
    const ExtrapolationPath path = step2_path(p, q, r);
    const std::size_t n = p.size();
    if (path.trivial) {
        ExtrapolatedWeights out;
        out.w = w;
        out.norm_transfer = 1.0;
        out.norm_transfer_bound = std::exp2(static_cast<double>((n - 1) * (n - 1)));
        return out;
    }

    auto apply_perm = [&](const auto& xs) {
        std::remove_cvref_t<decltype(xs)> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(xs[static_cast<std::size_t>(path.perm[i])]);
        return out;
    };
    const std::vector<StepFunction> f_s = apply_perm(f);
    std::vector<StepFunction> w_s = apply_perm(w);
    const std::vector<Recip> r_s = apply_perm(r);

    ExtrapolatedWeights out;
    out.norm_transfer_bound = std::exp2(static_cast<double>((n - 1) * (n - 1)));
    double first_norms = detail::norm_tuple(f_s, w_s, path.seq.front());
    for (std::size_t t = 1; t < path.seq.size(); ++t) {
        ExtrapolatedWeights stage =
            build_weights_step1(f_s, w_s, path.seq[t - 1], path.seq[t], r_s, K);
        w_s = stage.w;
        for (StageReport& sr : stage.stages) {
            sr.pivot = path.perm[static_cast<std::size_t>(sr.pivot)];
            out.stages.push_back(sr);
        }
    }
    out.norm_transfer = detail::norm_tuple(f_s, w_s, path.seq.back()) / first_norms;

    // undo the sort
    out.w.resize(n, StepFunction::constant(w.front().level(), 1.0));
    for (std::size_t i = 0; i < n; ++i) out.w[static_cast<std::size_t>(path.perm[i])] = w_s[i];
    return out;
}

struct PipelineReport {
    bool hypothesis_ok = true;      // the q-scale oracle held for every constructed tuple
    bool chain_ok = true;           // Holder + norm-transfer chain held numerically
    double duality_rel = 0.0;       // extremal candidate attainment error
    double max_uncertainty = 0.0;   // measured multiplier against the composed power law
    double weak_max_uncertainty = 0.0;
    int hypothesis_failures = 0;
};

namespace detail {

// duality-extremal candidate for || . ||_{L^t(u^t)} with t in (1, infinity)
inline StepFunction extremal_candidate(const StepFunction& h, const StepFunction& u, double t) {
    const StepFunction hu = mul(h, u);
    return mul(cellpow(hu, t - 1.0), u);
}

}  // namespace detail

// End-to-end run: rescale so the r-reciprocals sum to 1, extend to the
// symmetric tuple, build weights per dual candidate, check the q-scale
// hypothesis and the concluded p-scale bound with the composed power law.
template <class Rng>
PipelineReport extrapolation_pipeline_check(const std::vector<StepFunction>& f,
                                            const StepFunction& h,
                                            const std::vector<StepFunction>& w,
                                            const ScaleSetup& target, const std::vector<Recip>& q,
                                            const PowerLaw& phi_q, int candidates, int lambda_grid,
                                            Rng& rng, int K = 30) {
    const SetupReport admis = validate_setup(target, true);
    if (!admis.ok) throw std::domain_error("inadmissible target: " + admis.what);
    const int L = detail::common_level(w);
    const std::size_t m = w.size();

    const double alpha = 1.0 / recip_sum(target.r);  // rescale factor, <= min r_j
    const ScaleSetup rs = rescale(target, alpha);
    std::vector<Recip> q_rs(q);
    for (Recip& x : q_rs) x.v *= alpha;

    auto powed = [&](const std::vector<StepFunction>& xs, double e) {
        std::vector<StepFunction> out;
        out.reserve(xs.size());
        for (const StepFunction& x : xs) out.push_back(cellpow(x, e));
        return out;
    };
    const std::vector<StepFunction> f_rs = powed(f, alpha);
    const std::vector<StepFunction> w_rs = powed(w, alpha);
    const StepFunction h_rs = cellpow(h, alpha);

    // symmetric extension at the rescaled scale
    std::vector<Recip> p_ext(rs.p), q_ext(q_rs), r_ext(rs.r);
    p_ext.push_back(Recip{1.0 - recip_sum(rs.p)});
    q_ext.push_back(Recip{1.0 - recip_sum(q_rs)});
    r_ext.push_back(Recip{1.0 - rs.s.v});
    const StepFunction wprod_rs = detail::product_field(w_rs);
    std::vector<StepFunction> w_ext(w_rs);
    w_ext.push_back(cellpow(wprod_rs, -1.0));

    const double p_exp_rs = 1.0 / recip_sum(rs.p);
    const double pm1_exp_rs = p_ext.back().exponent();
    const StepFunction wm1_rs = w_ext.back();

    const StepFunction wprod = detail::product_field(w);
    const double p_exp = 1.0 / target.p_total();
    const double q_exp = 1.0 / recip_sum(q);
    const double h_norm = norm_weighted(h, wprod, p_exp);
    const double f_norms = detail::norm_tuple(f, w, target.p);
    if (!(h_norm > 0.0)) return PipelineReport{};  // nothing to bound
    const PowerLaw composed = phi_compose(phi_q, target.p, q, target.r, target.s);
    const double wconst = weight_constant(w, target).value;
    const double bound_core = composed(wconst) * f_norms;

    PipelineReport rep;

    auto run_candidate = [&](const StepFunction& h_loc, const StepFunction& h_rs_loc,
                             const StepFunction& g, bool extremal) -> double {
        std::vector<StepFunction> f_tuple(f_rs);
        f_tuple.push_back(g);
        const ExtrapolatedWeights built = build_weights(f_tuple, w_ext, p_ext, q_ext, r_ext, K);

        // hypothesis at the original q-scale for the constructed weights
        std::vector<StepFunction> w_orig;
        for (std::size_t j = 0; j < m; ++j) w_orig.push_back(cellpow(built.w[j], 1.0 / alpha));
        const StepFunction worig_prod = detail::product_field(w_orig);
        const double hyp_lhs = norm_weighted(h_loc, worig_prod, q_exp);
        double hyp_rhs = phi_q(
            weight_constant(w_orig, ScaleSetup(target.r, target.s, q)).value);
        for (std::size_t j = 0; j < m; ++j)
            hyp_rhs *= norm_weighted(f[j], w_orig[j], q[j].exponent());
        if (hyp_lhs > hyp_rhs * (1.0 + 1e-9)) {
            rep.hypothesis_ok = false;
            ++rep.hypothesis_failures;
        }

        // Holder + norm transfer chain at the rescaled scale
        const double pair = pairing(h_rs_loc, g);
        const double q_exp_rs = 1.0 / recip_sum(q_rs);
        const StepFunction wq_prod = detail::product_field(
            std::vector<StepFunction>(built.w.begin(), built.w.begin() + static_cast<long>(m)));
        const double holder = norm_weighted(h_rs_loc, wq_prod, q_exp_rs) *
                              norm_weighted(g, built.w.back(), q_ext.back().exponent());
        if (pair > holder * (1.0 + 1e-9)) rep.chain_ok = false;
        if (built.norm_transfer > built.norm_transfer_bound * (1.0 + 1e-9)) rep.chain_ok = false;

        // candidate's implied estimate of ||h||_{L^p(w^p)}
        const double g_norm = norm_weighted(g, wm1_rs, pm1_exp_rs);
        const double implied = std::pow(pair / g_norm, 1.0 / alpha);
        if (extremal) rep.duality_rel = rel_diff(implied, h_norm);
        return implied / bound_core;
    };

    for (int c = 0; c < candidates; ++c) {
        const StepFunction g = random_weight(L, rng);
        rep.max_uncertainty =
            std::max(rep.max_uncertainty, run_candidate(h, h_rs, g, false));
    }
    {
        const StepFunction g = detail::extremal_candidate(h_rs, wprod_rs, p_exp_rs);
        rep.max_uncertainty = std::max(rep.max_uncertainty, run_candidate(h, h_rs, g, true));
    }

    // weak-type reduction: h_lambda = lambda on the superlevel set
    if (lambda_grid > 0) {
        double hmax = 0.0;
        for (cell_t i = 0; i < h.cells(); ++i) hmax = std::max(hmax, h[i]);
        for (int t = 0; t < lambda_grid; ++t) {
            const double lam =
                hmax * std::exp2(-12.0 * (1.0 - static_cast<double>(t) / lambda_grid));
            std::vector<double> vals(static_cast<std::size_t>(h.cells()), 0.0);
            bool nonzero = false;
            for (cell_t i = 0; i < h.cells(); ++i)
                if (h[i] > lam) {
                    vals[static_cast<std::size_t>(i)] = lam;
                    nonzero = true;
                }
            if (!nonzero) continue;
            const StepFunction h_lam(L, std::move(vals));
            const StepFunction h_lam_rs = cellpow(h_lam, alpha);
            const StepFunction g = detail::extremal_candidate(h_lam_rs, wprod_rs, p_exp_rs);
            rep.weak_max_uncertainty =
                std::max(rep.weak_max_uncertainty, run_candidate(h_lam, h_lam_rs, g, false));
        }
    }
    return rep;
}

}  // namespace extrapolab
