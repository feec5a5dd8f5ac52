// Command-line front end: weight constants, maximal operators, sparse
// collections, weight extrapolation, the sharpness sweep and the seeded
// verification suites.
//
// Exit codes: 0 pass, 1 assertion failure, 2 usage or parse error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "extrapolab/exponents.hpp"
#include "extrapolab/io.hpp"
#include "extrapolab/maximal.hpp"
#include "extrapolab/rdf.hpp"
#include "extrapolab/rng.hpp"
#include "extrapolab/sparse.hpp"
#include "extrapolab/weights.hpp"

using namespace extrapolab;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Options {
    int level = 10;
    int m = 0;
    std::string r, s = "inf", p, q;
    std::string eps;
    int trials = 100;
    unsigned long long seed = 1;
    std::string out;
    std::string family = "dyadic";
    std::vector<std::string> w_files, f_files;
    std::string u_file;
    std::string op = "mr";
};

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

double parse_exponent(const std::string& tok) {
    if (tok == "inf" || tok == "infinity") return kInf;
    std::size_t used = 0;
    const double x = std::stod(tok, &used);
    if (used != tok.size()) throw UsageError("bad exponent `" + tok + "`");
    return x;
}

std::vector<Recip> parse_tuple(const std::string& csv, const char* name) {
    if (csv.empty()) throw UsageError(std::string("missing --") + name);
    std::vector<Recip> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(Recip::of_exponent(parse_exponent(tok)));
    if (out.empty()) throw UsageError(std::string("empty --") + name);
    return out;
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(parse_exponent(tok));
    return out;
}

GridFamily parse_family(const std::string& name) {
    if (name == "dyadic") return GridFamily::dyadic;
    if (name == "three-grid") return GridFamily::three_grid;
    throw UsageError("--family must be dyadic or three-grid");
}

std::vector<StepFunction> read_steps(const std::vector<std::string>& paths, int level) {
    if (paths.empty()) throw UsageError("no input files given");
    std::vector<StepFunction> out;
    for (const std::string& path : paths) {
        out.push_back(read_step_file(path));
        if (out.back().level() != level)
            throw UsageError(path + ": level " + std::to_string(out.back().level()) +
                             " does not match --level " + std::to_string(level));
    }
    return out;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw UsageError("cannot open output " + path);
    return file;
}

// one JSON report line per assertion; returns the pass flag
bool report_line(std::ostream& out, const std::string& id, double measured, double bound,
                 bool pass) {
    json j{{"assertion", id}, {"measured", measured}, {"bound", bound},
           {"margin", bound - measured}, {"pass", pass}};
    out << j.dump() << "\n";
    return pass;
}

bool check_le(std::ostream& out, const std::string& id, double measured, double bound) {
    return report_line(out, id, measured, bound, measured <= bound);
}

int cmd_wconst(const Options& opt) {
    const std::vector<StepFunction> w = read_steps(opt.w_files, opt.level);
    const ScaleSetup setup(parse_tuple(opt.r, "r"),
                           Recip::of_exponent(parse_exponent(opt.s)), parse_tuple(opt.p, "p"));
    if (static_cast<int>(w.size()) != setup.m())
        throw UsageError("need one weight file per component");
    const WeightConstant wc = weight_constant(w, setup, parse_family(opt.family));
    std::ofstream file;
    std::ostream& out = open_out(file, opt.out);
    out << provenance_line(opt.seed, opt.level) << "\n";
    out << "constant,grid,level,index\n";
    out << std::setprecision(17) << wc.value << "," << wc.argmax.grid << "," << wc.argmax.level
        << "," << wc.argmax.index << "\n";
    return 0;
}

int cmd_maximal(const Options& opt) {
    std::ofstream file;
    std::ostream& out = open_out(file, opt.out);
    if (opt.op == "mr") {
        const std::vector<StepFunction> f = read_steps(opt.f_files, opt.level);
        const std::vector<Recip> r = parse_tuple(opt.r, "r");
        if (r.size() != f.size()) throw UsageError("need one r component per input");
        StepFunction m = StepFunction::constant(opt.level, 0.0);
        if (parse_family(opt.family) == GridFamily::dyadic) {
            m = maximal_single_grid(f, r, 0);
        } else {
            m = maximal_three_grid(f, r).sum;
        }
        write_step(out, m, provenance_line(opt.seed, opt.level));
    } else if (opt.op == "weighted") {
        if (opt.u_file.empty()) throw UsageError("--op weighted needs --u");
        const StepFunction u = read_step_file(opt.u_file);
        const std::vector<StepFunction> f = read_steps(opt.f_files, opt.level);
        if (f.size() != 1) throw UsageError("--op weighted takes a single input");
        const std::vector<Recip> r = parse_tuple(opt.r, "r");
        write_step(out, weighted_dyadic_maximal(u, r.front().exponent(), f.front()),
                   provenance_line(opt.seed, opt.level));
    } else if (opt.op == "sharp") {
        const std::vector<StepFunction> f = read_steps(opt.f_files, opt.level);
        if (f.size() != 1) throw UsageError("--op sharp takes a single input");
        write_step(out, sharp_maximal(f.front()), provenance_line(opt.seed, opt.level));
    } else {
        throw UsageError("--op must be mr, weighted or sharp");
    }
    return 0;
}

int cmd_sparse(const Options& opt) {
    const std::vector<StepFunction> f = read_steps(opt.f_files, opt.level);
    const std::vector<Recip> r = parse_tuple(opt.r, "r");
    if (r.size() != f.size()) throw UsageError("need one r component per input");
    const SparseCollection s = cz_sparse(r, f);
    const SparsityReport rep = validate_sparse(s);
    if (!rep.ok) {
        std::cerr << "sparsity validation failed: " << rep.what << "\n";
        return 1;
    }
    std::ofstream file;
    std::ostream& out = open_out(file, opt.out);
    write_sparse(out, s, provenance_line(opt.seed, opt.level));
    return 0;
}

int cmd_extrapolate(const Options& opt) {
    const std::vector<StepFunction> f = read_steps(opt.f_files, opt.level);
    const std::vector<StepFunction> w = read_steps(opt.w_files, opt.level);
    const std::vector<Recip> p = parse_tuple(opt.p, "p");
    const std::vector<Recip> q = parse_tuple(opt.q, "q");
    const std::vector<Recip> r = parse_tuple(opt.r, "r");
    if (f.size() != p.size() || w.size() != p.size())
        throw UsageError("need m+1 data and weight files");
    const ExtrapolatedWeights res = build_weights(f, w, p, q, r);
    const std::string prefix = opt.out.empty() ? std::string("W") : opt.out;
    for (std::size_t j = 0; j < res.w.size(); ++j)
        write_step_file(prefix + "." + std::to_string(j + 1) + ".csv", res.w[j],
                        provenance_line(opt.seed, opt.level));
    json rep{{"norm_transfer", res.norm_transfer},
             {"norm_transfer_bound", res.norm_transfer_bound},
             {"stages", json::array()}};
    for (const StageReport& st : res.stages)
        rep["stages"].push_back({{"pivot", st.pivot},
                                 {"norm_factor", st.norm_factor},
                                 {"constant_before", st.constant_before},
                                 {"constant_after", st.constant_after},
                                 {"claimed_exponent", st.claimed_exponent},
                                 {"measured_c", st.measured_c}});
    std::cout << rep.dump() << "\n";
    return res.norm_transfer <= res.norm_transfer_bound * (1.0 + 1e-12) ? 0 : 1;
}

int cmd_sweep(const Options& opt) {
    const std::vector<Recip> r = parse_tuple(opt.r, "r");
    const std::vector<Recip> p = parse_tuple(opt.p, "p");
    if (parse_exponent(opt.s) != kInf) throw UsageError("the sweep runs at s=inf");
    const ScaleSetup setup(r, Recip{0.0}, p);
    const SetupReport admis = validate_setup(setup, true);
    if (!admis.ok) throw UsageError("inadmissible setup: " + admis.what);
    std::vector<double> eps = parse_doubles(opt.eps);
    if (eps.empty())
        for (int e = 2; e <= 9; ++e) eps.push_back(std::exp2(-e));
    for (double e : eps)
        if (!(e > 0.0 && e < 1.0)) throw UsageError("eps values must lie in (0,1)");

    const int L = opt.level;
    const double pexp = 1.0 / setup.p_total();
    double theory = 0.0;
    for (int j = 0; j < setup.m(); ++j)
        theory = std::max(theory, setup.r[j].v / (setup.r[j].v - setup.p[j].v));

    std::ofstream file;
    std::ostream& out = open_out(file, opt.out);
    out << provenance_line(opt.seed, L) << "\n";
    out << "eps,wconst,mnorm,prodnorm,ratio\n" << std::setprecision(17);

    std::vector<double> log_wc, log_ratio;
    for (double e : eps) {
        std::vector<PowerField> w, f;
        PowerField wprod(L, 1.0, 0.0);
        double prodnorm = 1.0;
        for (int j = 0; j < setup.m(); ++j) {
            const double invr = setup.r[j].v, invp = setup.p[j].v;
            // the first slot carries the blow-up weight, the others are 1
            w.emplace_back(L, 1.0, j == 0 ? (1.0 - e) * (invr - invp) : 0.0);
            f.emplace_back(L, 1.0, -(1.0 - e) * (j == 0 ? invr : invp));
            wprod = wprod.mul(w.back());
            prodnorm *= norm_weighted(f.back(), w.back(), 1.0 / invp);
        }
        const double wc = weight_constant(w, setup).value;
        const StepFunction m = maximal_single_grid(f, setup.r, 0);
        const double mnorm = norm_weighted(m, wprod, pexp);
        const double ratio = mnorm / prodnorm;
        out << e << "," << wc << "," << mnorm << "," << prodnorm << "," << ratio << "\n";
        log_wc.push_back(std::log(wc));
        log_ratio.push_back(std::log(ratio));
    }

    // least squares on the smallest eps values (up to the last 6)
    const std::size_t use = std::min<std::size_t>(6, log_wc.size());
    const std::size_t lo = log_wc.size() - use;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = lo; i < log_wc.size(); ++i) {
        sx += log_wc[i];
        sy += log_ratio[i];
        sxx += log_wc[i] * log_wc[i];
        sxy += log_wc[i] * log_ratio[i];
    }
    const double n = static_cast<double>(use);
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    std::cout << "fitted slope " << std::setprecision(6) << slope << " (theory "
              << theory << ")\n";
    return 0;
}

// ---- verification suites ------------------------------------------------

bool suite_exponents(std::ostream& out, int trials, Rng& rng) {
    bool ok = true;
    double worst_gamma = 0.0, worst_sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        const int n = 2 + t % 3;
        const SymmetricSetup s = random_symmetric_setup(n, rng);
        const std::vector<Recip> q = random_target_tuple(s, rng);
        const ExtrapolationPath path = step2_path(s.p, q, s.r);
        worst_gamma = std::max(
            worst_gamma, rel_diff(path.gamma_product(), extrapolation_exponent_sym(s.p, q, s.r)));
        for (const auto& tuple : path.seq)
            worst_sum = std::max(worst_sum, std::abs(recip_sum(tuple) - 1.0));
    }
    ok &= check_le(out, "exponents.gamma_product_rel", worst_gamma, 1e-12);
    ok &= check_le(out, "exponents.tuple_sum_drift", worst_sum, 1e-12);

    double worst_central = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::uniform_real_distribution<double> unif(0.4, 1.3);
        const std::vector<Recip> r{Recip{unif(rng)}, Recip{unif(rng)}};
        const CentralExponents ce = central_exponents(r, Recip{0.2 * unif(rng)});
        for (int j = 0; j < 2; ++j)
            worst_central = std::max(
                worst_central, rel_diff(r[j].v / (r[j].v - ce.q[j].v), ce.common_ratio));
    }
    ok &= check_le(out, "exponents.central_equalization", worst_central, 1e-12);

    const ScaleSetup s0(std::vector<Recip>{Recip{1.0}, Recip{0.7}}, Recip{0.1},
                        std::vector<Recip>{Recip{0.6}, Recip{0.3}});
    const ScaleSetup back = rescale(rescale(s0, 2.5), 1.0 / 2.5);
    double rerr = 0.0;
    for (int j = 0; j < 2; ++j) rerr = std::max(rerr, rel_diff(back.p[j].v, s0.p[j].v));
    ok &= check_le(out, "exponents.rescale_roundtrip", rerr, 1e-14);
    return ok;
}

bool suite_weights(std::ostream& out, int trials, Rng& rng) {
    bool ok = true;
    const int L = 7;
    double worst_perm = 0.0, min_const = kInf, worst_resc = 0.0, worst_trans = 0.0,
           worst_char = 0.0, three_grid_gap = 0.0;
    for (int t = 0; t < trials; ++t) {
        const SymmetricSetup s = random_symmetric_setup(3, rng);
        const std::vector<StepFunction> w = random_symmetric_weights(3, L, rng);
        const double base = symmetric_constant(w, s.p, s.r).value;
        min_const = std::min(min_const, base);
        std::vector<StepFunction> wp{w[2], w[0], w[1]};
        std::vector<Recip> pp{s.p[2], s.p[0], s.p[1]}, rp{s.r[2], s.r[0], s.r[1]};
        worst_perm = std::max(worst_perm, rel_diff(symmetric_constant(wp, pp, rp).value, base));
        worst_char = std::max(worst_char, wconst_char_check(w, s.p, s.r).rel);

        const ScaleSetup ms(std::vector<Recip>{Recip{1.0}, Recip{0.8}}, Recip{0.1},
                            std::vector<Recip>{Recip{0.55}, Recip{0.35}});
        const std::vector<StepFunction> wm{random_weight(L, rng), random_weight(L, rng)};
        worst_resc = std::max(worst_resc, rescale_check(wm, ms, 2.0).rel);
        worst_trans = std::max(
            worst_trans, translation_check(wm, ms, translation_params(ms.p, ms.r, ms.s)).rel);
        const double dy = weight_constant(wm, ms).value;
        const double tg = weight_constant(wm, ms, GridFamily::three_grid).value;
        three_grid_gap = std::max(three_grid_gap, (dy - tg) / tg);
    }
    ok &= check_le(out, "weights.permutation_invariance", worst_perm, 1e-12);
    ok &= report_line(out, "weights.constant_at_least_one", min_const, 1.0,
                      min_const >= 1.0 - 1e-12);
    ok &= check_le(out, "weights.rescale_identity", worst_resc, 1e-12);
    ok &= check_le(out, "weights.translation_identity", worst_trans, 1e-12);
    ok &= check_le(out, "weights.characterization", worst_char, 1e-12);
    ok &= check_le(out, "weights.three_grid_dominates", three_grid_gap, 1e-12);
    return ok;
}

bool suite_maximal(std::ostream& out, int trials, Rng& rng) {
    bool ok = true;
    const int L = 7;
    // sweep against a direct enumeration at a smaller level
    double worst_sweep = 0.0;
    {
        const int Ls = 5;
        for (int t = 0; t < std::min(trials, 10); ++t) {
            const std::vector<StepFunction> f{random_function(Ls, rng, 0.2),
                                              random_function(Ls, rng)};
            const std::vector<Recip> r{Recip{1.0}, Recip{0.5}};
            const StepFunction fast = maximal_single_grid(f, r, 0);
            std::vector<double> slow(static_cast<std::size_t>(cells_at_level(Ls)), 0.0);
            for (const DyadicCube& q : cubes(0, Ls, Ls)) {
                const CellRange c = cube_cells(q, Ls);
                double prod = 1.0;
                for (std::size_t j = 0; j < f.size(); ++j)
                    prod *= f[j].avg(r[j].exponent(), c);
                for (cell_t i = c.lo; i < c.hi; ++i)
                    slow[static_cast<std::size_t>(i)] =
                        std::max(slow[static_cast<std::size_t>(i)], prod);
            }
            for (cell_t i = 0; i < fast.cells(); ++i)
                worst_sweep =
                    std::max(worst_sweep, rel_diff(fast[i], slow[static_cast<std::size_t>(i)]));
        }
    }
    ok &= check_le(out, "maximal.sweep_vs_bruteforce", worst_sweep, 1e-12);

    double worst_weak_up = 0.0, worst_weak_low = kInf, worst_ndom = 0.0, worst_nnorm = 0.0;
    for (int t = 0; t < std::max(1, trials / 10); ++t) {
        const SymmetricSetup s = random_symmetric_setup(3, rng, 0.8);
        const std::vector<StepFunction> w = random_symmetric_weights(3, L, rng);
        const WeakNormReport rep = weak_norm_experiment(w, s.p, s.r, 10, rng);
        worst_weak_up = std::max(worst_weak_up, rep.upper_ratio / rep.constant);
        worst_weak_low = std::min(worst_weak_low, rep.lower_ratio / rep.constant);

        const ScaleSetup ms(std::vector<Recip>{Recip{1.0}, Recip{0.8}}, Recip{0.0},
                            std::vector<Recip>{Recip{0.5}, Recip{0.3}});
        const std::vector<StepFunction> wm{random_weight(L, rng), random_weight(L, rng)};
        const std::vector<StepFunction> fm{random_function(L, rng), random_function(L, rng)};
        const double wc = weight_constant(wm, ms).value;
        double gamma = 0.0;
        for (int j = 0; j < 2; ++j)
            gamma = std::max(gamma, ms.r[j].v / (ms.r[j].v - ms.p[j].v));
        const StepFunction m = maximal_single_grid(fm, ms.r, 0);
        const StepFunction n0 = n_operator(wm, ms, 0, fm[0]);
        const StepFunction n1 = n_operator(wm, ms, 1, fm[1]);
        const double amp = std::pow(wc, gamma);
        for (cell_t i = 0; i < m.cells(); ++i)
            worst_ndom = std::max(worst_ndom, m[i] / (amp * n0[i] * n1[i]));
        for (int j = 0; j < 2; ++j) {
            const StepFunction& nj = j == 0 ? n0 : n1;
            const double lhs = norm_weighted(nj, wm[j], ms.p[j].exponent());
            const double rhs = n_operator_analytic_bound(ms, j) *
                               norm_weighted(fm[j], wm[j], ms.p[j].exponent());
            worst_nnorm = std::max(worst_nnorm, lhs / rhs);
        }
    }
    ok &= check_le(out, "maximal.weak_upper_ratio", worst_weak_up, 1.0 + 1e-12);
    ok &= report_line(out, "maximal.weak_lower_ratio", worst_weak_low, 1.0 - 1e-9,
                      worst_weak_low >= 1.0 - 1e-9);
    ok &= check_le(out, "maximal.n_domination", worst_ndom, 1.0 + 1e-10);
    ok &= check_le(out, "maximal.n_norm_bound", worst_nnorm, 1.0 + 1e-10);
    return ok;
}

bool suite_sparse(std::ostream& out, int trials, Rng& rng) {
    bool ok = true;
    const int L = 8;
    bool valid = true;
    double worst_dom = 0.0, worst_up = 0.0, worst_low = 0.0, worst_weighted = 0.0;
    for (int t = 0; t < trials; ++t) {
        const int m = 1 + t % 2;
        std::vector<StepFunction> f;
        std::vector<Recip> r;
        for (int j = 0; j < m; ++j) {
            f.push_back(random_function(L, rng, j == 0 ? 0.2 : 0.0));
            r.push_back(Recip{j == 0 ? 1.0 : 0.75});
        }
        const SparseCollection s = cz_sparse(r, f);
        valid &= validate_sparse(s).ok;
        const double c = std::exp2(2.0 * recip_sum(r));
        const StepFunction mx = maximal_single_grid(f, r, 0);
        const StepFunction a = sparse_operator_reserved(r, s, f);
        for (cell_t i = 0; i < mx.cells(); ++i)
            if (a[i] > 0.0) worst_dom = std::max(worst_dom, mx[i] / (c * a[i]));
        const double m_l1 = norm_lp(mx, 1.0);
        const double lambda = sparse_form(r, s, f);
        if (lambda > 0.0) worst_up = std::max(worst_up, m_l1 / (c * lambda));
        const SparseCollection sr = random_sparse(L, rng);
        if (m_l1 > 0.0)
            worst_low = std::max(worst_low, sparse_form(r, sr, f) / (2.0 * m_l1));
    }
    for (int t = 0; t < std::max(1, trials / 4); ++t) {
        const SymmetricSetup st = random_symmetric_setup(3, rng, 0.7);
        const std::vector<StepFunction> w = random_symmetric_weights(3, L, rng);
        std::vector<StepFunction> f;
        for (int j = 0; j < 3; ++j) f.push_back(random_function(L, rng));
        const SparseCollection s = cz_sparse(st.r, f);
        const LambdaWeightReport rep = lambda_weight_bound(st.p, st.r, w, f, s);
        worst_weighted = std::max(worst_weighted, rep.percube_measured / rep.percube_bound);
    }
    ok &= report_line(out, "sparse.validator", valid ? 1.0 : 0.0, 1.0, valid);
    ok &= check_le(out, "sparse.domination_ratio", worst_dom, 1.0 + 1e-12);
    ok &= check_le(out, "sparse.l1_upper_ratio", worst_up, 1.0 + 1e-12);
    ok &= check_le(out, "sparse.l1_lower_ratio", worst_low, 1.0 + 1e-12);
    ok &= check_le(out, "sparse.weighted_percube_ratio", worst_weighted, 1.0 + 1e-10);
    return ok;
}

bool suite_rdf(std::ostream& out, int trials, Rng& rng) {
    bool ok = true;
    const int L = 6;
    double worst_major = 0.0, worst_double = 0.0, worst_c3 = 0.0, worst_prod = 0.0,
           worst_transfer = 0.0;
    for (int t = 0; t < std::max(1, trials / 5); ++t) {
        const SymmetricSetup s = random_symmetric_setup(3, rng, 0.8);
        const std::vector<StepFunction> w = random_symmetric_weights(3, L, rng);
        const double inv_s = 1.0 - s.r[2].v;
        const TranslationSplit split =
            translation_params({s.p[0], s.p[1]}, {s.r[0], s.r[1]}, Recip{inv_s});
        const std::vector<StepFunction> wm{w[0], w[1]};
        std::vector<RdfOperator> ops;
        std::vector<StepFunction> rf;
        for (int j = 0; j < 2; ++j) {
            ops.emplace_back(wm, split.r_s, split.p_s, j, 30);
            const StepFunction fj = random_function(L, rng);
            const StepFunction r = rdf_apply(ops.back(), fj);
            for (cell_t i = 0; i < fj.cells(); ++i)
                if (r[i] > 0.0) worst_major = std::max(worst_major, fj[i] / r[i]);
            const double fn =
                norm_weighted(fj, wm[j], split.p_s[static_cast<std::size_t>(j)].exponent());
            const double rn =
                norm_weighted(r, wm[j], split.p_s[static_cast<std::size_t>(j)].exponent());
            worst_double = std::max(worst_double, rn / (2.0 * fn));
            rf.push_back(r);
        }
        const Property3Report rep = rdf_property3_check(ops, rf);
        worst_c3 = std::max(worst_c3, rep.measured_c / std::exp(recip_sum(split.r_s)));

        const std::vector<Recip> q = random_target_tuple(s, rng);
        std::vector<StepFunction> f;
        for (int j = 0; j < 3; ++j) f.push_back(random_function(L, rng));
        const ExtrapolatedWeights res = build_weights(f, w, s.p, q, s.r);
        StepFunction prod = res.w.front();
        for (std::size_t j = 1; j < res.w.size(); ++j) prod = mul(prod, res.w[j]);
        for (cell_t i = 0; i < prod.cells(); ++i)
            worst_prod = std::max(worst_prod, rel_diff(prod[i], 1.0));
        worst_transfer = std::max(worst_transfer, res.norm_transfer / res.norm_transfer_bound);
    }
    ok &= check_le(out, "rdf.majorant_ratio", worst_major, 1.0 + 1e-12);
    ok &= check_le(out, "rdf.norm_doubling_ratio", worst_double, 1.0 + 1e-12);
    ok &= check_le(out, "rdf.product_infimum_c_over_analytic", worst_c3, 1.0 + 1e-9);
    ok &= check_le(out, "rdf.weight_product_drift", worst_prod, 1e-10);
    ok &= check_le(out, "rdf.norm_transfer_ratio", worst_transfer, 1.0 + 1e-12);
    return ok;
}

bool suite_pipeline(std::ostream& out, int trials, Rng& rng) {
    bool ok = true;
    const int L = 7;
    const std::vector<Recip> r{Recip{1.0}, Recip{1.0}};
    const CentralExponents ce = central_exponents(r, Recip{0.0});
    const PowerLaw phi_q{std::exp(recip_sum(r)) * constant_cpr(ce.q, r), ce.common_ratio, 1.0};
    double worst_u = 0.0;
    bool hyp = true, chain = true;
    for (int t = 0; t < std::max(1, trials / 25); ++t) {
        std::uniform_real_distribution<double> unif(0.2, 0.75);
        const ScaleSetup target(r, Recip{0.0},
                                std::vector<Recip>{Recip{unif(rng)}, Recip{unif(rng)}});
        const std::vector<StepFunction> w{random_weight(L, rng, 0.6),
                                          random_weight(L, rng, 0.6)};
        const std::vector<StepFunction> f{random_function(L, rng), random_function(L, rng)};
        const StepFunction h = maximal_single_grid(f, r, 0);
        const PipelineReport rep =
            extrapolation_pipeline_check(f, h, w, target, ce.q, phi_q, 2, t == 0 ? 8 : 0, rng);
        hyp &= rep.hypothesis_ok;
        chain &= rep.chain_ok;
        worst_u = std::max({worst_u, rep.max_uncertainty, rep.weak_max_uncertainty});
    }
    ok &= report_line(out, "pipeline.hypothesis", hyp ? 1.0 : 0.0, 1.0, hyp);
    ok &= report_line(out, "pipeline.chain", chain ? 1.0 : 0.0, 1.0, chain);
    ok &= check_le(out, "pipeline.uncertainty", worst_u, std::exp2(12.0));
    return ok;
}

int cmd_verify(const std::string& suite, const Options& opt) {
    Rng rng(opt.seed);
    std::ofstream file;
    std::ostream& out = open_out(file, opt.out);
    bool ok = false;
    if (suite == "exponents") ok = suite_exponents(out, opt.trials, rng);
    else if (suite == "weights") ok = suite_weights(out, std::max(1, opt.trials / 10), rng);
    else if (suite == "maximal") ok = suite_maximal(out, opt.trials, rng);
    else if (suite == "sparse") ok = suite_sparse(out, std::max(1, opt.trials / 2), rng);
    else if (suite == "rdf") ok = suite_rdf(out, opt.trials, rng);
    else if (suite == "pipeline") ok = suite_pipeline(out, opt.trials, rng);
    else throw UsageError("unknown suite `" + suite + "`");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"extrapolab: a dyadic-model laboratory for multilinear weight classes"};
    app.set_config("--config", "", "flat key=value configuration file");

    Options opt;
    app.add_option("--level", opt.level, "dyadic resolution level")->check(CLI::Range(4, 20));
    app.add_option("--m", opt.m, "number of inputs (inferred from tuples when 0)");
    app.add_option("--r", opt.r, "comma-separated r exponents (inf allowed)");
    app.add_option("--s", opt.s, "s exponent");
    app.add_option("--p", opt.p, "comma-separated p exponents");
    app.add_option("--q", opt.q, "comma-separated q exponents");
    app.add_option("--eps", opt.eps, "comma-separated epsilon values");
    app.add_option("--trials", opt.trials, "trial count for randomized checks");
    app.add_option("--seed", opt.seed, "RNG seed");
    app.add_option("--out", opt.out, "output path (stdout when empty)");
    app.add_option("--family", opt.family, "cube family: dyadic or three-grid");
    app.add_option("--w", opt.w_files, "weight CSV files");
    app.add_option("--f", opt.f_files, "function CSV files");
    app.add_option("--u", opt.u_file, "weight CSV for the weighted maximal operator");
    app.add_option("--op", opt.op, "maximal operator: mr, weighted or sharp");

    auto* c_wconst = app.add_subcommand("wconst", "weight constant of a tuple");
    auto* c_maximal = app.add_subcommand("maximal", "evaluate a maximal operator");
    auto* c_sparse = app.add_subcommand("sparse", "stopping-time sparse collection");
    auto* c_extrap = app.add_subcommand("extrapolate", "construct extrapolated weights");
    auto* c_sweep = app.add_subcommand("sweep", "power-weight sharpness sweep");
    auto* c_verify = app.add_subcommand("verify", "run a verification suite");
    std::string suite;
    c_verify->add_option("suite", suite, "exponents|weights|maximal|sparse|rdf|pipeline")
        ->required();
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*c_wconst) return cmd_wconst(opt);
        if (*c_maximal) return cmd_maximal(opt);
        if (*c_sparse) return cmd_sparse(opt);
        if (*c_extrap) return cmd_extrapolate(opt);
        if (*c_sweep) return cmd_sweep(opt);
        if (*c_verify) return cmd_verify(suite, opt);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const CsvError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
