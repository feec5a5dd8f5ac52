#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "extrapolab/maximal.hpp"
#include "extrapolab/rng.hpp"
#include "oracles.hpp"

using namespace extrapolab;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("dyadic maximal of a half indicator") {
    const int L = 4;
    std::vector<double> v(16, 0.0);
    for (int i = 0; i < 8; ++i) v[i] = 1.0;
    const std::vector<StepFunction> f{StepFunction(L, std::move(v))};
    const StepFunction m = maximal_single_grid(f, {Recip{1.0}}, 0);
    for (cell_t i = 0; i < 8; ++i) CHECK(m[i] == Catch::Approx(1.0));
    for (cell_t i = 8; i < 16; ++i) CHECK(m[i] == Catch::Approx(0.5));
}

TEST_CASE("constants pass through") {
    const int L = 5;
    const std::vector<StepFunction> f{StepFunction::constant(L, 2.0),
                                      StepFunction::constant(L, 3.0)};
    const StepFunction m = maximal_single_grid(f, {Recip{1.0}, Recip{0.5}}, 0);
    for (cell_t i = 0; i < m.cells(); ++i) CHECK(m[i] == Catch::Approx(6.0));
}

TEST_CASE("sweep agrees with the brute-force enumeration on every grid") {
    Rng rng(5);
    const int L = 6;
    for (int t = 0; t < 10; ++t) {
        const std::vector<StepFunction> f{random_function(L, rng, 0.2),
                                          random_function(L, rng)};
        const std::vector<Recip> r{Recip{1.0}, Recip{0.5}};
        for (int g = 0; g < 3; ++g) {
            const StepFunction fast = maximal_single_grid(f, r, g);
            const StepFunction slow = oracle::brute_maximal(f, r, g);
            for (cell_t i = 0; i < fast.cells(); ++i)
                CHECK(rel_diff(fast[i], slow[i]) <= 1e-12);
        }
    }
}

TEST_CASE("single grid is dominated by the three-grid sum") {
    Rng rng(15);
    const int L = 6;
    const std::vector<StepFunction> f{random_function(L, rng), random_function(L, rng)};
    const std::vector<Recip> r{Recip{1.0}, Recip{1.0}};
    const ThreeGridMaximal tg = maximal_three_grid(f, r);
    const StepFunction single = maximal_single_grid(f, r, 0);
    for (cell_t i = 0; i < single.cells(); ++i) {
        CHECK(single[i] <= tg.sum[i] * (1.0 + 1e-12));
        CHECK(tg.per_grid[0][i] == single[i]);
    }
}

TEST_CASE("maximal operator is monotone and homogeneous") {
    Rng rng(25);
    const int L = 6;
    const std::vector<Recip> r{Recip{1.0}, Recip{0.75}};
    const std::vector<StepFunction> f{random_function(L, rng), random_function(L, rng)};
    std::vector<StepFunction> g;
    std::uniform_real_distribution<double> unif(0.0, 0.5);
    for (const StepFunction& fj : f) {
        std::vector<double> v(fj.values());
        for (double& x : v) x += unif(rng);
        g.emplace_back(L, std::move(v));
    }
    const StepFunction mf = maximal_single_grid(f, r, 0);
    const StepFunction mg = maximal_single_grid(g, r, 0);
    for (cell_t i = 0; i < mf.cells(); ++i) CHECK(mf[i] <= mg[i] * (1.0 + 1e-12));

    const std::vector<StepFunction> cf{scale(f[0], 2.0), scale(f[1], 0.25)};
    const StepFunction mcf = maximal_single_grid(cf, r, 0);
    for (cell_t i = 0; i < mf.cells(); ++i)
        CHECK(rel_diff(mcf[i], 0.5 * mf[i]) <= 1e-12);
}

TEST_CASE("weighted maximal: unit weight reduces to the plain one") {
    Rng rng(35);
    const int L = 6;
    const StepFunction h = random_function(L, rng);
    const StepFunction u = StepFunction::constant(L, 1.0);
    const StepFunction a = weighted_dyadic_maximal(u, 1.5, h);
    const StepFunction b = maximal_single_grid(std::vector<StepFunction>{h},
                                               {Recip::of_exponent(1.5)}, 0);
    for (cell_t i = 0; i < a.cells(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("weighted maximal agrees with brute force and fixes constants") {
    Rng rng(45);
    const int L = 6;
    const StepFunction u = random_weight(L, rng);
    const StepFunction h = random_function(L, rng);
    for (double t : {0.8, 1.0, 2.0, kInf}) {
        const StepFunction fast = weighted_dyadic_maximal(u, t, h);
        const StepFunction slow = oracle::brute_weighted_maximal(u, t, h);
        for (cell_t i = 0; i < fast.cells(); ++i) CHECK(rel_diff(fast[i], slow[i]) <= 1e-12);
    }
    const StepFunction c = weighted_dyadic_maximal(u, 2.0, StepFunction::constant(L, 4.0));
    for (cell_t i = 0; i < c.cells(); ++i) CHECK(c[i] == Catch::Approx(4.0));
}

TEST_CASE("weighted maximal norm bound") {
    // ||M^u_r h||_{L^q(u)} <= [(1/r)/((1/r)-(1/q))]^{1/r} ||h||_{L^q(u)}
    Rng rng(55);
    const int L = 7;
    for (int t = 0; t < 20; ++t) {
        const StepFunction u = random_weight(L, rng);
        const StepFunction h = random_function(L, rng);
        std::uniform_real_distribution<double> rdist(0.5, 2.0);
        const double r = rdist(rng);
        const double q = r * (1.1 + rdist(rng));
        const StepFunction m = weighted_dyadic_maximal(u, r, h);
        const StepFunction uq = cellpow(u, 1.0 / q);  // measure u as L^q(u) weight
        const double lhs = norm_weighted(m, uq, q);
        const double rhs = std::pow((1.0 / r) / (1.0 / r - 1.0 / q), 1.0 / r) *
                           norm_weighted(h, uq, q);
        CHECK(lhs <= rhs * (1.0 + 1e-10));
    }
}

TEST_CASE("composite N operators dominate the maximal operator pointwise") {
    Rng rng(65);
    const int L = 6;
    const ScaleSetup setup(recips_of_exponents({1, 1}), Recip{0.0}, recips_of_exponents({3, 4}));
    for (int t = 0; t < 10; ++t) {
        const std::vector<StepFunction> w{random_weight(L, rng), random_weight(L, rng)};
        const std::vector<StepFunction> f{random_function(L, rng), random_function(L, rng)};
        const double wc = weight_constant(w, setup).value;
        double gamma = 0.0;
        for (int j = 0; j < 2; ++j)
            gamma = std::max(gamma, setup.r[j].v / (setup.r[j].v - setup.p[j].v));

        const StepFunction m = maximal_single_grid(f, setup.r, 0);
        const StepFunction n0 = n_operator(w, setup, 0, f[0]);
        const StepFunction n1 = n_operator(w, setup, 1, f[1]);
        const double amp = std::pow(wc, gamma);
        for (cell_t i = 0; i < m.cells(); ++i)
            CHECK(m[i] <= amp * n0[i] * n1[i] * (1.0 + 1e-10));

        // norm bound against the certified constant
        for (int j = 0; j < 2; ++j) {
            const StepFunction nj = j == 0 ? n0 : n1;
            const double lhs = norm_weighted(nj, w[j], setup.p[j].exponent());
            const double rhs = n_operator_analytic_bound(setup, j) *
                               norm_weighted(f[j], w[j], setup.p[j].exponent());
            CHECK(lhs <= rhs * (1.0 + 1e-10));
        }
    }
}

TEST_CASE("N operator upper-endpoint branch") {
    Rng rng(75);
    const int L = 5;
    const ScaleSetup setup(recips_of_exponents({1, 1}), Recip{0.0},
                           {Recip{0.5}, Recip{0.0}});
    const std::vector<StepFunction> w{random_weight(L, rng), random_weight(L, rng)};
    const StepFunction f = random_function(L, rng);
    const StepFunction n = n_operator(w, setup, 1, f);
    // ||N f w_j||_inf <= ||f w_j||_inf
    CHECK(norm_weighted(n, w[1], kInf) <= norm_weighted(f, w[1], kInf) * (1.0 + 1e-12));
    // zero datum gives zero
    const StepFunction z = n_operator(w, setup, 1, StepFunction::constant(L, 0.0));
    for (cell_t i = 0; i < z.cells(); ++i) CHECK(z[i] == 0.0);
}

TEST_CASE("weak-type experiment brackets the symmetric constant") {
    Rng rng(85);
    const int L = 8;
    for (int t = 0; t < 5; ++t) {
        const SymmetricSetup s = random_symmetric_setup(3, rng);
        const std::vector<StepFunction> w = random_symmetric_weights(3, L, rng);
        const WeakNormReport rep = weak_norm_experiment(w, s.p, s.r, 10, rng);
        CHECK(rep.upper_ratio <= rep.constant * (1.0 + 1e-12));
        CHECK(rep.lower_ratio >= rep.constant * (1.0 - 1e-9));
        CHECK(rep.lower_ratio <= rep.constant * (1.0 + 1e-12));
    }
}

TEST_CASE("unit weights give weak ratios 1") {
    Rng rng(95);
    const int L = 6;
    std::vector<StepFunction> w(2, StepFunction::constant(L, 1.0));
    const std::vector<Recip> p{Recip{0.5}, Recip{0.5}};
    const std::vector<Recip> r{Recip{1.0}, Recip{1.0}};
    const WeakNormReport rep = weak_norm_experiment(w, p, r, 5, rng);
    CHECK(rep.constant == Catch::Approx(1.0));
    CHECK(rep.lower_ratio == Catch::Approx(1.0));
}

TEST_CASE("two-component weak equivalence specializes to the classical constant") {
    // m = 1 pattern: the (p, p') pair against [w]_p
    Rng rng(105);
    const int L = 8;
    const StepFunction u = random_weight(L, rng, 0.8);
    const std::vector<StepFunction> w{u, cellpow(u, -1.0)};
    const std::vector<Recip> p{Recip{1.0 / 3.0}, Recip{2.0 / 3.0}};
    const std::vector<Recip> r{Recip{1.0}, Recip{1.0}};
    const WeakNormReport rep = weak_norm_experiment(w, p, r, 10, rng);
    const double classic = std::pow(classical_ap(cellpow(u, 3.0), 3.0), 1.0 / 3.0);
    CHECK(rel_diff(rep.constant, classic) <= 1e-12);
    CHECK(rep.lower_ratio >= classic * (1.0 - 1e-9));
}

TEST_CASE("strong bound with the sharp exponent") {
    Rng rng(115);
    const int L = 7;
    const ScaleSetup setup(recips_of_exponents({1, 1}), Recip{0.0}, recips_of_exponents({3, 6}));
    const std::vector<StepFunction> w{random_weight(L, rng), random_weight(L, rng)};
    const StrongBoundReport rep = strong_bound_check(w, setup, 20, rng);
    CHECK(rep.gamma == Catch::Approx(1.5));
    // the measured constant stays below the analytic chain e^{1/r}
    CHECK(rep.measured_c <= std::exp(recip_sum(setup.r)) * (1.0 + 1e-9));
}

TEST_CASE("unweighted maximal norm is equivalent to the structural constant") {
    // power data f_j = x^{-(1-eps)/p_j}: the ratio brackets c_{p,r}
    const int L = 12;
    const ScaleSetup setup(recips_of_exponents({1, 1}), Recip{0.0}, recips_of_exponents({3, 6}));
    const double c = constant_cpr(setup.p, setup.r);
    const double eps = 1.0 / 64;
    const std::vector<PowerField> f{PowerField(L, 1.0, -(1.0 - eps) / 3.0),
                                    PowerField(L, 1.0, -(1.0 - eps) / 6.0)};
    const StepFunction m = maximal_single_grid(f, setup.r, 0);
    const double p = 2.0;  // 1/p = 1/3 + 1/6
    double norms = 1.0;
    for (int j = 0; j < 2; ++j)
        norms *= std::pow(f[static_cast<std::size_t>(j)].mass_pow(setup.p[j].exponent(),
                                                                  {0, cells_at_level(L)}),
                          setup.p[j].v);
    const double ratio = norm_lp(m, p) / norms;
    CHECK(ratio >= 0.9 * c * std::pow(2.0, -1.0 / p));
    CHECK(ratio <= std::exp(recip_sum(setup.r)) * c * (1.0 + 1e-9));
}

TEST_CASE("endpoint bound through the A_1 constant of the inverse weight") {
    Rng rng(125);
    const int L = 6;
    const StepFunction w = random_weight(L, rng);
    const StepFunction f = random_function(L, rng);
    const StepFunction m = maximal_single_grid(std::vector<StepFunction>{f}, {Recip{1.0}}, 0);
    const double lhs = norm_weighted(m, w, kInf);
    const double rhs = classical_a1(cellpow(w, -1.0)) * norm_weighted(f, w, kInf);
    CHECK(lhs <= rhs * (1.0 + 1e-10));
}

TEST_CASE("sharp maximal function and BMO norm") {
    const int L = 4;
    // constants oscillate to zero
    const StepFunction c = StepFunction::constant(L, 7.0);
    const StepFunction sc = sharp_maximal(c);
    for (cell_t i = 0; i < sc.cells(); ++i) CHECK(sc[i] == Catch::Approx(0.0).margin(1e-15));
    CHECK(bmo_norm(c, StepFunction::constant(L, 3.0)) == Catch::Approx(0.0).margin(1e-15));

    // half indicator: oscillation 1/2 everywhere
    std::vector<double> v(16, 0.0);
    for (int i = 0; i < 8; ++i) v[i] = 1.0;
    const StepFunction f(L, std::move(v));
    const StepFunction sf = sharp_maximal(f);
    for (cell_t i = 0; i < sf.cells(); ++i) CHECK(sf[i] == Catch::Approx(0.5));

    // homogeneity
    Rng rng(135);
    const StepFunction g = random_function(L, rng);
    const StepFunction a = sharp_maximal(scale(g, 3.0));
    const StepFunction b = sharp_maximal(g);
    for (cell_t i = 0; i < a.cells(); ++i) CHECK(rel_diff(a[i], 3.0 * b[i]) <= 1e-12);
}
