#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "extrapolab/rng.hpp"
#include "extrapolab/weights.hpp"

using namespace extrapolab;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

ScaleSetup make_setup(std::vector<double> rexp, double sexp, std::vector<double> pexp) {
    return ScaleSetup(recips_of_exponents(rexp), Recip::of_exponent(sexp),
                      recips_of_exponents(pexp));
}
}  // namespace

TEST_CASE("unit weights have constant 1") {
    const int L = 5;
    const std::vector<StepFunction> w{StepFunction::constant(L, 1.0),
                                      StepFunction::constant(L, 1.0)};
    const ScaleSetup s = make_setup({1, 1}, kInf, {3, 6});
    CHECK(weight_constant(w, s).value == Catch::Approx(1.0));
    CHECK(weight_constant(w, s, GridFamily::three_grid).value == Catch::Approx(1.0));
}

TEST_CASE("two-cell weight at p=2 attains 1.25 on the root") {
    // w = 1 on [0,1/2), 2 on [1/2,1): root gives ((1+4)/2)^(1/2)((1+1/4)/2)^(1/2)
    const int L = 4;
    std::vector<double> v(16, 1.0);
    for (int i = 8; i < 16; ++i) v[i] = 2.0;
    const std::vector<StepFunction> w{StepFunction(L, std::move(v))};
    const WeightConstant wc = weight_constant(w, make_setup({1}, kInf, {2}));
    CHECK(wc.value == Catch::Approx(1.25));
    CHECK(wc.argmax.level == 0);
}

TEST_CASE("power weight constant blows up like the predicted epsilon power") {
    // w_1 = x^{(1-eps)(1/r_1 - 1/p_1)} at r=1, p=3: constant ~ eps^{-2/3}
    const int L = 12;
    const ScaleSetup s = make_setup({1, 1}, kInf, {3, 6});
    std::vector<double> logc, loge;
    for (double eps : {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        const std::vector<PowerField> w{PowerField(L, 1.0, (1.0 - eps) * (2.0 / 3.0)),
                                        PowerField(L, 1.0, 0.0)};
        logc.push_back(std::log(weight_constant(w, s).value));
        loge.push_back(std::log(eps));
    }
    // least-squares slope of log[w] against log(eps)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(logc.size());
    for (std::size_t i = 0; i < logc.size(); ++i) {
        sx += loge[i];
        sy += logc[i];
        sxx += loge[i] * loge[i];
        sxy += loge[i] * logc[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == Catch::Approx(-2.0 / 3.0).margin(0.07));
}

TEST_CASE("symmetric form agrees with the m-form and is permutation invariant") {
    Rng rng(21);
    const int L = 6;
    for (int t = 0; t < 40; ++t) {
        const SymmetricSetup s = random_symmetric_setup(3, rng);
        // m-form: the first two components are the weights, s from r_3
        std::vector<StepFunction> w{random_weight(L, rng), random_weight(L, rng)};
        const double inv_s = 1.0 - s.r[2].v;
        // admissibility of the m-form requires 1/p >= 1/s, which holds since
        // 1/p = 1 - 1/p_3 >= 1 - 1/r_3 = 1/s
        ScaleSetup msetup({s.r[0], s.r[1]}, Recip{inv_s}, {s.p[0], s.p[1]});
        const double mform = weight_constant(w, msetup).value;

        const SymmetricTuple<StepFunction> ext = symmetric_extension(w, msetup);
        CHECK(ext.p[2].v == Catch::Approx(s.p[2].v).margin(1e-12));
        const double sym = symmetric_constant(ext.w, ext.p, ext.r).value;
        CHECK(rel_diff(mform, sym) <= 1e-12);

        // permutation invariance
        std::vector<int> perm{1, 2, 0};
        std::vector<StepFunction> wp;
        std::vector<Recip> pp, rp;
        for (int i : perm) {
            wp.push_back(ext.w[static_cast<std::size_t>(i)]);
            pp.push_back(ext.p[static_cast<std::size_t>(i)]);
            rp.push_back(ext.r[static_cast<std::size_t>(i)]);
        }
        CHECK(rel_diff(symmetric_constant(wp, pp, rp).value, sym) <= 1e-12);

        // the constant is at least 1
        CHECK(sym >= 1.0 - 1e-12);
    }
}

TEST_CASE("symmetric extension rejects the quasi-Banach range") {
    const int L = 4;
    std::vector<StepFunction> w{StepFunction::constant(L, 1.0), StepFunction::constant(L, 1.0)};
    // 1/p = 1/2 + 2/3 > 1
    CHECK_THROWS_AS(symmetric_extension(w, make_setup({1, 1}, kInf, {2, 1.5})),
                    std::domain_error);
}

TEST_CASE("three-grid supremum dominates the dyadic one") {
    Rng rng(31);
    const int L = 6;
    const ScaleSetup s = make_setup({1, 1}, kInf, {3, 4});
    for (int t = 0; t < 20; ++t) {
        std::vector<StepFunction> w{random_weight(L, rng), random_weight(L, rng)};
        const double dy = weight_constant(w, s).value;
        const double tg = weight_constant(w, s, GridFamily::three_grid).value;
        CHECK(tg >= dy * (1.0 - 1e-12));
    }
}

TEST_CASE("classical constants and their identities") {
    Rng rng(41);
    const int L = 6;
    // constants are 1 for constant weights
    CHECK(classical_a1(StepFunction::constant(L, 2.5)) == Catch::Approx(1.0));
    CHECK(classical_ap(StepFunction::constant(L, 2.5), 2.0) == Catch::Approx(1.0));

    // two-cell example: [w]_2 = [w^2]_{A_2}^{1/2} matches the weight constant
    std::vector<double> v(static_cast<std::size_t>(cells_at_level(L)), 1.0);
    for (std::size_t i = v.size() / 2; i < v.size(); ++i) v[i] = 2.0;
    const StepFunction w(L, std::move(v));
    const double lhs = std::sqrt(classical_ap(cellpow(w, 2.0), 2.0));
    CHECK(lhs == Catch::Approx(1.25));

    for (int t = 0; t < 25; ++t) {
        const StepFunction u = random_weight(L, rng);
        const double p = 1.0 + 2.5 * std::generate_canonical<double, 40>(rng);
        const double pp = 1.0 / (1.0 - 1.0 / p);
        // [u]_p = [u^{-1}]_{p'}
        const double a = std::pow(classical_ap(cellpow(u, p), p), 1.0 / p);
        const double b = std::pow(classical_ap(cellpow(u, -pp), pp), 1.0 / pp);
        CHECK(rel_diff(a, b) <= 1e-12);

        // [u]_{p,(1,infinity)} = [u^p]_{A_p}^{1/p}
        const double c =
            weight_constant(std::vector<StepFunction>{u}, make_setup({1}, kInf, {p})).value;
        CHECK(rel_diff(a, c) <= 1e-12);

        // [u]_{infinity,(1,infinity)} = [u^{-1}]_{A_1}
        const double d =
            weight_constant(std::vector<StepFunction>{u}, make_setup({1}, kInf, {kInf})).value;
        CHECK(rel_diff(d, classical_a1(cellpow(u, -1.0))) <= 1e-12);
    }
}

TEST_CASE("rescaling identity for weights") {
    Rng rng(51);
    const int L = 6;
    const ScaleSetup s = make_setup({1, 1}, kInf, {3, 6});
    for (int t = 0; t < 20; ++t) {
        std::vector<StepFunction> w{random_weight(L, rng), random_weight(L, rng)};
        for (double alpha : {1.0, 2.0, 0.5}) {
            const IdentityReport rep = rescale_check(w, s, alpha);
            CHECK(rep.rel <= 1e-12);
        }
    }
}

TEST_CASE("translation identity for proportional and directed splits") {
    Rng rng(61);
    const int L = 6;
    const ScaleSetup s = make_setup({2, 1.5}, 8, {4, 3});
    for (int t = 0; t < 20; ++t) {
        std::vector<StepFunction> w{random_weight(L, rng), random_weight(L, rng)};
        const TranslationSplit prop = translation_params(s.p, s.r, s.s);
        CHECK(translation_check(w, s, prop).rel <= 1e-12);

        // a directed split with a random admissible target
        const std::vector<Recip> q{Recip{0.9 * s.r[0].v}, Recip{0.2 * s.r[1].v}};
        const TranslationSplit dir = translation_params_directed(s.p, q, s.r, s.s);
        CHECK(std::abs(recip_sum(dir.s_split) - s.s.v) <= 1e-12);
        CHECK(translation_check(w, s, dir).rel <= 1e-12);
    }
}

TEST_CASE("v_j characterization matches the symmetric constant") {
    Rng rng(71);
    const int L = 6;
    for (int t = 0; t < 25; ++t) {
        const SymmetricSetup s = random_symmetric_setup(3, rng);
        const std::vector<StepFunction> w = random_symmetric_weights(3, L, rng);
        const CharReport rep = wconst_char_check(w, s.p, s.r);
        CHECK(rep.rel <= 1e-12);
    }
    // unit weights: optimal c = 1
    const std::vector<StepFunction> ones{StepFunction::constant(L, 1.0),
                                         StepFunction::constant(L, 1.0)};
    const CharReport unit = wconst_char_check(
        ones, {Recip{0.5}, Recip{0.5}}, {Recip{1.0}, Recip{1.0}});
    CHECK(unit.optimal_c == Catch::Approx(1.0));
}

TEST_CASE("rescaled weight tuples keep positivity and sizes") {
    Rng rng(81);
    const auto w = rescale_weights({random_weight(5, rng)}, 2.0);
    REQUIRE(w.size() == 1);
    for (cell_t i = 0; i < w[0].cells(); ++i) CHECK(w[0][i] > 0.0);
}
