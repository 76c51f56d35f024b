#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hjmm/integration.hpp"
#include "hjmm/levy.hpp"

using namespace hjmm;

namespace {

LevyPath pure_drift_path(double t_max, double slope) {
    LevyPath p;
    p.grid = PathGrid{t_max, 1};
    p.values = {0.0, slope * t_max};
    p.linear_slope = slope;
    p.has_diffusion = false;
    return p;
}

} // namespace

TEST_CASE("left-endpoint sums telescope for constant integrands", "[integration]") {
    const auto mp = poisson(2.0);
    const auto xp = sample_path(mp, {4.0, 1}, 3);
    const auto phi = make_integrand(IntegrandKind::Constant, xp);
    for (int level : {1, 5, 9}) {
        const auto g = g_integral(phi, xp, level);
        REQUIRE(g.terminal() == xp.value_at(4.0)); // exact telescoping
        REQUIRE(g.values.size() == (static_cast<std::size_t>(1) << level) + 1);
        REQUIRE(g.values.front() == 0.0);
    }
    const auto xb = sample_path(brownian(0.7), {1.0, 1 << 10}, 5);
    const auto phib = make_integrand(IntegrandKind::Constant, xb);
    REQUIRE(g_integral(phib, xb, 10).terminal() ==
            Catch::Approx(xb.values.back()).margin(1e-12));
}

TEST_CASE("ramp against a pure drift path reproduces the Riemann sum exactly",
          "[integration]") {
    const auto x = pure_drift_path(1.0, 1.0);
    const auto phi = make_integrand(IntegrandKind::Ramp, x);
    for (int level : {3, 6, 10}) {
        const double n = std::ldexp(1.0, level);
        const auto g = g_integral(phi, x, level);
        // sum_i (i/n)(1/n) = (n-1)/(2n)
        REQUIRE(g.terminal() == Catch::Approx((n - 1.0) / (2.0 * n)).epsilon(1e-14));
    }
}

TEST_CASE("partition levels are validated", "[integration][errors]") {
    const auto x = sample_path(poisson(1.0), {1.0, 1}, 1);
    const auto phi = make_integrand(IntegrandKind::Constant, x);
    REQUIRE_THROWS_AS(g_integral(phi, x, 23), LevelTooDeep);
    REQUIRE_THROWS_AS(g_integral(phi, x, 25, 24), LevelTooDeep);
    REQUIRE_NOTHROW(g_integral(phi, x, 23, 24));
    REQUIRE_THROWS_AS(g_integral(phi, x, -1), std::invalid_argument);
}

TEST_CASE("dyadic sums are linear in the integrand", "[integration][property]") {
    const auto x = sample_path(compound_poisson_normal(3.0, 0.2, 0.5), {2.0, 1}, 9);
    const auto a = make_integrand(IntegrandKind::Ramp, x);
    const auto b = make_integrand(IntegrandKind::Driver, x);
    Integrand combo;
    combo.value = [&](double t) { return 2.0 * a.value(t) - 3.0 * b.value(t); };
    combo.left_value = [&](double t) { return 2.0 * a.left_value(t) - 3.0 * b.left_value(t); };
    combo.regularity = Regularity::Cadlag;
    const auto ga = g_integral(a, x, 8);
    const auto gb = g_integral(b, x, 8);
    const auto gc = g_integral(combo, x, 8);
    for (std::size_t k = 0; k < gc.values.size(); ++k)
        REQUIRE(gc.values[k] ==
                Catch::Approx(2.0 * ga.values[k] - 3.0 * gb.values[k]).margin(1e-12));
}

TEST_CASE("unit-jump integral identity is exact in integer arithmetic",
          "[integration]") {
    const auto m = poisson(1.0);
    int exact = 0;
    for (int p = 0; p < 20; ++p) {
        const auto x = sample_path_stream(m, {10.0, 1}, 77, static_cast<std::uint64_t>(p), 0);
        const auto id = poisson_integral_identity(x);
        const double xt = x.value_at(10.0);
        REQUIRE(id.left_limit_exact == 0.5 * (xt * xt - xt));
        REQUIRE(id.full_exact - id.left_limit_exact == xt);
        REQUIRE(id.stieltjes_left == id.left_limit_exact);   // both integer sums
        REQUIRE(id.stieltjes_full_jump == id.full_exact);
        REQUIRE(id.exact_match);
        exact += id.exact_match ? 1 : 0;
    }
    REQUIRE(exact == 20);
}

TEST_CASE("cadlag and predictable versions coincide off the jump set",
          "[integration][property]") {
    // partition points are dyadic, jump times are exponential draws, so the
    // two versions never sample a jump and their sums agree exactly
    const auto m = compound_poisson_normal(2.0, 0.3, 0.4);
    for (int p = 0; p < 10; ++p) {
        const auto x = sample_path_stream(m, {3.0, 1}, 123, static_cast<std::uint64_t>(p), 0);
        const auto cad = make_integrand(IntegrandKind::Driver, x);
        const auto pred = make_integrand(IntegrandKind::PredictableDriver, x);
        const auto gc = g_integral(cad, x, 12);
        const auto gp = g_integral(pred, x, 12);
        REQUIRE(gc.values == gp.values);
    }
}

TEST_CASE("deep dyadic sums recover the left-limit Stieltjes integral",
          "[integration]") {
    const auto m = poisson(1.5);
    for (int p = 0; p < 10; ++p) {
        const auto x = sample_path_stream(m, {5.0, 1}, 31, static_cast<std::uint64_t>(p), 0);
        const auto phi = make_integrand(IntegrandKind::Driver, x);
        const auto id = poisson_integral_identity(x);
        REQUIRE(g_integral(phi, x, id.level).terminal() ==
                stieltjes_left_limit(phi, x, 5.0));
    }
}

TEST_CASE("Stieltjes integrals handle drift segments", "[integration]") {
    // compensated unit jumps: int t dM = sum tau_j - lambda T^2 / 2
    const auto [b, mart] = decompose(poisson(2.0));
    REQUIRE(b == 2.0);
    const auto x = sample_path(mart, {2.0, 1}, 41);
    const auto phi = make_integrand(IntegrandKind::Ramp, x);
    double jump_part = 0.0;
    for (const auto& j : x.jumps) jump_part += j.time;
    const double exact = jump_part - 2.0 * 2.0 * 2.0 / 2.0;
    REQUIRE(stieltjes_left_limit(phi, x, 2.0) == Catch::Approx(exact).epsilon(1e-12));
    REQUIRE(stieltjes_full(phi, x, 2.0) == Catch::Approx(exact).epsilon(1e-12));

    const auto xb = sample_path(brownian(1.0), {1.0, 8}, 2);
    REQUIRE_THROWS_AS(stieltjes_left_limit(make_integrand(IntegrandKind::Ramp, xb), xb, 1.0),
                      UnsupportedOperation);
}

TEST_CASE("successive refinements form a Cauchy sequence pathwise",
          "[integration][property]") {
    const auto x = sample_path(brownian(1.0), {1.0, 1 << 12}, 6);
    const auto phi = make_integrand(IntegrandKind::PredictableDriver, x);
    const auto gaps = dyadic_consistency(phi, x, {4, 6, 8, 10, 12});
    REQUIRE(gaps.size() == 4);
    REQUIRE(gaps.back() < gaps.front());
    REQUIRE_THROWS_AS(dyadic_consistency(phi, x, {8, 8}), std::invalid_argument);
    REQUIRE_THROWS_AS(dyadic_consistency(phi, x, {8}), std::invalid_argument);
}

TEST_CASE("martingale increment sums satisfy the isometry", "[integration][statistical]") {
    const std::vector<LevyModel> models = {brownian(0.4), poisson(2.0),
                                           compound_poisson_normal(1.0, 0.2, 0.5)};
    for (const auto& m : models) {
        for (auto weight : {PredictableWeight::One, PredictableWeight::IndicatorPositive}) {
            const auto chk = isometry_check(m, 1.0, 256, weight, 4000, 2231);
            INFO("lhs " << chk.lhs_mean << " rhs " << chk.rhs_mean << " tol " << chk.tolerance);
            REQUIRE(chk.pass);
            REQUIRE(chk.rhs_mean > 0.0);
        }
        const auto zero = isometry_check(m, 1.0, 64, PredictableWeight::Zero, 100, 1);
        REQUIRE(zero.pass);
        REQUIRE(zero.lhs_mean == 0.0);
        REQUIRE(zero.rhs_mean == 0.0);
    }
}

TEST_CASE("running supremum obeys the maximal inequality", "[integration][statistical]") {
    const auto br = doob_check(brownian(1.0), 1.0, 512, 2000, 97);
    REQUIRE(br.pass);
    REQUIRE(br.ratio > 1.05);
    REQUIRE(br.ratio < 1.9);
    const auto po = doob_check(poisson(3.0), 2.0, 16, 2000, 98);
    REQUIRE(po.pass);
    REQUIRE(po.ratio >= 1.0);
    REQUIRE(po.ratio < 4.0);
}

TEST_CASE("deterministic ramp integrand converges at order one",
          "[integration][convergence]") {
    const auto study = g_integral_rate(brownian(1.0), 1.0, IntegrandKind::Ramp,
                                       {4, 5, 6, 7, 8, 9, 10}, 12, 200, 55);
    REQUIRE(study.slope < -0.8);
    REQUIRE(study.slope > -1.2);
    for (std::size_t j = 1; j < study.rms.size(); ++j)
        REQUIRE(study.rms[j] < study.rms[j - 1]);
}

TEST_CASE("path-dependent integrand converges at order one half",
          "[integration][convergence]") {
    const auto study = g_integral_rate(brownian(1.0), 1.0, IntegrandKind::RampDriver,
                                       {6, 8, 10}, 13, 300, 56);
    REQUIRE(study.slope < -0.33);
    REQUIRE(study.slope > -0.7);
    REQUIRE_THROWS_AS(
        g_integral_rate(brownian(1.0), 1.0, IntegrandKind::Ramp, {6, 13}, 13, 10, 1),
        std::invalid_argument);
}
