#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hjmm/levy.hpp"

using namespace hjmm;

namespace {

// central finite difference of the cumulant one order down
double fd_derivative(const LevyModel& m, double z, int order, double h) {
    return (cumulant(m, z + h, order - 1) - cumulant(m, z - h, order - 1)) / (2.0 * h);
}

// observed convergence order of the central difference against the closed form
double fd_order(const LevyModel& m, double z, int order) {
    const double exact = cumulant(m, z, order);
    const double e1 = std::abs(fd_derivative(m, z, order, 1e-3) - exact);
    const double e2 = std::abs(fd_derivative(m, z, order, 1e-4) - exact);
    return std::log10(e1 / e2);
}

struct MomentStats {
    double mean = 0.0;
    double var = 0.0;
    double se_mean = 0.0;
    double se_var = 0.0;
};

MomentStats terminal_moments(const LevyModel& m, const PathGrid& grid, int n_paths,
                             std::uint64_t seed) {
    std::vector<double> xs(static_cast<std::size_t>(n_paths));
    for (int i = 0; i < n_paths; ++i)
        xs[static_cast<std::size_t>(i)] =
            sample_path_stream(m, grid, seed, static_cast<std::uint64_t>(i), 0).values.back();
    MomentStats s;
    for (double x : xs) s.mean += x;
    s.mean /= n_paths;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - s.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    s.var = m2 / (n_paths - 1);
    m4 /= n_paths;
    s.se_mean = std::sqrt(s.var / n_paths);
    // standard error of the sample variance from the fourth central moment
    s.se_var = std::sqrt(std::max(0.0, m4 - s.var * s.var) / n_paths);
    return s;
}

} // namespace

TEST_CASE("cumulant closed forms match hand values", "[levy]") {
    SECTION("all kinds vanish at zero") {
        const std::vector<LevyModel> models = {
            brownian(0.3), poisson(2.0), compound_poisson_normal(1.5, 0.1, 0.2),
            bilateral_gamma(1.0, 4.0, 0.8, 5.0)};
        for (const auto& m : models) REQUIRE(cumulant(m, 0.0, 0) == 0.0);
    }
    SECTION("brownian") {
        const auto m = brownian(0.5);
        REQUIRE(cumulant(m, 1.2, 0) == Catch::Approx(0.5 * 0.25 * 1.44).epsilon(1e-14));
        REQUIRE(cumulant(m, -0.7, 1) == Catch::Approx(0.25 * -0.7).epsilon(1e-14));
        REQUIRE(cumulant(m, 1.9, 2) == Catch::Approx(0.25).epsilon(1e-14));
        REQUIRE(cumulant(m, 1.0, 3) == 0.0);
    }
    SECTION("poisson at log 2") {
        const auto m = poisson(2.0);
        const double z = std::log(2.0);
        REQUIRE(cumulant(m, z, 0) == Catch::Approx(2.0).epsilon(1e-14));
        REQUIRE(cumulant(m, z, 1) == Catch::Approx(4.0).epsilon(1e-14));
        REQUIRE(cumulant(m, z, 2) == Catch::Approx(4.0).epsilon(1e-14));
        REQUIRE(cumulant(m, z, 3) == Catch::Approx(4.0).epsilon(1e-14));
    }
    SECTION("compound poisson normal, zero mean jumps") {
        // E e^{zJ} = e^{s^2 z^2 / 2}, so Psi(z) = lambda (e^{s^2 z^2/2} - 1)
        const auto m = compound_poisson_normal(3.0, 0.0, 1.0);
        const double z = 0.8;
        REQUIRE(cumulant(m, z, 0) ==
                Catch::Approx(3.0 * (std::exp(0.5 * z * z) - 1.0)).epsilon(1e-14));
        REQUIRE(cumulant(m, z, 1) ==
                Catch::Approx(3.0 * z * std::exp(0.5 * z * z)).epsilon(1e-14));
    }
    SECTION("bilateral gamma") {
        const auto m = bilateral_gamma(2.0, 6.0, 1.0, 8.0);
        const double z = 1.5;
        const double psi = 2.0 * std::log(6.0 / 4.5) + 1.0 * std::log(8.0 / 9.5);
        REQUIRE(cumulant(m, z, 0) == Catch::Approx(psi).epsilon(1e-14));
        REQUIRE(cumulant(m, z, 1) ==
                Catch::Approx(2.0 / 4.5 - 1.0 / 9.5).epsilon(1e-14));
        REQUIRE(cumulant(m, z, 2) ==
                Catch::Approx(2.0 / (4.5 * 4.5) + 1.0 / (9.5 * 9.5)).epsilon(1e-14));
        REQUIRE(cumulant(m, z, 3) ==
                Catch::Approx(4.0 / (4.5 * 4.5 * 4.5) - 2.0 / (9.5 * 9.5 * 9.5)).epsilon(1e-14));
    }
}

TEST_CASE("cumulant derivative identities hold under finite differences", "[levy]") {
    const std::vector<LevyModel> smooth = {
        poisson(2.0), compound_poisson_normal(1.5, 0.1, 0.2), bilateral_gamma(1.0, 4.0, 0.8, 5.0)};
    for (const auto& m : smooth) {
        for (int order = 1; order <= 3; ++order) {
            for (double z : {-0.9, -0.3, 0.0, 0.4, 0.9}) {
                // central differences are second order; accept a conservative 1.9
                const double exact = cumulant(m, z, order);
                const double err = std::abs(fd_derivative(m, z, order, 1e-4) - exact);
                if (err < 1e-12 * std::max(1.0, std::abs(exact))) continue;
                REQUIRE(fd_order(m, z, order) > 1.9);
            }
        }
    }
    // quadratic cumulant: central differences are exact up to roundoff
    const auto bm = brownian(0.4);
    for (int order = 1; order <= 3; ++order)
        for (double z : {-0.5, 0.0, 0.7})
            REQUIRE(std::abs(fd_derivative(bm, z, order, 1e-3) - cumulant(bm, z, order)) < 1e-10);
}

TEST_CASE("cumulant rejects bad orders and out-of-domain arguments", "[levy][errors]") {
    const auto m = poisson(1.0);
    REQUIRE_THROWS_AS(cumulant(m, 0.0, 4), UnsupportedOrder);
    REQUIRE_THROWS_AS(cumulant(m, 0.0, -1), UnsupportedOrder);
    REQUIRE_THROWS_AS(cumulant(m, 2.5, 0), OutOfDomain);
    REQUIRE_THROWS_AS(cumulant(m, -2.5, 1), OutOfDomain);
    // boundary points are inside the closed interval
    REQUIRE_NOTHROW(cumulant(m, 2.0, 0));
    REQUIRE_NOTHROW(cumulant(m, -2.0, 0));
}

TEST_CASE("factories validate their parameters", "[levy][errors]") {
    REQUIRE_THROWS_AS(brownian(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(poisson(-1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(compound_poisson_normal(1.0, 0.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(bilateral_gamma(1.0, 4.0, 1.0, -2.0), std::invalid_argument);
    // default moment interval [-2,2] does not fit inside (-1.5, 1.5)
    REQUIRE_THROWS_AS(bilateral_gamma(1.0, 1.5, 1.0, 1.5), std::invalid_argument);
    REQUIRE_NOTHROW(bilateral_gamma(1.0, 1.5, 1.0, 1.5, {-1.2, 1.2}, {-1.0, 1.0}));
    // working interval must sit strictly inside the moment interval
    REQUIRE_THROWS_AS(poisson(1.0, {-1.0, 1.0}, {-1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("exponential moment checks are analytic per kind", "[levy]") {
    REQUIRE(check_exponential_moments(brownian(1.0), {-50.0, 50.0}));
    REQUIRE(check_exponential_moments(poisson(1.0), {-50.0, 50.0}));
    REQUIRE(check_exponential_moments(compound_poisson_normal(1.0, 0.0, 2.0), {-50.0, 50.0}));
    const auto bg = bilateral_gamma(1.0, 4.0, 1.0, 5.0);
    REQUIRE(check_exponential_moments(bg, {-4.9, 3.9}));
    REQUIRE_FALSE(check_exponential_moments(bg, {-4.9, 4.0}));   // hits lambda_plus
    REQUIRE_FALSE(check_exponential_moments(bg, {-5.0, 3.0}));   // hits -lambda_minus
}

TEST_CASE("martingale decomposition removes the mean slope exactly", "[levy]") {
    const std::vector<LevyModel> models = {
        brownian(0.3), poisson(2.0), compound_poisson_normal(1.5, 0.1, 0.2),
        bilateral_gamma(1.0, 4.0, 0.8, 5.0)};
    for (const auto& m : models) {
        const auto [b, mart] = decompose(m);
        REQUIRE(b == m.mean_slope);
        REQUIRE(cumulant(mart, 0.0, 1) == 0.0);
        // second derivative is untouched by the linear shift
        REQUIRE(cumulant(mart, 0.5, 2) == cumulant(m, 0.5, 2));
        REQUIRE(predictable_qv_rate(mart) == Catch::Approx(cumulant(mart, 0.0, 2)).epsilon(1e-14));
    }
    REQUIRE(decompose(poisson(2.0)).first == 2.0);
    REQUIRE(decompose(brownian(0.3)).first == 0.0);
}

TEST_CASE("sampled paths reproduce mean and variance of the law", "[levy][statistical]") {
    const int n_paths = 100000;
    const std::uint64_t seed = 20260817;
    const std::vector<LevyModel> models = {
        brownian(0.4), poisson(2.0), compound_poisson_normal(1.5, 0.3, 0.5)};
    for (const auto& m : models) {
        for (double T : {0.5, 1.0}) {
            const PathGrid grid{T, m.kind == LevyKind::Brownian ? 64 : 1};
            const auto s = terminal_moments(m, grid, n_paths, seed);
            const double mean_exact = cumulant(m, 0.0, 1) * T;
            const double var_exact = cumulant(m, 0.0, 2) * T;
            REQUIRE(std::abs(s.mean - mean_exact) < 4.0 * s.se_mean);
            REQUIRE(std::abs(s.var - var_exact) < 4.0 * s.se_var);
        }
    }
}

TEST_CASE("martingale part of a sampled path has zero mean", "[levy][statistical]") {
    const auto [b, mart] = decompose(poisson(3.0));
    REQUIRE(b == 3.0);
    const PathGrid grid{2.0, 1};
    const auto s = terminal_moments(mart, grid, 100000, 91);
    REQUIRE(std::abs(s.mean) < 4.0 * s.se_mean);
}

TEST_CASE("brownian increments over disjoint windows are uncorrelated", "[levy][statistical]") {
    const auto m = brownian(1.0);
    const PathGrid grid{1.0, 2};
    const int n = 100000;
    double sum_prod = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto p = sample_path_stream(m, grid, 7, static_cast<std::uint64_t>(i), 0);
        const double d1 = p.values[1] - p.values[0];
        const double d2 = p.values[2] - p.values[1];
        sum_prod += d1 * d2;
    }
    // each increment has variance 1/2, so the product has std 1/2
    REQUIRE(std::abs(sum_prod / n) < 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("poisson jump counts follow the poisson law", "[levy][statistical]") {
    const double lambda = 4.0;
    const double T = 1.5;
    const auto m = poisson(lambda);
    const PathGrid grid{T, 1};
    const int n = 50000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto p = sample_path_stream(m, grid, 55, static_cast<std::uint64_t>(i), 0);
        const auto c = static_cast<double>(p.jumps.size());
        sum += c;
        sum2 += c * c;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double exact = lambda * T;
    REQUIRE(std::abs(mean - exact) < 4.0 * std::sqrt(exact / n));
    REQUIRE(std::abs(var - exact) < 0.05 * exact);
}

TEST_CASE("sampling is reproducible bit for bit from the seed", "[levy]") {
    const std::vector<LevyModel> models = {brownian(0.4), compound_poisson_normal(2.0, 0.1, 0.3)};
    const PathGrid grid{1.0, 128};
    for (const auto& m : models) {
        const auto a = sample_path_stream(m, grid, 42, 3, 1);
        const auto b = sample_path_stream(m, grid, 42, 3, 1);
        REQUIRE(a.values == b.values);
        REQUIRE(a.jumps.size() == b.jumps.size());
        const auto c = sample_path_stream(m, grid, 43, 3, 1);
        REQUIRE(a.values != c.values);
        const auto d = sample_path_stream(m, grid, 42, 4, 1);
        REQUIRE(a.values != d.values);
    }
}

TEST_CASE("jump paths evaluate exactly between grid points", "[levy]") {
    const auto m = compound_poisson_normal(5.0, 0.2, 0.4);
    const PathGrid grid{2.0, 16};
    const auto p = sample_path_stream(m, grid, 11, 0, 0);
    REQUIRE_FALSE(p.jumps.empty());

    // grid values agree with the exact evaluator
    for (int k = 0; k <= grid.n_steps; ++k)
        REQUIRE(p.value_at(grid.time(k)) == Catch::Approx(p.values[static_cast<std::size_t>(k)])
                                                .margin(1e-12));

    // right after a jump the value includes it, right before it does not
    const auto& j = p.jumps[p.jumps.size() / 2];
    REQUIRE(p.value_at(j.time) - p.left_value_at(j.time) == Catch::Approx(j.size).epsilon(1e-12));
    const double before = p.value_at(j.time - 1e-9);
    REQUIRE(std::abs(before - p.left_value_at(j.time)) < 1e-8);
}

TEST_CASE("diffusion paths refuse evaluation off the sampling grid", "[levy][errors]") {
    const auto p = sample_path(brownian(1.0), {1.0, 8}, 5);
    REQUIRE_NOTHROW(p.value_at(0.375));
    REQUIRE_THROWS_AS(p.value_at(0.3), std::invalid_argument);
    REQUIRE_THROWS_AS(p.value_at(1.5), std::invalid_argument);
}

TEST_CASE("parametric jump families cannot be sampled", "[levy][errors]") {
    const auto m = bilateral_gamma(1.0, 4.0, 1.0, 5.0);
    REQUIRE_THROWS_AS(sample_path(m, {1.0, 8}, 1), UnsupportedOperation);
}

TEST_CASE("poisson path values are integer counts plus slope", "[levy]") {
    const auto m = poisson(3.0);
    const PathGrid grid{4.0, 7};
    const auto p = sample_path(m, grid, 17);
    for (int k = 0; k <= grid.n_steps; ++k) {
        const double v = p.values[static_cast<std::size_t>(k)];
        REQUIRE(v == std::floor(v)); // slope_adjust is 0 here, so counts are exact integers
    }
    REQUIRE(p.values.back() == Catch::Approx(static_cast<double>(p.jumps.size())));
    REQUIRE(p.min_jump_gap() > 0.0);
}
