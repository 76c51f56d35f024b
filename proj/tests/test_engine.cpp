#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hjmm/engine.hpp"

using namespace hjmm;

namespace {

AnalyticCurve base_curve() {
    return AnalyticCurve::exponential(0.05, -0.1);
}

SimulationScenario brownian_exp_scenario() {
    SimulationScenario s;
    s.models = {brownian(1.0)};
    s.volatility = VolatilitySpec::direct({AnalyticCurve::exponential(0.002, -0.3)});
    s.initial_curve = base_curve();
    s.x_max = 2.0;
    s.points_per_year = 64;
    s.t_max = 0.5;
    s.steps_per_year = 64;
    s.checkpoints = {{0.25, 1.0}, {0.5, 2.0}};
    s.n_paths = 40;
    s.seed = 77;
    return s;
}

} // namespace

TEST_CASE("state functionals clip and report constants", "[engine]") {
    const auto curve = ForwardCurve::from_analytic(base_curve(), 10.0, 200);
    const auto c = StateFunctional::constant(0.4);
    REQUIRE(c(curve) == 0.4);
    REQUIRE(c.is_constant());
    REQUIRE(c.lipschitz_in_norm(WeightSpec::exponential(1.0)) == 0.0);

    const auto a = StateFunctional::short_rate_affine(0.1, 2.0, 0.0, 1.0);
    REQUIRE_FALSE(a.is_constant());
    REQUIRE(a(curve) == Catch::Approx(0.1 + 2.0 * 0.05).margin(1e-15));
    ForwardCurve high = curve;
    for (auto& v : high.values) v += 3.0;
    high.tail_value += 3.0;
    REQUIRE(a(high) == 1.0);
    const auto ec = embedding_constants(WeightSpec::exponential(1.0));
    REQUIRE(a.lipschitz_in_norm(WeightSpec::exponential(1.0)) ==
            Catch::Approx(2.0 * std::sqrt(1.0 + ec.c1 * ec.c1)).epsilon(1e-14));

    const auto b = StateFunctional::benchmark_affine(0.0, 10.0, 2.0, 0.0, 1.0);
    REQUIRE(b(curve) == Catch::Approx(10.0 * curve.value_at(2.0)).margin(1e-15));

    REQUIRE_THROWS_AS(StateFunctional::short_rate_affine(0.0, 1.0, 0.5, 0.2),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(StateFunctional::benchmark_affine(0.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("volatility factories enforce family invariants", "[engine]") {
    const auto lam = AnalyticCurve::exponential(0.02, -0.5);
    const auto spec = VolatilitySpec::constant_direction({lam});
    REQUIRE(spec.entries.size() == 1);
    REQUIRE(spec.state_independent());

    REQUIRE_THROWS_AS(VolatilitySpec::constant_direction({AnalyticCurve::constant(0.01)}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(
        VolatilitySpec::constant_direction({lam}, {StateFunctional::constant(1.2)}),
        std::invalid_argument);
    REQUIRE_THROWS_AS(
        VolatilitySpec::constant_direction({lam}, {StateFunctional::constant(-0.1)}),
        std::invalid_argument);

    const auto p = AnalyticCurve::polynomial({0.01, 0.001});
    const auto jd = VolatilitySpec::jump_diffusion_bs(p, 0.05, 0.005,
                                                      StateFunctional::constant(1.0),
                                                      StateFunctional::constant(0.003));
    REQUIRE(jd.entries.size() == 3);
    REQUIRE(jd.entries[1].direction(0.0) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(jd.entries[2].direction(5.0) == Catch::Approx(-0.005).margin(1e-18));
    REQUIRE(jd.state_independent());
    REQUIRE_THROWS_AS(VolatilitySpec::jump_diffusion_bs(AnalyticCurve::exponential(1.0, -1.0),
                                                        0.05, 0.005,
                                                        StateFunctional::constant(1.0),
                                                        StateFunctional::constant(1.0)),
                      std::invalid_argument);

    const auto sde = VolatilitySpec::state_dependent_eta(
        p, 0.05, StateFunctional::constant(1.0), StateFunctional::constant(0.003),
        StateFunctional::short_rate_affine(0.0, 0.1, 0.0, 0.01));
    REQUIRE_FALSE(sde.state_independent());
}

TEST_CASE("scenario validation rejects misaligned inputs", "[engine]") {
    auto good = brownian_exp_scenario();
    REQUIRE_NOTHROW(validate_scenario(good));

    auto s = good;
    s.steps_per_year = 48; // 64 % 48 != 0
    REQUIRE_THROWS_AS(validate_scenario(s), ScenarioError);

    s = good;
    s.t_max = 0.51;
    REQUIRE_THROWS_AS(validate_scenario(s), ScenarioError);

    s = good;
    s.checkpoints = {{0.2501, 1.0}};
    REQUIRE_THROWS_AS(validate_scenario(s), ScenarioError);

    s = good;
    s.checkpoints = {{0.5, 0.25}};
    REQUIRE_THROWS_AS(validate_scenario(s), ScenarioError);

    s = good;
    s.checkpoints = {{0.25, 3.0}};
    REQUIRE_THROWS_AS(validate_scenario(s), MaturityBeyondGrid);

    s = good;
    s.snapshots = {{40, 0.25}};
    REQUIRE_THROWS_AS(validate_scenario(s), ScenarioError);

    s = good;
    s.models = {brownian(1.0), poisson(1.0)};
    REQUIRE_THROWS_AS(validate_scenario(s), ScenarioError);

    s = good;
    s.models = {bilateral_gamma(1.0, 8.0, 1.0, 10.0)};
    REQUIRE_THROWS_AS(validate_scenario(s), UnsupportedOperation);

    // jump diffusion family needs (Brownian, Brownian, Poisson) drivers and
    // rate constraints tied to the series space parameters
    s = good;
    s.volatility = VolatilitySpec::jump_diffusion_bs(AnalyticCurve::polynomial({0.01}), 0.05,
                                                     0.005, StateFunctional::constant(1.0),
                                                     StateFunctional::constant(0.003));
    s.models = {brownian(1.0), brownian(1.0), brownian(1.0)};
    REQUIRE_THROWS_AS(validate_scenario(s), ScenarioError);
    s.models = {brownian(1.0), brownian(1.0), poisson(1.0)};
    REQUIRE_NOTHROW(validate_scenario(s));
    s.beta = 0.009; // 4 delta^2 = 0.01 >= beta
    REQUIRE_THROWS_AS(validate_scenario(s), ScenarioError);
}

TEST_CASE("one Brownian step matches the closed update", "[engine]") {
    SimulationScenario s;
    s.models = {brownian(1.0)};
    s.volatility = VolatilitySpec::direct({AnalyticCurve::constant(0.01)});
    s.initial_curve = base_curve();
    s.x_max = 2.0;
    s.points_per_year = 4;
    s.t_max = 0.25;
    s.steps_per_year = 4;
    const auto state = ForwardCurve::from_analytic(base_curve(), 2.0, 8);
    const double dt = 0.25;
    const double w = 0.123;
    const auto out = step(state, 0.0, dt, {w}, s);
    const auto sh = state.shifted(dt);
    for (int l = 0; l <= 8; ++l) {
        const double y = state.x(l) + dt;
        const double expected = sh.values[static_cast<std::size_t>(l)] +
                                (0.01 * (0.01 * y) * dt + 0.01 * w);
        REQUIRE(out.values[static_cast<std::size_t>(l)] ==
                Catch::Approx(expected).margin(1e-16));
    }
    REQUIRE(out.tail_value ==
            Catch::Approx(sh.tail_value + (0.01 * (0.01 * (2.0 + dt)) * dt + 0.01 * w))
                .margin(1e-16));
}

TEST_CASE("pure transport steps are exact shifts", "[engine]") {
    SimulationScenario s;
    s.models = {brownian(1.0)};
    s.volatility = VolatilitySpec::direct({AnalyticCurve::constant(0.0)});
    s.initial_curve = base_curve();
    s.x_max = 2.0;
    s.points_per_year = 8;
    s.t_max = 0.25;
    s.steps_per_year = 8;
    const auto state = ForwardCurve::from_analytic(base_curve(), 2.0, 16);
    const auto out = step(state, 0.0, 0.125, {0.7}, s);
    const auto sh = state.shifted(0.125);
    REQUIRE(out.values == sh.values);
    REQUIRE(out.tail_value == sh.tail_value);
}

TEST_CASE("Poisson exposure drops the curve uniformly at a jump", "[engine]") {
    const double eta = 0.005;
    SimulationScenario s;
    s.models = {poisson(1.0)};
    s.volatility = VolatilitySpec::direct({AnalyticCurve::constant(-eta)});
    s.initial_curve = base_curve();
    s.x_max = 2.0;
    s.points_per_year = 4;
    s.t_max = 0.25;
    s.steps_per_year = 4;
    const auto state = ForwardCurve::from_analytic(base_curve(), 2.0, 8);
    const double dt = 0.25;
    const auto jumped = step(state, 0.0, dt, {1.0}, s);
    const auto flat = step(state, 0.0, dt, {0.0}, s);
    const auto sh = state.shifted(dt);
    for (int l = 0; l <= 8; ++l) {
        const double y = state.x(l) + dt;
        // drift is eta * lambda * exp(eta y); the jump shifts every maturity by -eta
        const double expected = sh.values[static_cast<std::size_t>(l)] +
                                (eta * std::exp(eta * y) * dt + -eta);
        REQUIRE(jumped.values[static_cast<std::size_t>(l)] ==
                Catch::Approx(expected).margin(1e-15));
        REQUIRE(jumped.values[static_cast<std::size_t>(l)] -
                    flat.values[static_cast<std::size_t>(l)] ==
                Catch::Approx(-eta).margin(1e-15));
    }
}

TEST_CASE("bond prices come from the trapezoid curve integral", "[engine]") {
    const auto curve = ForwardCurve::from_analytic(base_curve(), 10.0, 3650);
    REQUIRE(bond_price(curve, 0.0) == 1.0);
    const double exact = std::exp(-0.05 * (1.0 - std::exp(-1.0)) / 0.1);
    REQUIRE(bond_price(curve, 10.0) == Catch::Approx(exact).epsilon(1e-8));
    REQUIRE_THROWS_AS(bond_price(curve, 10.5), MaturityBeyondGrid);
    REQUIRE(short_rate(curve) == curve.values.front());
}

TEST_CASE("deterministic scenario keeps discounted bonds flat", "[engine]") {
    SimulationScenario s;
    s.models = {brownian(1.0)};
    s.volatility = VolatilitySpec::direct({AnalyticCurve::exponential(1.0, -0.3)},
                                          {StateFunctional::constant(0.0)});
    s.initial_curve = AnalyticCurve::exponential(0.06, -0.2) + AnalyticCurve::constant(0.01);
    s.x_max = 5.0;
    s.points_per_year = 100;
    s.t_max = 1.0;
    s.steps_per_year = 100;
    s.checkpoints = {{0.0, 2.5}, {0.5, 3.0}, {1.0, 5.0}};
    s.snapshots = {{0, 0.5}};
    s.n_paths = 1;
    s.strategy = EngineStrategy::Grid;

    const auto res = simulate(s);
    REQUIRE(res.strategy_used == EngineStrategy::Grid);
    REQUIRE(res.n_excluded == 0);
    for (std::size_t c = 0; c < s.checkpoints.size(); ++c) {
        const double dev = std::abs(res.paths[0].discount[c] * res.paths[0].bond[c] -
                                    res.reference_price[c]);
        REQUIRE(dev <= 1e-12);
    }

    // transport is an exact copy, so the snapshot reproduces the shifted
    // initial samples bit for bit
    const auto& snap = res.snapshots[0];
    REQUIRE(snap.t == 0.5);
    const int shift = 50;
    for (int l = 0; l <= s.window_nodes(); ++l)
        REQUIRE(snap.curve.values[static_cast<std::size_t>(l)] ==
                s.initial_curve((l + shift) * s.dx()));

    const auto rows = martingale_test(res, s);
    for (const auto& row : rows) {
        REQUIRE(row.pass);
        REQUIRE(row.deviation <= 1e-12);
        REQUIRE(row.excluded_fraction == 0.0);
    }
}

TEST_CASE("transport with coarse time steps still shifts exactly", "[engine]") {
    SimulationScenario s;
    s.models = {poisson(2.0)};
    s.volatility = VolatilitySpec::direct({AnalyticCurve::constant(0.0)});
    s.initial_curve = base_curve();
    s.x_max = 2.0;
    s.points_per_year = 16;
    s.t_max = 0.5;
    s.steps_per_year = 4; // four grid cells per time step
    s.checkpoints = {{0.5, 1.5}};
    s.snapshots = {{0, 0.5}};
    s.n_paths = 1;
    s.strategy = EngineStrategy::Grid;
    const auto res = simulate(s);
    const int shift = 8;
    for (int l = 0; l <= s.window_nodes(); ++l)
        REQUIRE(res.snapshots[0].curve.values[static_cast<std::size_t>(l)] ==
                s.initial_curve((l + shift) * s.dx()));
    const auto rows = martingale_test(res, s);
    REQUIRE(rows[0].pass);
}

TEST_CASE("analytic and grid strategies agree", "[engine]") {
    auto s = brownian_exp_scenario();
    s.snapshots = {{3, 0.25}};

    auto sg = s;
    sg.strategy = EngineStrategy::Grid;
    auto sa = s;
    sa.strategy = EngineStrategy::Analytic;
    const auto rg = simulate(sg);
    const auto ra = simulate(sa);
    REQUIRE(rg.strategy_used == EngineStrategy::Grid);
    REQUIRE(ra.strategy_used == EngineStrategy::Analytic);
    REQUIRE(rg.n_excluded == 0);
    REQUIRE(ra.n_excluded == 0);

    for (std::size_t p = 0; p < s.n_paths; ++p)
        for (std::size_t c = 0; c < s.checkpoints.size(); ++c) {
            REQUIRE(ra.paths[p].short_rate[c] ==
                    Catch::Approx(rg.paths[p].short_rate[c]).margin(1e-12));
            REQUIRE(ra.paths[p].discount[c] ==
                    Catch::Approx(rg.paths[p].discount[c]).epsilon(1e-10));
            // the grid bond uses a trapezoid in x, the analytic bond an exact
            // primitive, so they differ at the quadrature error scale
            REQUIRE(ra.paths[p].bond[c] ==
                    Catch::Approx(rg.paths[p].bond[c]).epsilon(1e-6));
        }
    REQUIRE(ra.reference_price[1] == Catch::Approx(rg.reference_price[1]).epsilon(1e-6));

    for (int l = 0; l <= s.window_nodes(); ++l)
        REQUIRE(ra.snapshots[0].curve.values[static_cast<std::size_t>(l)] ==
                Catch::Approx(rg.snapshots[0].curve.values[static_cast<std::size_t>(l)])
                    .margin(1e-12));

    const auto mg = martingale_test(rg, sg);
    const auto ma = martingale_test(ra, sa);
    for (std::size_t c = 0; c < mg.size(); ++c) {
        REQUIRE(mg[c].pass);
        REQUIRE(ma[c].pass);
    }
}

TEST_CASE("same seed gives identical results at any parallelism", "[engine]") {
    auto s = brownian_exp_scenario();
    s.snapshots = {{5, 0.5}};
    auto s4 = s;
    s4.parallelism = 4;
    const auto r1 = simulate(s);
    const auto r1b = simulate(s);
    const auto r4 = simulate(s4);
    REQUIRE(r1.strategy_used == r4.strategy_used);
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        REQUIRE(r1.paths[p].discount == r4.paths[p].discount);
        REQUIRE(r1.paths[p].bond == r4.paths[p].bond);
        REQUIRE(r1.paths[p].short_rate == r4.paths[p].short_rate);
        REQUIRE(r1.paths[p].discount == r1b.paths[p].discount);
        REQUIRE(r1.paths[p].bond == r1b.paths[p].bond);
    }
    REQUIRE(r1.snapshots[0].curve.values == r4.snapshots[0].curve.values);

    auto sg = s;
    sg.strategy = EngineStrategy::Grid;
    auto sg4 = sg;
    sg4.parallelism = 4;
    const auto g1 = simulate(sg);
    const auto g4 = simulate(sg4);
    for (std::size_t p = 0; p < s.n_paths; ++p) {
        REQUIRE(g1.paths[p].discount == g4.paths[p].discount);
        REQUIRE(g1.paths[p].bond == g4.paths[p].bond);
    }
}

TEST_CASE("martingale statistics pass for diffusive and jump drivers", "[engine]") {
    auto s = brownian_exp_scenario();
    s.volatility = VolatilitySpec::direct({AnalyticCurve::constant(0.01)});
    s.n_paths = 4000;
    s.seed = 911;
    const auto rows = martingale_test(s);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        REQUIRE(row.n_used == 4000);
        REQUIRE(row.se > 0.0);
        REQUIRE(row.pass);
    }

    SimulationScenario sp = brownian_exp_scenario();
    sp.models = {poisson(1.0)};
    sp.volatility = VolatilitySpec::direct({AnalyticCurve::constant(-0.005)});
    sp.n_paths = 4000;
    sp.seed = 912;
    const auto prow = martingale_test(sp);
    for (const auto& row : prow) REQUIRE(row.pass);
}

TEST_CASE("inadmissible exposures are rejected up front", "[engine]") {
    auto s = brownian_exp_scenario();
    s.models[0].working_interval = {-0.001, 0.001};
    REQUIRE_THROWS_AS(validate_scenario(s), InadmissibleVolatility);
    s.clamp_exposure = true;
    REQUIRE_NOTHROW(validate_scenario(s));
    s.strategy = EngineStrategy::Analytic;
    REQUIRE_THROWS_AS(simulate(s), UnsupportedOperation);
}

TEST_CASE("state-dependent paths fail, clamp, or abort per policy", "[engine]") {
    SimulationScenario s;
    s.models = {brownian(1.0)};
    s.volatility = VolatilitySpec::direct(
        {AnalyticCurve::constant(0.5)},
        {StateFunctional::short_rate_affine(0.0, 16.0, 0.0, 1.0)});
    s.initial_curve = AnalyticCurve::constant(0.049);
    s.x_max = 2.0;
    s.points_per_year = 16;
    s.t_max = 0.5;
    s.steps_per_year = 16;
    s.checkpoints = {{0.5, 1.0}};
    s.n_paths = 64;
    s.seed = 31;

    // the initial exposure fits, but roughly half the paths push the short
    // rate above the admissible level on the first step
    REQUIRE_NOTHROW(validate_scenario(s));
    REQUIRE_THROWS_AS(simulate(s), RunAborted);

    auto tolerant = s;
    tolerant.max_failure_fraction = 1.0;
    const auto res = simulate(tolerant);
    REQUIRE(res.strategy_used == EngineStrategy::Grid);
    REQUIRE(res.n_excluded > 6);
    REQUIRE(res.n_excluded < 64);
    bool saw_reason = false;
    for (const auto& p : res.paths)
        if (p.excluded && !p.failure.empty()) saw_reason = true;
    REQUIRE(saw_reason);
    const auto rows = martingale_test(res, tolerant);
    REQUIRE(rows[0].n_used == 64 - res.n_excluded);
    REQUIRE(rows[0].excluded_fraction ==
            Catch::Approx(static_cast<double>(res.n_excluded) / 64.0).margin(1e-15));

    auto clamped = s;
    clamped.clamp_exposure = true;
    const auto cres = simulate(clamped);
    REQUIRE(cres.n_excluded == 0);
    std::uint64_t events = 0;
    for (const auto& p : cres.paths) events += p.clamp_events;
    REQUIRE(events > 0);
}

TEST_CASE("hypothesis report respects the analytic bounds", "[engine]") {
    SimulationScenario s;
    s.models = {brownian(1.0), poisson(2.0)};
    s.volatility = VolatilitySpec::constant_direction(
        {AnalyticCurve::exponential(0.02, -1.0), AnalyticCurve({{0.01, 1, -1.0}})},
        {StateFunctional::constant(1.0),
         StateFunctional::short_rate_affine(0.2, 4.0, 0.0, 1.0)});
    s.initial_curve = base_curve();
    s.x_max = 4.0;
    s.points_per_year = 16;
    s.t_max = 1.0;
    s.steps_per_year = 16;

    const auto rep = hypothesis_check(s);
    REQUIRE(rep.corpus_size == 32);
    REQUIRE(rep.drivers.size() == 2);

    const double n1 = std::sqrt(norm_w_analytic_squared(AnalyticCurve::exponential(0.02, -1.0),
                                                        s.weight, NormVariant::Tehranchi));
    REQUIRE(rep.drivers[0].in_weighted_space);
    REQUIRE(rep.drivers[0].sup_norm == Catch::Approx(n1).epsilon(1e-12));
    REQUIRE(rep.drivers[0].lipschitz_estimate == 0.0);
    REQUIRE(rep.drivers[0].lipschitz_bound == 0.0);
    REQUIRE(rep.drivers[0].bound_holds);

    REQUIRE(rep.drivers[1].lipschitz_bound > 0.0);
    REQUIRE(rep.drivers[1].lipschitz_estimate > 0.0);
    REQUIRE(rep.drivers[1].bound_holds);
    REQUIRE(rep.drift_bound > 0.0);
    REQUIRE(rep.drift_holds);

    // a growing exponential direction sits outside the weighted space, so its
    // boundedness hypothesis is reported as failed-by-divergence
    SimulationScenario jd;
    jd.models = {brownian(1.0), brownian(1.0), poisson(1.0)};
    jd.volatility = VolatilitySpec::jump_diffusion_bs(
        AnalyticCurve::polynomial({0.01, 0.001}), 0.05, 0.005, StateFunctional::constant(1.0),
        StateFunctional::constant(0.003));
    jd.initial_curve = base_curve();
    jd.x_max = 4.0;
    jd.points_per_year = 16;
    jd.t_max = 1.0;
    jd.steps_per_year = 16;
    const auto jrep = hypothesis_check(jd);
    REQUIRE_FALSE(jrep.drivers[1].in_weighted_space);
    REQUIRE(std::isinf(jrep.drivers[1].sup_norm));
    REQUIRE(jrep.drivers[1].bound_holds);
    REQUIRE(jrep.drift_holds);
}

TEST_CASE("step refinement converges at first order in dt", "[engine]") {
    SimulationScenario s;
    s.models = {brownian(1.0)};
    s.volatility = VolatilitySpec::direct({AnalyticCurve::exponential(0.05, -0.2)});
    s.initial_curve = base_curve();
    s.x_max = 1.0;
    s.points_per_year = 64;
    s.t_max = 0.5;
    s.steps_per_year = 64;

    const auto fine = sample_path(s.models[0], PathGrid{0.5, 32}, 11);
    auto run_chain = [&](int n_steps) {
        const double dt = 0.5 / n_steps;
        const int agg = 32 / n_steps;
        ForwardCurve state = ForwardCurve::from_analytic(base_curve(), 1.0, 64);
        for (int k = 0; k < n_steps; ++k) {
            double inc = 0.0;
            for (int j = 0; j < agg; ++j)
                inc += fine.values[static_cast<std::size_t>(k * agg + j + 1)] -
                       fine.values[static_cast<std::size_t>(k * agg + j)];
            state = step(state, k * dt, dt, {inc}, s);
        }
        return state;
    };
    const auto c8 = run_chain(8);
    const auto c16 = run_chain(16);
    const auto c32 = run_chain(32);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t l = 0; l < c8.values.size(); ++l) {
        e1 = std::max(e1, std::abs(c8.values[l] - c16.values[l]));
        e2 = std::max(e2, std::abs(c16.values[l] - c32.values[l]));
    }
    REQUIRE(e1 > 0.0);
    REQUIRE(e2 > 0.0);
    const double ratio = e1 / e2;
    REQUIRE(ratio > 1.2);
    REQUIRE(ratio < 3.8);
}

TEST_CASE("norm tracking stays bounded when paths double", "[engine]") {
    auto s = brownian_exp_scenario();
    s.track_norm_sup = true;
    s.strategy = EngineStrategy::Grid;
    s.n_paths = 100;
    const auto r1 = simulate(s);
    s.n_paths = 200;
    const auto r2 = simulate(s);
    REQUIRE(std::isfinite(r1.norm_sup_mean));
    REQUIRE(std::isfinite(r2.norm_sup_mean));
    REQUIRE(r1.norm_sup_mean > 0.0);
    const double ratio = r1.norm_sup_mean / r2.norm_sup_mean;
    REQUIRE(ratio > 0.5);
    REQUIRE(ratio < 2.0);
}

TEST_CASE("analytic strategy refuses what it cannot reproduce", "[engine]") {
    auto s = brownian_exp_scenario();
    REQUIRE(analytic_strategy_eligible(s));

    auto sd = s;
    sd.volatility = VolatilitySpec::direct(
        {AnalyticCurve::constant(0.01)},
        {StateFunctional::short_rate_affine(0.0, 1.0, 0.0, 1.0)});
    std::string reason;
    REQUIRE_FALSE(analytic_strategy_eligible(sd, &reason));
    REQUIRE_FALSE(reason.empty());
    sd.strategy = EngineStrategy::Analytic;
    REQUIRE_THROWS_AS(simulate(sd), UnsupportedOperation);

    auto gridded = s;
    gridded.initial_grid = ForwardCurve::from_analytic(base_curve(), s.x_max, s.window_nodes());
    REQUIRE_FALSE(analytic_strategy_eligible(gridded));
    const auto res = simulate(gridded);
    REQUIRE(res.strategy_used == EngineStrategy::Grid);
}
