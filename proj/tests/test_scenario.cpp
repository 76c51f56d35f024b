#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "hjmm/scenario.hpp"

using namespace hjmm;

namespace {

const char* kBaseScenario = R"(# base scenario
version 1

[driver]
kind brownian
volatility 1.0

[driver]
kind poisson
intensity 2.0

[volatility]
family direct
direction1 exp 0.002 -0.3
direction2 const -0.005
phi1 constant 1.0

[space]
beta 2.0
gamma 1.0
weight exponential 1.0
x_max 2.0
points_per_year 64

[initial_curve]
kind analytic
spec exp 0.05 -0.1

[grid]
t_max 0.5
steps_per_year 64

[monte_carlo]
n_paths 40
seed 77

[outputs]
checkpoint 0.25 1.0
checkpoint 0.5 2.0
snapshot 0 0.5
write_paths true

[engine]
strategy auto
parallelism 2
clamp_exposure false
allowance_factor 2.0
max_failure_fraction 0.1
)";

} // namespace

TEST_CASE("curve expressions cover the analytic term language", "[scenario]") {
    const auto c = parse_curve_spec("const 0.05");
    REQUIRE(c(3.0) == Catch::Approx(0.05).margin(1e-18));

    const auto mix = parse_curve_spec("const 0.01 + exp 0.04 -0.5 + term 0.002 1 -0.3");
    REQUIRE(mix(2.0) ==
            Catch::Approx(0.01 + 0.04 * std::exp(-1.0) + 0.002 * 2.0 * std::exp(-0.6))
                .epsilon(1e-14));

    const auto poly = parse_curve_spec("poly 0.01 0.001");
    REQUIRE(poly(3.0) == Catch::Approx(0.013).epsilon(1e-14));
    REQUIRE(poly.max_abs_rate() == 0.0);

    const auto se = parse_curve_spec("shifted_exp 0.1 0.05");
    REQUIRE(se(0.0) == Catch::Approx(0.0).margin(1e-18));

    REQUIRE_THROWS_AS(parse_curve_spec(""), ScenarioError);
    REQUIRE_THROWS_AS(parse_curve_spec("const"), ScenarioError);
    REQUIRE_THROWS_AS(parse_curve_spec("wiggle 1 2"), ScenarioError);
    REQUIRE_THROWS_AS(parse_curve_spec("const 0.05 exp 1 -1"), ScenarioError);
    REQUIRE_THROWS_AS(parse_curve_spec("term 0.1 -1 0.0"), ScenarioError);
    REQUIRE_THROWS_AS(parse_curve_spec("const abc"), ScenarioError);
}

TEST_CASE("functional expressions build the clipped library", "[scenario]") {
    const auto c = parse_functional_spec("constant 0.4");
    REQUIRE(c.is_constant());
    REQUIRE(c.value == 0.4);

    const auto a = parse_functional_spec("short_rate_affine 0.1 2.0 0.0 1.0");
    REQUIRE(a.kind == StateFunctional::Kind::ShortRateAffine);
    REQUIRE(a.slope == 2.0);
    REQUIRE(a.clip_hi == 1.0);

    const auto b = parse_functional_spec("benchmark_affine 0.0 1.0 2.5 0.0 0.5");
    REQUIRE(b.kind == StateFunctional::Kind::BenchmarkAffine);
    REQUIRE(b.benchmark_x == 2.5);

    REQUIRE_THROWS_AS(parse_functional_spec("constant"), ScenarioError);
    REQUIRE_THROWS_AS(parse_functional_spec("short_rate_affine 1 2 3"), ScenarioError);
    REQUIRE_THROWS_AS(parse_functional_spec("mystery 1"), ScenarioError);
}

TEST_CASE("scenario text parses into sections and builds an engine scenario", "[scenario]") {
    const auto doc = parse_scenario_text(kBaseScenario);
    REQUIRE(doc.version == 1);
    OutputOptions opts;
    const auto s = build_simulation(doc, "", &opts);
    REQUIRE(s.models.size() == 2);
    REQUIRE(s.models[0].kind == LevyKind::Brownian);
    REQUIRE(s.models[1].kind == LevyKind::Poisson);
    REQUIRE(s.models[1].intensity == 2.0);
    REQUIRE(s.volatility.entries.size() == 2);
    REQUIRE(s.volatility.entries[1].direction(1.0) == Catch::Approx(-0.005).margin(1e-18));
    REQUIRE(s.beta == 2.0);
    REQUIRE(s.x_max == 2.0);
    REQUIRE(s.points_per_year == 64);
    REQUIRE(s.t_max == 0.5);
    REQUIRE(s.n_paths == 40);
    REQUIRE(s.seed == 77);
    REQUIRE(s.checkpoints.size() == 2);
    REQUIRE(s.checkpoints[1].maturity == 2.0);
    REQUIRE(s.snapshots.size() == 1);
    REQUIRE(s.parallelism == 2);
    REQUIRE(opts.write_paths);
    REQUIRE_NOTHROW(validate_scenario(s));

    // the parsed scenario actually runs
    auto runnable = s;
    runnable.n_paths = 8;
    runnable.parallelism = 1;
    const auto res = simulate(runnable);
    REQUIRE(res.paths.size() == 8);
    REQUIRE(res.n_excluded == 0);
}

TEST_CASE("parser rejects malformed documents", "[scenario]") {
    REQUIRE_THROWS_AS(parse_scenario_text("no version here\n"), ScenarioError);
    REQUIRE_THROWS_AS(parse_scenario_text("[driver]\nkind brownian\n"), ScenarioError);
    REQUIRE_THROWS_AS(parse_scenario_text("version 1\n[driver\nkind brownian\n"), ScenarioError);
    REQUIRE_THROWS_AS(parse_scenario_text("version 1\n[driver]\nkind\n"), ScenarioError);

    auto doc = parse_scenario_text(kBaseScenario);
    doc.version = 2;
    REQUIRE_THROWS_AS(build_simulation(doc), ScenarioError);

    // unknown section
    auto extra = parse_scenario_text(kBaseScenario);
    extra.sections.push_back({"mystery", {{"k", "v"}}});
    REQUIRE_THROWS_AS(build_simulation(extra), ScenarioError);

    // unknown key inside a known section
    auto badkey = parse_scenario_text(kBaseScenario);
    for (auto& sec : badkey.sections)
        if (sec.name == "space") sec.entries.push_back({"curvature", "1.0"});
    REQUIRE_THROWS_AS(build_simulation(badkey), ScenarioError);

    // missing required section
    auto missing = parse_scenario_text(kBaseScenario);
    missing.sections.erase(missing.sections.begin() + 2); // [volatility]
    REQUIRE_THROWS_AS(build_simulation(missing), ScenarioError);

    // driver factory errors surface as scenario errors
    auto badvol = parse_scenario_text(kBaseScenario);
    for (auto& sec : badvol.sections)
        if (sec.name == "driver" && sec.entries[0].second == "brownian")
            sec.entries[1].second = "-1.0";
    REQUIRE_THROWS_AS(build_simulation(badvol), ScenarioError);
}

TEST_CASE("overrides replace values and respect section indices", "[scenario]") {
    auto doc = parse_scenario_text(kBaseScenario);
    apply_override(doc, "monte_carlo.seed=123");
    apply_override(doc, "driver[1].intensity=5.0");
    apply_override(doc, "engine.parallelism=8");
    apply_override(doc, "outputs.checkpoint=0.5 1.5");
    const auto s = build_simulation(doc);
    REQUIRE(s.seed == 123);
    REQUIRE(s.models[1].intensity == 5.0);
    REQUIRE(s.parallelism == 8);
    // the repeated key collapses to the single override
    REQUIRE(s.checkpoints.size() == 1);
    REQUIRE(s.checkpoints[0].t == 0.5);
    REQUIRE(s.checkpoints[0].maturity == 1.5);

    // appending a key that was absent
    apply_override(doc, "engine.track_norm_sup=true");
    REQUIRE(build_simulation(doc).track_norm_sup);

    REQUIRE_THROWS_AS(apply_override(doc, "no_equals"), ScenarioError);
    REQUIRE_THROWS_AS(apply_override(doc, "driver[5].intensity=1"), ScenarioError);
    REQUIRE_THROWS_AS(apply_override(doc, "mystery.k=1"), ScenarioError);
    REQUIRE_THROWS_AS(apply_override(doc, "monte_carlo=9"), ScenarioError);
}

TEST_CASE("serialization round-trips through the parser", "[scenario]") {
    auto doc = parse_scenario_text(kBaseScenario);
    apply_override(doc, "monte_carlo.seed=919");
    const std::string text = serialize_scenario(doc);
    const auto again = parse_scenario_text(text);
    REQUIRE(serialize_scenario(again) == text);
    const auto s1 = build_simulation(doc);
    const auto s2 = build_simulation(again);
    REQUIRE(s1.seed == s2.seed);
    REQUIRE(s1.models.size() == s2.models.size());
    REQUIRE(s1.checkpoints.size() == s2.checkpoints.size());
}

TEST_CASE("scenario files load from disk with csv initial curves", "[scenario]") {
    const std::string dir = "scenario_test_tmp";
    std::remove((dir + "/curve.csv").c_str());
    std::remove((dir + "/case.scn").c_str());
    REQUIRE(std::system(("mkdir -p " + dir).c_str()) == 0);

    ForwardCurve::from_analytic(AnalyticCurve::exponential(0.05, -0.1), 2.0, 128)
        .write_csv(dir + "/curve.csv");

    std::string text = kBaseScenario;
    const std::string analytic = "kind analytic\nspec exp 0.05 -0.1";
    const std::string csv = "kind csv\npath curve.csv";
    text.replace(text.find(analytic), analytic.size(), csv);
    {
        std::ofstream out(dir + "/case.scn");
        out << text;
    }

    const auto doc = load_scenario_file(dir + "/case.scn");
    const auto s = build_simulation(doc, dir);
    REQUIRE(s.initial_grid.has_value());
    REQUIRE(s.initial_grid->n_points == 128);
    REQUIRE_NOTHROW(validate_scenario(s));

    REQUIRE_THROWS_AS(load_scenario_file(dir + "/absent.scn"), ScenarioError);
}

TEST_CASE("integrate section builds the diagnostic configuration", "[scenario]") {
    std::string text = kBaseScenario;
    text += R"(
[integrate]
driver 1
integrand ramp_driver
levels 6 8 10
ref_level 13
n_paths 300
t_max 1.0
seed 55
)";
    const auto doc = parse_scenario_text(text);
    const auto cfg = build_integrate(doc, 2);
    REQUIRE(cfg.driver == 1);
    REQUIRE(cfg.integrand == IntegrandKind::RampDriver);
    REQUIRE(cfg.levels == std::vector<int>{6, 8, 10});
    REQUIRE(cfg.ref_level == 13);
    REQUIRE(cfg.n_paths == 300);
    REQUIRE(cfg.seed == 55);

    // defaults when the section is absent
    const auto base = parse_scenario_text(kBaseScenario);
    const auto dcfg = build_integrate(base, 2);
    REQUIRE(dcfg.driver == 0);
    REQUIRE(dcfg.ref_level == 12);

    auto bad = parse_scenario_text(text);
    REQUIRE_THROWS_AS(build_integrate(bad, 1), ScenarioError); // driver 1 of 1 is out of range
}
