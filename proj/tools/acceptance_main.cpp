// Acceptance gate: runs every release criterion at its stated size and
// tolerance and prints one PASS/FAIL line per criterion. Exit 0 iff all pass.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hjmm/checks.hpp"

namespace fs = std::filesystem;
using namespace hjmm;

namespace {

struct Outcome {
    bool pass = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string note;
};

struct Criterion {
    std::string id;
    double budget_s = 0.0; // 0 means no stated runtime limit
    Outcome (*body)();
};

// ------------------------------- criterion 1 ---------------------------------
// unit-jump integral identity on 100 seeded standard Poisson paths, T = 10

Outcome c_poisson_integral_identity() {
    Outcome out;
    out.pass = true;
    int deepest = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto path = sample_path(poisson(1.0), PathGrid{10.0, 1}, seed);
        const auto id = poisson_integral_identity(path, 24);
        out.pass = out.pass && id.exact_match;
        out.pass = out.pass && id.stieltjes_left == id.left_limit_exact;
        out.pass = out.pass && id.stieltjes_full_jump == id.full_exact;
        out.value = std::max({out.value, std::abs(id.g_terminal - id.left_limit_exact),
                              std::abs(id.stieltjes_full_jump - id.full_exact)});
        deepest = std::max(deepest, id.level);
    }
    out.pass = out.pass && out.value == 0.0;
    out.note = "100 paths, separating level up to " + std::to_string(deepest);
    return out;
}

// ------------------------------- criterion 2 ---------------------------------
// series norm of e^{dx} against beta/((beta - d^2)(gamma - 2 d))

Outcome c_series_norm_closed_form() {
    Outcome out;
    out.pass = true;
    out.tolerance = 1e-8;
    struct Triple {
        double beta, gamma, d;
    };
    const std::vector<Triple> cases = {{2.0, 1.0, 0.3}, {4.0, 2.0, 0.9}, {1.5, 1.0, 0.1}};
    int most_terms = 0;
    for (const auto& tc : cases) {
        const auto n = norm_bs_analytic(AnalyticCurve::exponential(1.0, tc.d), tc.beta, tc.gamma);
        const double exact = tc.beta / ((tc.beta - tc.d * tc.d) * (tc.gamma - 2.0 * tc.d));
        const double slack = 1e-14 * exact;
        out.pass = out.pass && exact >= n.lower - slack && exact <= n.upper + slack;
        out.pass = out.pass && n.terms_used <= 200;
        out.value = std::max(out.value, n.bracket_width());
        most_terms = std::max(most_terms, n.terms_used);
    }
    out.pass = out.pass && out.value < 1e-8;
    out.note = "widest norm bracket across three (beta,gamma,d) triples, " +
               std::to_string(most_terms) + " terms";
    return out;
}

// ------------------------------- criterion 3 ---------------------------------
// divergence probe flags x^2 e^{x^2 - x} and accepts the constant-vol drift

Outcome c_series_divergence() {
    Outcome out;
    const auto grow =
        divergence_probe([](double x) { return x * x * std::exp(x * x - x); }, {2.0, 4.0, 6.0});
    const double s2 = 0.04; // drift slope of a Brownian model with s = 0.2
    const auto flat =
        divergence_probe([s2](double x) { return s2 * s2 * std::exp(-x); }, {2.0, 4.0, 6.0});
    const auto drift_norm = norm_bs_analytic(AnalyticCurve::polynomial({0.0, s2}), 2.0, 1.0);
    out.pass = grow.divergent && !flat.divergent && std::isfinite(drift_norm.value);
    out.value = out.pass ? 1.0 : 0.0;
    out.note = "growing integrand flagged, linear drift kept a finite norm";
    return out;
}

// ------------------------------- criterion 4 ---------------------------------
// two drift forms agree to second order in dx for all three driver kinds

Outcome c_drift_two_form_order() {
    Outcome out;
    out.pass = true;
    out.tolerance = 0.2;
    auto discrepancies = [](const LevyModel& m, const AnalyticCurve& vol) {
        std::array<double, 3> d{};
        int j = 0;
        for (int n : {400, 800, 1600}) {
            const auto sig = ForwardCurve::from_analytic(vol, 10.0, n);
            d[static_cast<std::size_t>(j++)] = drift_consistency({sig}, {m}).max_discrepancy;
        }
        return d;
    };
    const auto fold = [&](const std::array<double, 3>& d) {
        for (const double order : {std::log2(d[0] / d[1]), std::log2(d[1] / d[2])}) {
            out.value = std::max(out.value, std::abs(order - 2.0));
            out.pass = out.pass && std::abs(order - 2.0) <= 0.2;
        }
    };
    const auto flat = AnalyticCurve::constant(0.02);
    fold(discrepancies(poisson(2.0), flat));
    fold(discrepancies(compound_poisson_normal(1.0, 0.1, 0.3), flat));
    // a constant-vol Brownian potential is quadratic, so the centered
    // difference reproduces the product form exactly; assert that directly and
    // measure the order on a curved volatility instead
    const double exact = discrepancies(brownian(1.0), flat)[2];
    out.pass = out.pass && exact <= 1e-12;
    fold(discrepancies(brownian(1.0), AnalyticCurve::exponential(0.1, -0.5)));
    out.note = "worst |order - 2| over dx halvings; constant-vol Brownian exact at " +
               std::to_string(exact);
    return out;
}

// ------------------------------- criterion 5 ---------------------------------
// discounted bond prices stay on the initial curve within 4 SE + 2 dt P(0,T)

SimulationScenario martingale_scenario(int which, std::uint64_t n_paths) {
    SimulationScenario s;
    s.beta = 2.0;
    s.gamma = 1.0;
    s.weight = WeightSpec::exponential(1.0);
    s.initial_curve = AnalyticCurve::exponential(0.05, -0.1);
    s.x_max = 12.0;
    s.points_per_year = 365;
    s.t_max = 2.0;
    s.steps_per_year = 365;
    s.checkpoints = {{1.0, 5.0}, {2.0, 10.0}};
    s.n_paths = n_paths;
    s.seed = 20260817;
    switch (which) {
    case 0:
        s.models = {brownian(1.0)};
        s.volatility = VolatilitySpec::direct({AnalyticCurve::constant(0.01)},
                                              {StateFunctional::constant(1.0)});
        break;
    case 1:
        s.models = {poisson(1.0)};
        s.volatility = VolatilitySpec::direct({AnalyticCurve::constant(-0.005)},
                                              {StateFunctional::constant(1.0)});
        break;
    default:
        s.models = {brownian(1.0), brownian(1.0), poisson(1.0)};
        s.volatility = VolatilitySpec::jump_diffusion_bs(
            AnalyticCurve::polynomial({0.01, 0.001}), 0.05, 0.005, StateFunctional::constant(1.0),
            StateFunctional::constant(0.003));
        break;
    }
    return s;
}

Outcome c_martingale_no_arbitrage() {
    Outcome out;
    out.pass = true;
    out.tolerance = 1.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int which = 0; which < 3; ++which) {
        for (const auto& row : martingale_test(martingale_scenario(which, 10000))) {
            out.pass = out.pass && row.pass;
            out.value = std::max(out.value, row.deviation / row.bound);
        }
    }
    const double smoke_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.pass = out.pass && smoke_s < 30.0;
    for (int which = 0; which < 3; ++which) {
        for (const auto& row : martingale_test(martingale_scenario(which, 100000))) {
            out.pass = out.pass && row.pass;
            out.value = std::max(out.value, row.deviation / row.bound);
        }
    }
    char note[160];
    std::snprintf(note, sizeof(note),
                  "worst deviation/bound over 3 models x 2 horizons, 1e5 paths; 1e4 smoke in "
                  "%.1fs (limit 30s)",
                  smoke_s);
    out.note = note;
    return out;
}

// ------------------------------- criterion 6 ---------------------------------
// quadratic covariation isometry for the three example weight/driver pairs

Outcome c_stochastic_isometry() {
    Outcome out;
    out.pass = true;
    struct Pair {
        LevyModel model;
        PredictableWeight weight;
        std::uint64_t seed;
    };
    const std::vector<Pair> pairs = {{poisson(1.0), PredictableWeight::One, 11},
                                     {brownian(1.0), PredictableWeight::Zero, 12},
                                     {brownian(1.0), PredictableWeight::IndicatorPositive, 13}};
    for (const auto& pr : pairs) {
        const auto chk = isometry_check(pr.model, 1.0, 256, pr.weight, 10000, pr.seed);
        out.pass = out.pass && chk.pass;
        const double gap = std::abs(chk.lhs_mean - chk.rhs_mean);
        if (chk.tolerance > 0.0) out.value = std::max(out.value, gap / chk.tolerance);
        else out.pass = out.pass && gap == 0.0;
    }
    out.tolerance = 1.0;
    out.note = "worst both-sides gap over 4 combined SE, 1e4 paths each";
    return out;
}

// ------------------------------- criterion 7 ---------------------------------
// Doob bound for Brownian and compensated Poisson ensembles

Outcome c_doob_inequality() {
    Outcome out;
    const auto bm = doob_check(brownian(1.0), 1.0, 512, 10000, 21);
    const auto po = doob_check(poisson(2.0), 1.0, 256, 10000, 22);
    const bool bound_holds = bm.pass && po.pass;
    const bool in_band = bm.ratio >= 1.2 && bm.ratio <= 1.7;
    out.pass = bound_holds && in_band;
    out.value = bm.ratio;
    out.tolerance = 0.25; // stated sanity band [1.2, 1.7] around 1.45
    char note[240];
    std::snprintf(note, sizeof(note),
                  "Doob bound itself %s for both drivers (Poisson ratio %.3f <= 4); the "
                  "Brownian sup/terminal ratio converges to 2*Catalan = 1.8319 as the grid "
                  "refines, so the [1.2,1.7] band only admits under-resolved estimates",
                  bound_holds ? "holds" : "FAILS", po.ratio);
    out.note = note;
    return out;
}

// ------------------------------- criterion 8 ---------------------------------
// drift Lipschitz bound across 150 random admissible curve pairs

Outcome c_drift_lipschitz_bound() {
    Outcome out;
    out.pass = true;
    out.tolerance = 1.0;
    const auto w = WeightSpec::exponential(1.0);
    Rng rng(811, 0, 0);
    const std::vector<std::vector<LevyModel>> model_sets = {
        {brownian(1.0)},
        {poisson(1.5)},
        {compound_poisson_normal(1.0, 0.1, 0.3)},
    };
    int pairs = 0;
    for (const auto& models : model_sets) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<ForwardCurve> g, h;
            for (std::size_t i = 0; i < models.size(); ++i) {
                auto draw = [&] {
                    AnalyticCurve v;
                    for (int j = 0; j < 3; ++j)
                        v = v + AnalyticCurve::exponential(0.2 * (rng.uniform() - 0.5),
                                                           -(1.0 + 1.5 * rng.uniform()));
                    return ForwardCurve::from_analytic(v, 30.0, 3000);
                };
                g.push_back(draw());
                h.push_back(draw());
            }
            out.value = std::max(out.value, verify_drift_lipschitz(models, g, h, w).ratio);
            ++pairs;
        }
    }
    out.pass = out.pass && out.value <= 1.0;
    out.note = "worst lhs/bound ratio over " + std::to_string(pairs) + " pairs";
    return out;
}

// ------------------------------- criterion 9 ---------------------------------
// embedding inequalities and norm equivalence on a 100-curve corpus

Outcome c_embedding_corpus() {
    Outcome out;
    out.tolerance = 1.0;
    const std::vector<WeightSpec> weights = {WeightSpec::exponential(1.0),
                                             WeightSpec::polynomial(6.0)};
    Rng rng(2026, 7, 0);
    double min_margin = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
        AnalyticCurve h;
        for (int j = 0; j < 4; ++j) {
            const double a = -2.0 + 4.0 * rng.uniform();
            const double b = 1.0 + 1.5 * rng.uniform();
            h = h + AnalyticCurve::exponential(a, -b);
        }
        const auto grid = ForwardCurve::from_analytic(h, 30.0, 30000);
        for (const auto& w : weights) {
            for (auto variant : {NormVariant::Original, NormVariant::Tehranchi})
                min_margin =
                    std::min(min_margin, verify_embeddings(grid, w, variant, 1e-4).worst_margin);
            min_margin = std::min(min_margin, verify_norm_equivalence(grid, w, 1e-4));
        }
    }
    out.value = min_margin;
    out.pass = min_margin >= 1.0;
    out.note = "most binding margin over 100 curves x 2 weights (violations throw)";
    return out;
}

// ------------------------------- criterion 10 --------------------------------
// zero exposure rides the shift semigroup bit for bit

Outcome c_transport_exactness() {
    Outcome out;
    out.pass = true;
    out.tolerance = 1e-10;
    SimulationScenario s;
    s.models = {brownian(1.0)};
    s.volatility = VolatilitySpec::direct({AnalyticCurve::exponential(0.002, -0.3)},
                                          {StateFunctional::constant(0.0)});
    s.initial_curve = AnalyticCurve::exponential(0.05, -0.1);
    s.x_max = 6.0;
    s.points_per_year = 364;
    s.t_max = 1.0;
    s.steps_per_year = 364;
    s.checkpoints = {{0.5, 2.0}, {1.0, 3.0}};
    s.snapshots = {{0, 0.5}, {0, 1.0}};
    s.n_paths = 3;
    s.seed = 1;
    s.strategy = EngineStrategy::Grid;
    const auto res = simulate(s);

    // every snapshot node must equal the transported initial curve exactly
    const int W = s.window_nodes();
    std::size_t mismatches = 0;
    for (const auto& snap : res.snapshots) {
        const auto k = static_cast<int>(std::llround(snap.t * s.steps_per_year));
        for (int l = 0; l <= W; ++l)
            if (snap.curve.values[static_cast<std::size_t>(l)] != s.initial_curve((l + k) * s.dx()))
                ++mismatches;
    }

    // semigroup law inside the engine: the two snapshots overlap on a shift
    const auto& snap05 = res.snapshots[0].curve;
    const auto& snap10 = res.snapshots[1].curve;
    const int half = static_cast<int>(std::llround(0.5 * s.steps_per_year));
    for (int l = 0; l + half <= W; ++l)
        if (snap10.values[static_cast<std::size_t>(l)] !=
            snap05.values[static_cast<std::size_t>(l + half)])
            ++mismatches;

    // and on the curve type itself: shifting twice equals shifting once
    const auto win = ForwardCurve::from_analytic(s.initial_curve, s.x_max, W);
    const auto two = win.shifted(0.25).shifted(0.5);
    const auto one = win.shifted(0.75);
    if (two.values != one.values || two.tail_value != one.tail_value) ++mismatches;

    double worst_dev = 0.0;
    for (const auto& row : martingale_test(res, s)) worst_dev = std::max(worst_dev, row.deviation);

    out.pass = mismatches == 0 && worst_dev <= 1e-10;
    out.value = worst_dev;
    out.note = "deterministic martingale deviation; " + std::to_string(mismatches) +
               " node mismatches";
    return out;
}

// ------------------------------- criterion 11 --------------------------------
// dyadic integral converges to the left-limit integral at rate 1/2

Outcome c_g_vs_ito_rate() {
    Outcome out;
    out.tolerance = 0.15;
    const auto study = g_integral_rate(brownian(1.0), 1.0, IntegrandKind::RampDriver,
                                       {6, 7, 8, 9, 10, 11, 12, 13, 14}, 16, 1000, 7);
    out.value = study.slope;
    out.pass = std::abs(study.slope + 0.5) <= 0.15;
    out.note = "fitted log2 RMS slope over levels 6..14, 1e3 paths (target -0.5)";
    return out;
}

// ------------------------------- criterion 12 --------------------------------
// repeated and parallel runs of the command line tool are byte identical

int run_tool(const std::string& args) {
    const std::string cmd = "\"" HJMM_CLI_PATH "\" " + args +
                            " > acceptance_out/last_stdout.txt 2> acceptance_out/last_stderr.txt";
    const int rc = std::system(cmd.c_str());
    return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.txt") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        files[fs::relative(e.path(), dir).string()] = buf.str();
    }
    return files;
}

Outcome c_simulate_determinism() {
    Outcome out;
    fs::create_directories("acceptance_out");
    const std::string scn = "\"" HJMM_SCENARIO_DIR "/determinism.scn\"";
    const std::array<std::pair<std::string, int>, 3> runs = {
        {{"det_a", 1}, {"det_b", 1}, {"det_c", 8}}};
    std::vector<std::map<std::string, std::string>> outputs;
    bool ok = true;
    for (const auto& [name, par] : runs) {
        const fs::path dir = fs::path("acceptance_out") / name;
        fs::remove_all(dir);
        ok = ok && run_tool("simulate " + scn + " --set engine.parallelism=" +
                            std::to_string(par) + " --out " + dir.string()) == 0;
        outputs.push_back(dir_bytes(dir));
    }
    std::size_t compared = outputs.empty() ? 0 : outputs[0].size();
    ok = ok && compared > 0;
    for (std::size_t j = 1; j < outputs.size(); ++j) ok = ok && outputs[j] == outputs[0];
    out.pass = ok;
    out.value = ok ? 0.0 : 1.0;
    out.note = std::to_string(compared) + " files byte-compared across rerun and parallelism 8";
    return out;
}

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {"poisson_integral_identity", 1.0, c_poisson_integral_identity},
        {"series_norm_closed_form", 1.0, c_series_norm_closed_form},
        {"series_divergence_probe", 1.0, c_series_divergence},
        {"drift_two_form_order", 5.0, c_drift_two_form_order},
        {"martingale_no_arbitrage", 0.0, c_martingale_no_arbitrage},
        {"stochastic_isometry", 30.0, c_stochastic_isometry},
        {"doob_inequality", 30.0, c_doob_inequality},
        {"drift_lipschitz_bound", 30.0, c_drift_lipschitz_bound},
        {"embedding_corpus", 10.0, c_embedding_corpus},
        {"transport_exactness", 1.0, c_transport_exactness},
        {"g_vs_ito_rate", 60.0, c_g_vs_ito_rate},
        {"simulate_determinism", 0.0, c_simulate_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = c.body();
        } catch (const std::exception& err) {
            o.pass = false;
            o.note = std::string("exception: ") + err.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = c.budget_s == 0.0 || secs < c.budget_s;
        const bool pass = o.pass && in_budget;
        if (!pass) ++failures;
        char timing[48];
        if (c.budget_s > 0.0)
            std::snprintf(timing, sizeof(timing), "%.2fs (limit %.0fs)", secs, c.budget_s);
        else
            std::snprintf(timing, sizeof(timing), "%.2fs", secs);
        std::printf("[%2zu] %s %-26s value=%.6g tolerance=%.6g time=%s%s%s%s\n", i + 1,
                    pass ? "PASS" : "FAIL", c.id.c_str(), o.value, o.tolerance, timing,
                    o.note.empty() ? "" : " | ", o.note.c_str(),
                    !o.pass || in_budget ? "" : " [over budget]");
        std::fflush(stdout);
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
