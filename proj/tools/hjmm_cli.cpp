// Command line front end: scenario-driven simulation and validation runs.
//
//   hjmm {simulate|validate|norms|drift|integrate} <scenario> [--set k=v]... [--out dir]
//
// Every run writes its outputs as RFC 4180 CSV files plus a manifest with the
// resolved configuration. Exit codes: 0 all asserted checks pass, 1 at least
// one check failed, 2 usage or configuration error, 3 run aborted.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hjmm/checks.hpp"
#include "hjmm/csv.hpp"
#include "hjmm/curve.hpp"
#include "hjmm/drift.hpp"
#include "hjmm/engine.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/integration.hpp"
#include "hjmm/scenario.hpp"
#include "hjmm/spaces.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct RunContext {
    std::string subcommand;
    std::string scenario_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    hjmm::ScenarioDoc doc;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    std::vector<std::string> manifest_extra; // key/value lines added per subcommand
};

struct CheckLine {
    std::string id;
    bool pass = false;
    double expected = 0.0;
    double got = 0.0;
    double tolerance = 0.0;
};

std::string fmt(double v) { return hjmm::format_double(v); }

void print_check(const CheckLine& c) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.id << " expected=" << fmt(c.expected)
              << " got=" << fmt(c.got) << " tolerance=" << fmt(c.tolerance) << "\n";
}

int finish(const RunContext& ctx, const std::vector<CheckLine>& checks, bool aborted = false) {
    int failures = 0;
    for (const auto& c : checks)
        if (!c.pass) ++failures;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();

    std::ofstream m(std::filesystem::path(ctx.out_dir) / "manifest.txt");
    if (!m) throw hjmm::ScenarioError("cannot write manifest in '" + ctx.out_dir + "'");
    m << "tool_version " << kToolVersion << "\n";
    m << "compiler " << __VERSION__ << "\n";
    m << "subcommand " << ctx.subcommand << "\n";
    m << "scenario " << ctx.scenario_path << "\n";
    for (const auto& o : ctx.overrides) m << "override " << o << "\n";
    for (const auto& line : ctx.manifest_extra) m << line << "\n";
    m << "checks_total " << checks.size() << "\n";
    m << "checks_failed " << failures << "\n";
    m << "aborted " << (aborted ? 1 : 0) << "\n";
    m << "wall_time_seconds " << fmt(wall) << "\n";
    m << "\n--- resolved scenario ---\n" << hjmm::serialize_scenario(ctx.doc);

    if (aborted) return 3;
    return failures == 0 ? 0 : 1;
}

std::string strategy_name(hjmm::EngineStrategy s) {
    switch (s) {
        case hjmm::EngineStrategy::Grid: return "grid";
        case hjmm::EngineStrategy::Analytic: return "analytic";
        default: return "auto";
    }
}

// initial state on the engine's window grid
hjmm::ForwardCurve initial_state(const hjmm::SimulationScenario& s) {
    if (s.initial_grid) return *s.initial_grid;
    return hjmm::ForwardCurve::from_analytic(s.initial_curve, s.x_max, s.window_nodes());
}

void write_curve_with_units(const hjmm::ForwardCurve& c, const std::string& path) {
    hjmm::CsvWriter w(path);
    w.comment("tail_value=" + fmt(c.tail_value));
    w.row({"x_years", "forward_rate_per_annum"});
    for (int i = 0; i <= c.n_points; ++i)
        w.row({fmt(c.x(i)), fmt(c.values[static_cast<std::size_t>(i)])});
}

// ----------------------------- simulate --------------------------------------

int run_simulate(RunContext& ctx) {
    hjmm::OutputOptions outputs;
    auto scn = hjmm::build_simulation(
        ctx.doc, std::filesystem::path(ctx.scenario_path).parent_path().string(), &outputs);

    hjmm::SimulationResult res;
    bool aborted = false;
    std::string abort_reason;
    try {
        res = hjmm::simulate(scn);
    } catch (const hjmm::RunAborted& e) {
        aborted = true;
        abort_reason = e.what();
    }

    std::vector<CheckLine> checks;
    if (!aborted) {
        const auto rows = hjmm::martingale_test(res, scn);
        {
            hjmm::CsvWriter w((std::filesystem::path(ctx.out_dir) / "martingale_report.csv")
                                  .string());
            w.row({"t_years", "maturity_years", "reference_price_unitless",
                   "mean_price_unitless", "standard_error_unitless", "deviation_unitless",
                   "bound_unitless", "paths_used_count", "excluded_fraction_unitless",
                   "status"});
            for (const auto& r : rows)
                w.row({fmt(r.t), fmt(r.maturity), fmt(r.reference), fmt(r.mean), fmt(r.se),
                       fmt(r.deviation), fmt(r.bound), std::to_string(r.n_used),
                       fmt(r.excluded_fraction), r.pass ? "pass" : "fail"});
        }
        for (const auto& r : rows) {
            CheckLine c;
            c.id = "martingale_t" + fmt(r.t) + "_T" + fmt(r.maturity);
            c.pass = r.pass;
            c.expected = r.reference;
            c.got = r.mean;
            c.tolerance = r.bound;
            checks.push_back(c);
        }

        if (outputs.write_paths) {
            hjmm::CsvWriter w((std::filesystem::path(ctx.out_dir) / "paths.csv").string());
            w.row({"path_id", "t_years", "maturity_years", "short_rate_per_annum",
                   "discount_factor_unitless", "bond_price_unitless", "status"});
            for (const auto& p : res.paths) {
                if (p.excluded) {
                    w.row({std::to_string(p.path_id), "", "", "", "", "", "excluded"});
                    continue;
                }
                for (std::size_t c = 0; c < scn.checkpoints.size(); ++c)
                    w.row({std::to_string(p.path_id), fmt(scn.checkpoints[c].t),
                           fmt(scn.checkpoints[c].maturity), fmt(p.short_rate[c]),
                           fmt(p.discount[c]), fmt(p.bond[c]), "ok"});
            }
        }

        if (outputs.write_curves && !res.snapshots.empty()) {
            const auto dir = std::filesystem::path(ctx.out_dir) / "curves";
            std::filesystem::create_directories(dir);
            for (const auto& snap : res.snapshots)
                write_curve_with_units(
                    snap.curve,
                    (dir / ("path" + std::to_string(snap.path_id) + "_t" + fmt(snap.t) + ".csv"))
                        .string());
        }

        const auto hyp = hjmm::hypothesis_check(scn);
        {
            hjmm::CsvWriter w((std::filesystem::path(ctx.out_dir) / "hypothesis_report.csv")
                                  .string());
            w.row({"subject", "in_weighted_space_flag", "sup_norm_per_annum",
                   "lipschitz_estimate_unitless", "lipschitz_bound_unitless", "status"});
            for (const auto& d : hyp.drivers)
                w.row({"driver" + std::to_string(d.driver),
                       d.in_weighted_space ? "1" : "0", fmt(d.sup_norm),
                       fmt(d.lipschitz_estimate), fmt(d.lipschitz_bound),
                       d.bound_holds ? "pass" : "fail"});
            w.row({"drift", "", "", fmt(hyp.drift_lipschitz_estimate), fmt(hyp.drift_bound),
                   hyp.drift_holds ? "pass" : "fail"});
        }

        ctx.manifest_extra.push_back("seed " + std::to_string(scn.seed));
        ctx.manifest_extra.push_back("parallelism " + std::to_string(scn.parallelism));
        ctx.manifest_extra.push_back("strategy " + strategy_name(res.strategy_used));
        ctx.manifest_extra.push_back("paths_total " + std::to_string(scn.n_paths));
        ctx.manifest_extra.push_back("paths_excluded " + std::to_string(res.n_excluded));
        std::cout << "simulate: " << scn.n_paths << " paths, strategy "
                  << strategy_name(res.strategy_used) << ", " << res.n_excluded
                  << " excluded\n";
        for (const auto& c : checks) print_check(c);
    } else {
        ctx.manifest_extra.push_back("seed " + std::to_string(scn.seed));
        ctx.manifest_extra.push_back("abort_reason " + abort_reason);
        std::cout << "ABORTED " << abort_reason << "\n";
    }
    return finish(ctx, checks, aborted);
}

// ----------------------------- validate --------------------------------------

int run_validate(RunContext& ctx) {
    // the scenario must itself be valid before the suite runs
    hjmm::OutputOptions outputs;
    (void)hjmm::build_simulation(
        ctx.doc, std::filesystem::path(ctx.scenario_path).parent_path().string(), &outputs);

    const auto results = hjmm::run_all_checks();
    std::vector<CheckLine> checks;
    hjmm::CsvWriter w((std::filesystem::path(ctx.out_dir) / "validation_report.csv").string());
    w.row({"check_id", "status", "expected_unitless", "got_unitless", "tolerance_unitless",
           "runtime_ms", "detail"});
    for (const auto& r : results) {
        w.row({r.id, r.pass ? "pass" : "fail", fmt(r.expected), fmt(r.got), fmt(r.tolerance),
               fmt(r.runtime_ms), r.detail});
        checks.push_back({r.id, r.pass, r.expected, r.got, r.tolerance});
        print_check(checks.back());
    }
    std::cout << "validate: " << results.size() << " checks\n";
    return finish(ctx, checks);
}

// ------------------------------- norms ---------------------------------------

int run_norms(RunContext& ctx) {
    auto scn = hjmm::build_simulation(
        ctx.doc, std::filesystem::path(ctx.scenario_path).parent_path().string());
    const auto grid = initial_state(scn);
    const auto& w = scn.weight;

    std::vector<CheckLine> checks;
    hjmm::CsvWriter out((std::filesystem::path(ctx.out_dir) / "norms_report.csv").string());
    out.row({"quantity", "units", "value", "lower", "upper"});

    const auto orig = hjmm::norm_w(grid, w, hjmm::NormVariant::Original, 1e-4);
    const auto teh = hjmm::norm_w(grid, w, hjmm::NormVariant::Tehranchi, 1e-4);
    out.row({"weighted_norm_original", "per_annum", fmt(orig.value), "", ""});
    out.row({"weighted_norm_tehranchi", "per_annum", fmt(teh.value), "", ""});

    const auto cs = hjmm::embedding_constants(w);
    out.row({"embedding_c1", "unitless", fmt(cs.c1), "", ""});
    out.row({"embedding_c2", "unitless", fmt(cs.c2), "", ""});
    out.row({"embedding_c3", "unitless", fmt(cs.c3), "", ""});
    out.row({"embedding_c4", "unitless", fmt(cs.c4), "", ""});

    double worst_margin = std::numeric_limits<double>::infinity();
    for (auto variant : {hjmm::NormVariant::Original, hjmm::NormVariant::Tehranchi}) {
        const auto rep = hjmm::verify_embeddings(grid, w, variant, 1e-4);
        worst_margin = std::min(worst_margin, rep.worst_margin);
    }
    out.row({"embedding_worst_margin", "unitless", fmt(worst_margin), "", ""});
    checks.push_back({"embedding_bounds", worst_margin >= 1.0, 1.0, worst_margin, 0.0});

    const double equiv = hjmm::verify_norm_equivalence(grid, w, 1e-4);
    out.row({"norm_equivalence_margin", "unitless", fmt(equiv), "", ""});
    checks.push_back({"norm_equivalence", equiv >= 1.0, 1.0, equiv, 0.0});

    // shift contraction: exact analytic norms when possible; the grid check is
    // only meaningful when the window has decayed to the recorded tail
    bool have_shift = false;
    double worst_shift = 0.0;
    if (!scn.initial_grid) {
        const double base =
            hjmm::norm_w_analytic_squared(scn.initial_curve, w, hjmm::NormVariant::Tehranchi);
        for (double t : {scn.dt(), 0.5, 2.0}) {
            const double after = hjmm::norm_w_analytic_squared(scn.initial_curve.shifted(t), w,
                                                               hjmm::NormVariant::Tehranchi);
            worst_shift = std::max(worst_shift, std::sqrt(after / base));
        }
        have_shift = true;
    } else {
        double scale = 0.0;
        for (double v : grid.values) scale = std::max(scale, std::abs(v));
        if (std::abs(grid.values.back() - grid.tail_value) <= 1e-6 * std::max(1.0, scale)) {
            for (double t : {scn.dt(), 0.5, 2.0})
                worst_shift = std::max(worst_shift, hjmm::check_shift_contraction(grid, w, t));
            have_shift = true;
        }
    }
    if (have_shift) {
        out.row({"shift_contraction_factor", "unitless", fmt(worst_shift), "", ""});
        checks.push_back(
            {"shift_contraction", worst_shift <= 1.0 + 1e-12, 1.0, worst_shift, 1e-12});
    } else {
        out.row({"shift_contraction_factor", "unitless", "", "", ""});
    }

    if (!scn.initial_grid) {
        try {
            const auto bs = hjmm::norm_bs_analytic(scn.initial_curve, scn.beta, scn.gamma);
            out.row({"series_norm", "per_annum", fmt(bs.value), fmt(bs.value_lower()),
                     fmt(bs.value_upper())});
            checks.push_back({"series_norm_bracket", bs.bracket_width() < 1e-6, 0.0,
                              bs.bracket_width(), 1e-6});
        } catch (const hjmm::Divergent&) {
            out.row({"series_norm", "per_annum", "inf", "", ""});
        }
        const double wsq =
            hjmm::norm_w_analytic_squared(scn.initial_curve, w, hjmm::NormVariant::Tehranchi);
        out.row({"weighted_norm_tehranchi_analytic", "per_annum", fmt(std::sqrt(wsq)), "", ""});
    }

    for (const auto& c : checks) print_check(c);
    std::cout << "norms: curve on [0," << fmt(scn.x_max) << "] with " << grid.n_points + 1
              << " nodes\n";
    return finish(ctx, checks);
}

// ------------------------------- drift ---------------------------------------

int run_drift(RunContext& ctx) {
    auto scn = hjmm::build_simulation(
        ctx.doc, std::filesystem::path(ctx.scenario_path).parent_path().string());
    const auto state = initial_state(scn);

    std::vector<hjmm::ForwardCurve> sigmas;
    for (const auto& entry : scn.volatility.entries) {
        auto sampled =
            hjmm::ForwardCurve::from_analytic(entry.direction, scn.x_max, scn.window_nodes());
        const double scale = entry.phi(state);
        for (auto& v : sampled.values) v *= scale;
        sampled.tail_value *= scale;
        sigmas.push_back(std::move(sampled));
    }
    const auto drift = hjmm::hjm_drift(sigmas, scn.models, scn.clamp_exposure);

    {
        hjmm::CsvWriter w((std::filesystem::path(ctx.out_dir) / "drift_curve.csv").string());
        std::vector<std::string> header = {"x_years"};
        for (std::size_t i = 0; i < sigmas.size(); ++i)
            header.push_back("sigma" + std::to_string(i) + "_per_annum");
        header.push_back("alpha_per_annum_per_year");
        w.row(header);
        for (int k = 0; k <= drift.alpha.n_points; ++k) {
            std::vector<std::string> row = {fmt(drift.alpha.x(k))};
            for (const auto& s : sigmas) row.push_back(fmt(s.values[static_cast<std::size_t>(k)]));
            row.push_back(fmt(drift.alpha.values[static_cast<std::size_t>(k)]));
            w.row(row);
        }
    }

    std::vector<CheckLine> checks;
    const bool admissible = scn.clamp_exposure || drift.clamped_nodes == 0;
    checks.push_back({"drift_admissible", admissible, 0.0,
                      static_cast<double>(drift.clamped_nodes), 0.0});
    ctx.manifest_extra.push_back("clamped_nodes " + std::to_string(drift.clamped_nodes));
    for (const auto& c : checks) print_check(c);
    std::cout << "drift: " << drift.alpha.n_points + 1 << " nodes on [0," << fmt(scn.x_max)
              << "]\n";
    return finish(ctx, checks);
}

// ------------------------------ integrate ------------------------------------

int run_integrate(RunContext& ctx) {
    auto scn = hjmm::build_simulation(
        ctx.doc, std::filesystem::path(ctx.scenario_path).parent_path().string());
    const auto cfg = hjmm::build_integrate(ctx.doc, scn.models.size());
    const auto study = hjmm::g_integral_rate(scn.models[cfg.driver], cfg.t_max, cfg.integrand,
                                             cfg.levels, cfg.ref_level,
                                             static_cast<int>(cfg.n_paths), cfg.seed);

    {
        hjmm::CsvWriter w((std::filesystem::path(ctx.out_dir) / "integrate_report.csv").string());
        w.row({"level_count", "rms_gap_unitless", "fitted_slope_unitless", "ref_level_count"});
        for (std::size_t i = 0; i < study.levels.size(); ++i)
            w.row({std::to_string(study.levels[i]), fmt(study.rms[i]), fmt(study.slope),
                   std::to_string(study.ref_level)});
    }

    std::vector<CheckLine> checks;
    double max_rms = 0.0;
    for (double r : study.rms) max_rms = std::max(max_rms, r);
    if (cfg.integrand == hjmm::IntegrandKind::Constant) {
        checks.push_back({"integrate_constant_exact", max_rms <= 1e-10, 0.0, max_rms, 1e-10});
    } else {
        const double want = cfg.integrand == hjmm::IntegrandKind::Ramp ? -1.0 : -0.5;
        checks.push_back({"integrate_rate_slope", std::abs(study.slope - want) <= 0.35, want,
                          study.slope, 0.35});
    }
    for (const auto& c : checks) print_check(c);
    std::cout << "integrate: driver " << cfg.driver << ", " << cfg.n_paths << " paths, ref level "
              << study.ref_level << "\n";
    return finish(ctx, checks);
}

} // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    CLI::App app{"arbitrage-free forward curve simulation toolkit"};
    app.require_subcommand(1);

    RunContext ctx;
    ctx.out_dir = "out";
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"simulate", "run the Monte Carlo ensemble and the martingale report"},
        {"validate", "run the full named invariant suite"},
        {"norms", "curve space calculations for the scenario's initial curve"},
        {"drift", "one-shot no-arbitrage drift for the scenario's volatility"},
        {"integrate", "dyadic integral convergence study"},
    };
    for (const auto& [name, desc] : subs) {
        auto* cmd = app.add_subcommand(name, desc);
        cmd->add_option("scenario", ctx.scenario_path, "scenario file")->required();
        cmd->add_option("--set", ctx.overrides, "override section.key=value");
        cmd->add_option("--out", ctx.out_dir, "output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    ctx.subcommand = app.get_subcommands().front()->get_name();
    try {
        ctx.doc = hjmm::load_scenario_file(ctx.scenario_path);
        for (const auto& o : ctx.overrides) hjmm::apply_override(ctx.doc, o);
        std::filesystem::create_directories(ctx.out_dir);

        if (ctx.subcommand == "simulate") return run_simulate(ctx);
        if (ctx.subcommand == "validate") return run_validate(ctx);
        if (ctx.subcommand == "norms") return run_norms(ctx);
        if (ctx.subcommand == "drift") return run_drift(ctx);
        return run_integrate(ctx);
    } catch (const hjmm::RunAborted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
