#pragma once

// Named invariant suite used by the command line `validate` subcommand. Each
// check exercises one analytic identity or statistical bound at a smoke size
// and reports a single measured value against its tolerance.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hjmm/curve.hpp"
#include "hjmm/drift.hpp"
#include "hjmm/engine.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/integration.hpp"
#include "hjmm/levy.hpp"
#include "hjmm/rng.hpp"
#include "hjmm/spaces.hpp"

namespace hjmm {

struct CheckResult {
    std::string id;
    bool pass = false;
    double expected = 0.0;  // target value (0 for pure error measurements)
    double got = 0.0;       // measured value
    double tolerance = 0.0; // allowed |got - expected|
    std::string detail;
    double runtime_ms = 0.0;
};

namespace detail {

inline CheckResult timed_check(const std::string& id,
                               const std::function<void(CheckResult&)>& body) {
    CheckResult r;
    r.id = id;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("unexpected exception: ") + e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    r.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return r;
}

inline void record_error(CheckResult& r, double err, double tol, const std::string& detail) {
    r.expected = 0.0;
    r.got = err;
    r.tolerance = tol;
    r.pass = err <= tol;
    r.detail = detail;
}

inline double fd_cumulant(const LevyModel& m, double z, int order, double h) {
    if (order == 1) return (cumulant(m, z + h, 0) - cumulant(m, z - h, 0)) / (2.0 * h);
    if (order == 2)
        return (cumulant(m, z + h, 0) - 2.0 * cumulant(m, z, 0) + cumulant(m, z - h, 0)) /
               (h * h);
    return (cumulant(m, z + h, 1) - 2.0 * cumulant(m, z, 1) + cumulant(m, z - h, 1)) / (h * h);
}

} // namespace detail

inline CheckResult check_cumulant_values() {
    return detail::timed_check("cumulant_values", [](CheckResult& r) {
        double err = 0.0;
        auto track = [&err](double got, double want) {
            err = std::max(err, std::abs(got - want) / std::max(1.0, std::abs(want)));
        };
        const auto bm = brownian(0.5);
        track(cumulant(bm, 1.2, 0), 0.5 * 0.25 * 1.44);
        track(cumulant(bm, -0.7, 1), 0.25 * -0.7);
        track(cumulant(bm, 1.9, 2), 0.25);
        track(cumulant(bm, 1.0, 3), 0.0);
        const auto po = poisson(2.0);
        const double z = std::log(2.0);
        for (int order = 0; order <= 3; ++order)
            track(cumulant(po, z, order), order == 0 ? 2.0 : 4.0);
        const auto cp = compound_poisson_normal(3.0, 0.0, 1.0);
        track(cumulant(cp, 0.8, 0), 3.0 * (std::exp(0.5 * 0.64) - 1.0));
        track(cumulant(cp, 0.8, 1), 3.0 * 0.8 * std::exp(0.5 * 0.64));
        const auto bg = bilateral_gamma(2.0, 6.0, 1.0, 8.0);
        track(cumulant(bg, 1.5, 0), 2.0 * std::log(6.0 / 4.5) + std::log(8.0 / 9.5));
        track(cumulant(bg, 1.5, 1), 2.0 / 4.5 - 1.0 / 9.5);
        track(cumulant(bg, 1.5, 2), 2.0 / (4.5 * 4.5) + 1.0 / (9.5 * 9.5));
        track(cumulant(bg, 1.5, 3), 4.0 / (4.5 * 4.5 * 4.5) - 2.0 / (9.5 * 9.5 * 9.5));
        detail::record_error(r, err, 1e-12,
                             "closed-form cumulants for all four driver kinds");
    });
}

inline CheckResult check_cumulant_derivative_consistency() {
    return detail::timed_check("cumulant_derivative_consistency", [](CheckResult& r) {
        const std::vector<LevyModel> models = {brownian(0.4), poisson(2.0),
                                               compound_poisson_normal(1.5, 0.1, 0.2),
                                               bilateral_gamma(1.0, 4.0, 0.8, 5.0)};
        double err = 0.0;
        for (const auto& m : models) {
            for (int order = 1; order <= 3; ++order) {
                for (double z : {-0.5, 0.0, 0.5}) {
                    const double exact = cumulant(m, z, order);
                    const double approx = detail::fd_cumulant(m, z, order, 1e-4);
                    err = std::max(err, std::abs(approx - exact) / std::max(1.0, std::abs(exact)));
                }
            }
        }
        detail::record_error(r, err, 1e-6,
                             "central differences against analytic derivatives");
    });
}

inline CheckResult check_exponential_moment_domain() {
    return detail::timed_check("exponential_moment_domain", [](CheckResult& r) {
        const auto m = poisson(1.0);
        bool ok = true;
        try {
            cumulant(m, 2.0, 0);
            cumulant(m, -2.0, 0);
        } catch (const std::exception&) {
            ok = false;
        }
        for (double z : {2.5, -2.5}) {
            try {
                cumulant(m, z, 0);
                ok = false;
            } catch (const OutOfDomain&) {
            }
        }
        try {
            cumulant(m, 0.0, 4);
            ok = false;
        } catch (const UnsupportedOrder&) {
        }
        r.expected = 1.0;
        r.got = ok ? 1.0 : 0.0;
        r.tolerance = 0.0;
        r.pass = ok;
        r.detail = "closed moment interval honored, order capped at three";
    });
}

inline CheckResult check_martingale_decomposition() {
    return detail::timed_check("martingale_decomposition", [](CheckResult& r) {
        const std::vector<LevyModel> models = {brownian(0.3), poisson(2.0),
                                               compound_poisson_normal(1.5, 0.1, 0.2),
                                               bilateral_gamma(1.0, 4.0, 0.8, 5.0)};
        for (const auto& m : models) {
            const auto [b, mart] = decompose(m);
            if (b != m.mean_slope || cumulant(mart, 0.0, 1) != 0.0 ||
                std::abs(cumulant(mart, 0.5, 2) - cumulant(m, 0.5, 2)) > 1e-14) {
                r.pass = false;
                r.detail = "analytic decomposition identities failed";
                return;
            }
        }
        const auto [b, mart] = decompose(poisson(3.0));
        (void)b;
        const PathGrid grid{2.0, 1};
        const int n_paths = 20000;
        double sum = 0.0, sum_sq = 0.0;
        for (int p = 0; p < n_paths; ++p) {
            const double v = sample_path(mart, grid, 91 + static_cast<std::uint64_t>(p))
                                 .values.back();
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / n_paths;
        const double var = sum_sq / n_paths - mean * mean;
        const double se = std::sqrt(var / n_paths);
        r.expected = 0.0;
        r.got = std::abs(mean);
        r.tolerance = 4.0 * se;
        r.pass = r.got <= r.tolerance;
        r.detail = "compensated jump part has zero-mean terminals";
    });
}

inline CheckResult check_series_norm_closed_form() {
    return detail::timed_check("series_norm_closed_form", [](CheckResult& r) {
        struct Triple {
            double beta, gamma, d;
        };
        const std::vector<Triple> cases = {{2.0, 1.0, 0.3}, {4.0, 2.0, 0.9}, {1.5, 1.0, 0.1}};
        double err = 0.0;
        double widest = 0.0;
        for (const auto& tc : cases) {
            const auto n = norm_bs_analytic(AnalyticCurve::exponential(1.0, tc.d), tc.beta,
                                            tc.gamma);
            const double exact = tc.beta / ((tc.beta - tc.d * tc.d) * (tc.gamma - 2.0 * tc.d));
            err = std::max(err, std::abs(n.value * n.value - exact) / exact);
            widest = std::max(widest, n.bracket_width());
        }
        detail::record_error(r, err, 1e-10, "exponential norms against the closed form");
        if (widest >= 1e-8) {
            r.pass = false;
            r.detail = "series bracket wider than 1e-8";
        }
    });
}

inline CheckResult check_series_norm_divergence() {
    return detail::timed_check("series_norm_divergence", [](CheckResult& r) {
        bool ok = true;
        for (double d : {0.6, -1.5}) {
            try {
                norm_bs_analytic(AnalyticCurve::exponential(1.0, d), 2.0, 1.0);
                ok = false;
            } catch (const Divergent&) {
            }
        }
        const auto grow = divergence_probe(
            [](double x) { return x * x * std::exp(x * x - x); }, {2.0, 4.0, 6.0});
        const auto decay =
            divergence_probe([](double x) { return std::exp(-x); }, {2.0, 4.0, 6.0});
        ok = ok && grow.divergent && !decay.divergent;
        r.expected = 1.0;
        r.got = ok ? 1.0 : 0.0;
        r.tolerance = 0.0;
        r.pass = ok;
        r.detail = "divergent inputs rejected, convergent ones accepted";
    });
}

inline CheckResult check_derivative_domination() {
    return detail::timed_check("derivative_domination", [](CheckResult& r) {
        double err = 0.0;
        const auto lin = check_derivative_inequality(AnalyticCurve::polynomial({0.0, 1.0}), 1.0);
        err = std::max(err, std::abs(lin.ratio - 1.0));
        for (double gamma : {1.0, 2.0}) {
            for (double d : {0.1, 0.3}) {
                if (!(d < 0.5 * gamma)) continue;
                const auto rep =
                    check_derivative_inequality(AnalyticCurve::exponential(1.0, d), gamma);
                err = std::max(err, std::abs(rep.ratio - 2.0 * d * d / (gamma * gamma)));
            }
        }
        detail::record_error(r, err, 1e-12,
                             "equality for the identity, ratio 2 d^2 / gamma^2 for exponentials");
    });
}

inline CheckResult check_embedding_constants_anchors() {
    return detail::timed_check("embedding_constants_anchors", [](CheckResult& r) {
        double err = 0.0;
        auto track = [&err](double got, double want) {
            err = std::max(err, std::abs(got - want) / std::max(1.0, std::abs(want)));
        };
        const auto e1 = embedding_constants(WeightSpec::exponential(1.0));
        track(e1.c1, 1.0);
        track(e1.c2, 2.0);
        track(e1.c3, 9.0);
        track(e1.c4, std::pow(3.0, 3.5));
        const auto p6 = embedding_constants(WeightSpec::polynomial(6.0));
        track(p6.c1, std::sqrt(0.2));
        track(p6.c2, 1.0 + std::sqrt(0.2));
        track(p6.c3, 1.0);
        track(p6.c4, 1.0);
        detail::record_error(r, err, 1e-13, "closed forms for both weight families");
    });
}

inline CheckResult check_embedding_bounds_corpus() {
    return detail::timed_check("embedding_bounds_corpus", [](CheckResult& r) {
        const std::vector<WeightSpec> weights = {WeightSpec::exponential(1.0),
                                                 WeightSpec::polynomial(6.0)};
        Rng rng(2026, 7, 0);
        double min_margin = std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 8; ++trial) {
            AnalyticCurve h;
            for (int j = 0; j < 4; ++j) {
                const double a = -2.0 + 4.0 * rng.uniform();
                const double b = 1.0 + 1.5 * rng.uniform();
                h = h + AnalyticCurve::exponential(a, -b);
            }
            const auto grid = ForwardCurve::from_analytic(h, 30.0, 30000);
            for (const auto& w : weights) {
                for (auto variant : {NormVariant::Original, NormVariant::Tehranchi}) {
                    const auto rep = verify_embeddings(grid, w, variant, 1e-4);
                    min_margin = std::min(min_margin, rep.worst_margin);
                }
                min_margin = std::min(min_margin, verify_norm_equivalence(grid, w, 1e-4));
            }
        }
        r.expected = 1.0;
        r.got = min_margin;
        r.tolerance = 0.0;
        r.pass = min_margin >= 1.0;
        r.detail = "Sobolev-style bounds on a random decaying corpus";
    });
}

inline CheckResult check_shift_contraction_family() {
    return detail::timed_check("shift_contraction", [](CheckResult& r) {
        Rng rng(14, 0, 0);
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            AnalyticCurve h;
            for (int j = 0; j < 3; ++j)
                h = h + AnalyticCurve::exponential(-1.0 + 2.0 * rng.uniform(),
                                                   -(0.5 + 2.0 * rng.uniform()));
            const auto grid = ForwardCurve::from_analytic(h, 20.0, 2000);
            for (const auto& w : {WeightSpec::exponential(0.8), WeightSpec::polynomial(4.0)}) {
                for (double t : {0.01, 0.5, 3.0})
                    worst = std::max(worst, check_shift_contraction(grid, w, t));
            }
        }
        r.expected = 1.0;
        r.got = worst;
        r.tolerance = 1e-12;
        r.pass = worst <= 1.0 + 1e-12;
        r.detail = "left shifts never grow the derivative energy";
    });
}

inline CheckResult check_drift_two_form_consistency() {
    return detail::timed_check("drift_two_form_consistency", [](CheckResult& r) {
        const auto flat = ForwardCurve::from_analytic(AnalyticCurve::constant(0.02), 10.0, 1000);
        const auto exact = drift_consistency({flat}, {brownian(1.0)});
        const auto vol = AnalyticCurve::exponential(0.1, -0.5);
        const auto coarse =
            drift_consistency({ForwardCurve::from_analytic(vol, 10.0, 200)}, {poisson(2.0)});
        const auto fine =
            drift_consistency({ForwardCurve::from_analytic(vol, 10.0, 2000)}, {poisson(2.0)});
        const double order = std::log10(coarse.max_discrepancy / fine.max_discrepancy);
        r.expected = 2.0;
        r.got = order;
        r.tolerance = 0.2;
        r.pass = std::abs(order - 2.0) <= 0.2 && exact.max_discrepancy < 1e-12;
        r.detail = "product and derivative forms agree at second order in dx";
    });
}

inline CheckResult check_drift_closed_form() {
    return detail::timed_check("drift_closed_form", [](CheckResult& r) {
        const double s = 0.05, lambda = 2.0;
        const auto sigma = ForwardCurve::from_analytic(AnalyticCurve::constant(s), 5.0, 500);
        const auto drift = hjm_drift({sigma}, {poisson(lambda)});
        double err = 0.0;
        for (std::size_t k = 0; k < drift.alpha.values.size(); ++k) {
            const double x = drift.alpha.x(static_cast<int>(k));
            const double want = -s * lambda * std::exp(-s * x);
            err = std::max(err, std::abs(drift.alpha.values[k] - want) / std::abs(want));
        }
        detail::record_error(r, err, 1e-12,
                             "constant jump exposure gives alpha = -s lambda exp(-s x)");
        if (drift.clamped_nodes != 0) {
            r.pass = false;
            r.detail = "unexpected clamping";
        }
    });
}

inline CheckResult check_drift_lipschitz_c5() {
    return detail::timed_check("drift_lipschitz_c5", [](CheckResult& r) {
        const auto w = WeightSpec::exponential(1.0);
        Rng rng(811, 0, 0);
        const std::vector<std::vector<LevyModel>> model_sets = {
            {brownian(1.0)},
            {poisson(1.5)},
            {compound_poisson_normal(1.0, 0.1, 0.3), brownian(0.8)},
        };
        double worst = 0.0;
        int pairs = 0;
        for (const auto& models : model_sets) {
            for (int trial = 0; trial < 7; ++trial) {
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
                worst = std::max(worst, verify_drift_lipschitz(models, g, h, w).ratio);
                ++pairs;
            }
        }
        r.expected = 1.0;
        r.got = worst;
        r.tolerance = 0.0;
        r.pass = worst <= 1.0;
        r.detail = "no bound violation across " + std::to_string(pairs) + " random pairs";
    });
}

inline CheckResult check_poisson_integral_identity() {
    return detail::timed_check("poisson_integral_identity", [](CheckResult& r) {
        bool ok = true;
        for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
            const auto path = sample_path(poisson(3.0), PathGrid{2.0, 1}, seed);
            const auto id = poisson_integral_identity(path, 22);
            ok = ok && id.exact_match;
            ok = ok && std::abs(id.stieltjes_left - id.left_limit_exact) < 1e-12;
            ok = ok && std::abs(id.stieltjes_full_jump - id.full_exact) < 1e-12;
        }
        r.expected = 1.0;
        r.got = ok ? 1.0 : 0.0;
        r.tolerance = 0.0;
        r.pass = ok;
        r.detail = "dyadic sums hit (X^2 - X)/2 exactly once jumps separate";
    });
}

inline CheckResult check_isometry() {
    return detail::timed_check("isometry", [](CheckResult& r) {
        const auto chk = isometry_check(poisson(1.0), 1.0, 256, PredictableWeight::One, 2000, 5);
        const auto bm =
            isometry_check(brownian(1.0), 1.0, 256, PredictableWeight::IndicatorPositive, 2000, 6);
        r.expected = 0.0;
        r.got = std::abs(chk.lhs_mean - chk.rhs_mean);
        r.tolerance = chk.tolerance;
        r.pass = chk.pass && bm.pass;
        r.detail = "second moment of the martingale sum matches the bracket";
    });
}

inline CheckResult check_doob() {
    return detail::timed_check("doob", [](CheckResult& r) {
        const auto chk = doob_check(brownian(1.0), 1.0, 256, 2000, 11);
        r.expected = 4.0;
        r.got = chk.ratio;
        r.tolerance = 0.0;
        r.pass = chk.pass && chk.ratio < 4.0;
        r.detail = "running supremum bounded by four terminal second moments";
    });
}

inline CheckResult check_g_rate_ramp_slope() {
    return detail::timed_check("g_rate_ramp_slope", [](CheckResult& r) {
        const auto study =
            g_integral_rate(brownian(1.0), 1.0, IntegrandKind::RampDriver, {5, 7, 9}, 12, 300, 7);
        r.expected = -0.5;
        r.got = study.slope;
        r.tolerance = 0.25;
        r.pass = std::abs(study.slope + 0.5) <= 0.25;
        r.detail = "path-dependent integrand converges at order one half in the level";
    });
}

inline CheckResult check_transport_martingale_deterministic() {
    return detail::timed_check("transport_martingale_deterministic", [](CheckResult& r) {
        SimulationScenario s;
        s.models = {brownian(1.0)};
        s.volatility = VolatilitySpec::direct({AnalyticCurve::exponential(0.002, -0.3)},
                                              {StateFunctional::constant(0.0)});
        s.initial_curve = AnalyticCurve::exponential(0.05, -0.1);
        s.x_max = 4.0;
        s.points_per_year = 128;
        s.steps_per_year = 128;
        s.t_max = 0.5;
        s.checkpoints = {{0.25, 1.0}, {0.5, 2.0}};
        s.n_paths = 4;
        s.seed = 3;
        s.strategy = EngineStrategy::Grid;
        const auto rows = martingale_test(s);
        double worst = 0.0;
        for (const auto& row : rows) worst = std::max(worst, std::abs(row.deviation));
        r.expected = 0.0;
        r.got = worst;
        r.tolerance = 1e-10;
        r.pass = worst <= 1e-10;
        r.detail = "zero exposure leaves discounted bonds exactly flat";
    });
}

inline std::vector<CheckResult> run_all_checks() {
    std::vector<CheckResult> out;
    out.push_back(check_cumulant_values());
    out.push_back(check_cumulant_derivative_consistency());
    out.push_back(check_exponential_moment_domain());
    out.push_back(check_martingale_decomposition());
    out.push_back(check_series_norm_closed_form());
    out.push_back(check_series_norm_divergence());
    out.push_back(check_derivative_domination());
    out.push_back(check_embedding_constants_anchors());
    out.push_back(check_embedding_bounds_corpus());
    out.push_back(check_shift_contraction_family());
    out.push_back(check_drift_two_form_consistency());
    out.push_back(check_drift_closed_form());
    out.push_back(check_drift_lipschitz_c5());
    out.push_back(check_poisson_integral_identity());
    out.push_back(check_isometry());
    out.push_back(check_doob());
    out.push_back(check_g_rate_ramp_slope());
    out.push_back(check_transport_martingale_deterministic());
    return out;
}

} // namespace hjmm
