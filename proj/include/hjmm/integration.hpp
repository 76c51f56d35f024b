#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hjmm/errors.hpp"
#include "hjmm/levy.hpp"

namespace hjmm {

// ------------------------------ integrands -----------------------------------

enum class Regularity { LeftContinuous, Cadlag };

enum class IntegrandKind { Constant, Ramp, Driver, RampDriver, PredictableDriver };

// integrand evaluated at partition points; left_value carries phi(t-) for the
// jump conventions of the Stieltjes forms
struct Integrand {
    std::function<double(double)> value;
    std::function<double(double)> left_value;
    Regularity regularity = Regularity::LeftContinuous;
};

// builds phi from the path it integrates against (or ignores it)
inline Integrand make_integrand(IntegrandKind kind, const LevyPath& x) {
    Integrand phi;
    switch (kind) {
        case IntegrandKind::Constant:
            phi.value = [](double) { return 1.0; };
            phi.left_value = phi.value;
            phi.regularity = Regularity::LeftContinuous;
            break;
        case IntegrandKind::Ramp:
            phi.value = [](double t) { return t; };
            phi.left_value = phi.value;
            phi.regularity = Regularity::LeftContinuous;
            break;
        case IntegrandKind::Driver:
            phi.value = [&x](double t) { return x.value_at(t); };
            phi.left_value = [&x](double t) { return x.left_value_at(t); };
            phi.regularity = Regularity::Cadlag;
            break;
        case IntegrandKind::RampDriver:
            phi.value = [&x](double t) { return t * x.value_at(t); };
            phi.left_value = [&x](double t) { return t * x.left_value_at(t); };
            phi.regularity = Regularity::Cadlag;
            break;
        case IntegrandKind::PredictableDriver:
            phi.value = [&x](double t) { return x.left_value_at(t); };
            phi.left_value = phi.value;
            phi.regularity = Regularity::LeftContinuous;
            break;
    }
    return phi;
}

// --------------------------- dyadic approximations ----------------------------

struct DyadicIntegral {
    int level = 0;
    double t_max = 0.0;
    std::vector<double> values; // partial sums at k t_max / 2^level, values[0] = 0

    double terminal() const { return values.back(); }
};

// Left-endpoint sums over the dyadic partition:
// G_k = sum_{i<k} phi(t_i) (X(t_{i+1}) - X(t_i)).
// Computed directly from increments of X, never by splitting X into parts,
// so integer-valued jump paths stay exact in floating point.
inline DyadicIntegral g_integral(const Integrand& phi, const LevyPath& x, int level,
                                 int level_cap = 22) {
    if (level < 0) throw std::invalid_argument("partition level must be nonnegative");
    if (level > level_cap)
        throw LevelTooDeep("partition level " + std::to_string(level) +
                           " exceeds the cap " + std::to_string(level_cap));
    const double t_max = x.grid.t_max;
    const auto cells = static_cast<std::size_t>(1) << level;
    const double dt = std::ldexp(t_max, -level);
    DyadicIntegral out;
    out.level = level;
    out.t_max = t_max;
    out.values.assign(cells + 1, 0.0);
    double x_prev = x.value_at(0.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        const double t_left = static_cast<double>(k) * dt;
        const double t_right = static_cast<double>(k + 1) * dt;
        const double x_next = x.value_at(t_right);
        acc += phi.value(t_left) * (x_next - x_prev);
        out.values[k + 1] = acc;
        x_prev = x_next;
    }
    return out;
}

// largest gap between successive refinements, one entry per step in levels
inline std::vector<double> dyadic_consistency(const Integrand& phi, const LevyPath& x,
                                              const std::vector<int>& levels,
                                              int level_cap = 22) {
    if (levels.size() < 2)
        throw std::invalid_argument("consistency needs at least two levels");
    std::vector<double> gaps;
    auto coarse = g_integral(phi, x, levels[0], level_cap);
    for (std::size_t j = 1; j < levels.size(); ++j) {
        if (levels[j] <= levels[j - 1])
            throw std::invalid_argument("levels must increase");
        const auto fine = g_integral(phi, x, levels[j], level_cap);
        const int shift = levels[j] - levels[j - 1];
        double gap = 0.0;
        for (std::size_t k = 0; k < coarse.values.size(); ++k)
            gap = std::max(gap, std::abs(coarse.values[k] - fine.values[k << shift]));
        gaps.push_back(gap);
        coarse = std::move(fine);
    }
    return gaps;
}

// ----------------------------- Stieltjes forms --------------------------------

namespace detail {

// integral of phi over a smooth stretch (no jumps of the driving path inside)
inline double smooth_quadrature(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    const int n = 64;
    double acc = 0.0;
    const double h = (b - a) / n;
    for (int i = 0; i < n; ++i) {
        const double x0 = a + i * h;
        acc += f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h);
    }
    return acc * h / 6.0;
}

} // namespace detail

// Pathwise Stieltjes integral over (0, t] for finite-variation paths:
// jump terms use phi at the jump when full_jump is set, the left limit
// otherwise; the drift part integrates phi between jumps.
inline double stieltjes_integral(const Integrand& phi, const LevyPath& x, double t,
                                 bool full_jump) {
    if (x.has_diffusion)
        throw UnsupportedOperation(
            "pathwise Stieltjes integration needs a finite-variation path");
    double acc = 0.0;
    for (const auto& j : x.jumps) {
        if (j.time > t) break;
        acc += (full_jump ? phi.value(j.time) : phi.left_value(j.time)) * j.size;
    }
    if (x.linear_slope != 0.0) {
        double seg_start = 0.0;
        double drift_part = 0.0;
        for (const auto& j : x.jumps) {
            if (j.time > t) break;
            drift_part += detail::smooth_quadrature(phi.value, seg_start, j.time);
            seg_start = j.time;
        }
        drift_part += detail::smooth_quadrature(phi.value, seg_start, t);
        acc += x.linear_slope * drift_part;
    }
    return acc;
}

inline double stieltjes_left_limit(const Integrand& phi, const LevyPath& x, double t) {
    return stieltjes_integral(phi, x, t, false);
}

inline double stieltjes_full(const Integrand& phi, const LevyPath& x, double t) {
    return stieltjes_integral(phi, x, t, true);
}

// --------------------- unit-jump integral identity ----------------------------

struct JumpIntegralIdentity {
    int level = 0;           // partition level that separates the jumps
    double g_terminal = 0.0; // dyadic left-endpoint approximation of int X dX
    double left_limit_exact = 0.0; // (X_T^2 - X_T) / 2 for unit jumps
    double full_exact = 0.0;       // (X_T^2 + X_T) / 2
    double stieltjes_left = 0.0;
    double stieltjes_full_jump = 0.0;
    bool exact_match = false; // g_terminal equals the closed form bit for bit
};

// For a unit-jump path, once every partition cell holds at most one jump the
// left-endpoint sums hit the closed form exactly in integer arithmetic.
inline JumpIntegralIdentity poisson_integral_identity(const LevyPath& x, int level_cap = 22) {
    if (x.has_diffusion || x.linear_slope != 0.0)
        throw UnsupportedOperation("the integral identity needs a pure unit-jump path");
    JumpIntegralIdentity out;
    const double gap = x.min_jump_gap();
    int level = 1;
    if (std::isfinite(gap)) {
        level = std::max(1, static_cast<int>(std::ceil(std::log2(x.grid.t_max / gap))));
        while (std::ldexp(x.grid.t_max, -level) >= gap) ++level;
    }
    if (level > level_cap)
        throw LevelTooDeep("separating the jumps needs level " + std::to_string(level) +
                           ", beyond the cap " + std::to_string(level_cap));
    const auto phi = make_integrand(IntegrandKind::Driver, x);
    out.level = level;
    out.g_terminal = g_integral(phi, x, level, level_cap).terminal();
    const double xt = x.value_at(x.grid.t_max);
    out.left_limit_exact = 0.5 * (xt * xt - xt);
    out.full_exact = 0.5 * (xt * xt + xt);
    out.stieltjes_left = stieltjes_left_limit(phi, x, x.grid.t_max);
    out.stieltjes_full_jump = stieltjes_full(phi, x, x.grid.t_max);
    out.exact_match = out.g_terminal == out.left_limit_exact;
    return out;
}

// ------------------------------ isometry check --------------------------------

enum class PredictableWeight { One, Zero, IndicatorPositive };

struct IsometryCheck {
    double lhs_mean = 0.0; // E (sum Z dM)^2
    double lhs_se = 0.0;
    double rhs_mean = 0.0; // E qv * sum Z^2 dt
    double rhs_se = 0.0;
    double tolerance = 0.0; // 4 combined standard errors
    bool pass = false;
};

// Monte Carlo check of E (sum_i Z_i (M_{t_{i+1}} - M_{t_i}))^2
//                    = E sum_i Z_i^2 qv dt
// with Z_i known at the left endpoint (1, 0, or the sign indicator of M).
inline IsometryCheck isometry_check(const LevyModel& model, double t_max, int n_steps,
                                    PredictableWeight weight, int n_paths,
                                    std::uint64_t seed) {
    const auto [b, mart] = decompose(model);
    (void)b;
    const double qv = predictable_qv_rate(mart);
    const PathGrid grid{t_max, n_steps};
    const double dt = grid.dt();
    double sum_l = 0.0, sum_l2 = 0.0, sum_r = 0.0, sum_r2 = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        const auto path =
            sample_path_stream(mart, grid, seed, static_cast<std::uint64_t>(p), 0);
        double acc = 0.0;
        double zsq_dt = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            const double m_left = path.values[static_cast<std::size_t>(i)];
            double z = 0.0;
            switch (weight) {
                case PredictableWeight::One: z = 1.0; break;
                case PredictableWeight::Zero: z = 0.0; break;
                case PredictableWeight::IndicatorPositive: z = m_left > 0.0 ? 1.0 : 0.0; break;
            }
            acc += z * (path.values[static_cast<std::size_t>(i) + 1] - m_left);
            zsq_dt += z * z * dt;
        }
        const double lhs = acc * acc;
        const double rhs = qv * zsq_dt;
        sum_l += lhs;
        sum_l2 += lhs * lhs;
        sum_r += rhs;
        sum_r2 += rhs * rhs;
    }
    IsometryCheck out;
    const double n = n_paths;
    out.lhs_mean = sum_l / n;
    out.rhs_mean = sum_r / n;
    out.lhs_se = std::sqrt(std::max(0.0, sum_l2 / n - out.lhs_mean * out.lhs_mean) / n);
    out.rhs_se = std::sqrt(std::max(0.0, sum_r2 / n - out.rhs_mean * out.rhs_mean) / n);
    out.tolerance = 4.0 * std::sqrt(out.lhs_se * out.lhs_se + out.rhs_se * out.rhs_se);
    out.pass = std::abs(out.lhs_mean - out.rhs_mean) <= out.tolerance;
    return out;
}

// ----------------------------- maximal inequality ------------------------------

struct DoobCheck {
    double sup_mean = 0.0;  // E sup_t M_t^2
    double sup_se = 0.0;
    double term_mean = 0.0; // E M_T^2
    double term_se = 0.0;
    double ratio = 0.0;     // sup_mean / term_mean
    double tolerance = 0.0;
    bool pass = false;      // sup <= 4 terminal within 4 combined SEs
};

// E sup M^2 <= 4 E M_T^2. Jump paths use the exact pathwise supremum from the
// jump records (the path is linear between jumps, so segment endpoints carry
// the extremes); diffusion paths use the grid supremum.
inline DoobCheck doob_check(const LevyModel& model, double t_max, int n_steps, int n_paths,
                            std::uint64_t seed) {
    const auto [b, mart] = decompose(model);
    (void)b;
    const PathGrid grid{t_max, n_steps};
    double sum_s = 0.0, sum_s2 = 0.0, sum_t = 0.0, sum_t2 = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        const auto path =
            sample_path_stream(mart, grid, seed, static_cast<std::uint64_t>(p), 0);
        double sup_sq = 0.0;
        if (path.has_diffusion) {
            for (double v : path.values) sup_sq = std::max(sup_sq, v * v);
        } else {
            const double mt = path.value_at(t_max);
            sup_sq = mt * mt;
            for (const auto& j : path.jumps) {
                const double pre = path.left_value_at(j.time);
                const double post = path.value_at(j.time);
                sup_sq = std::max({sup_sq, pre * pre, post * post});
            }
        }
        const double term = path.value_at(t_max) * path.value_at(t_max);
        sum_s += sup_sq;
        sum_s2 += sup_sq * sup_sq;
        sum_t += term;
        sum_t2 += term * term;
    }
    DoobCheck out;
    const double n = n_paths;
    out.sup_mean = sum_s / n;
    out.term_mean = sum_t / n;
    out.sup_se = std::sqrt(std::max(0.0, sum_s2 / n - out.sup_mean * out.sup_mean) / n);
    out.term_se = std::sqrt(std::max(0.0, sum_t2 / n - out.term_mean * out.term_mean) / n);
    out.ratio = out.term_mean > 0.0 ? out.sup_mean / out.term_mean : 0.0;
    out.tolerance =
        4.0 * std::sqrt(out.sup_se * out.sup_se + 16.0 * out.term_se * out.term_se);
    out.pass = out.sup_mean <= 4.0 * out.term_mean + out.tolerance;
    return out;
}

// ----------------------------- convergence rate --------------------------------

struct RateStudy {
    std::vector<int> levels;
    std::vector<double> rms; // root mean square terminal gap to the reference
    double slope = 0.0;      // least squares d log2(rms) / d level
    int ref_level = 0;
};

// Root mean square distance between the dyadic sums at each level and a deep
// reference level, fitted for the convergence order in the partition level.
inline RateStudy g_integral_rate(const LevyModel& model, double t_max, IntegrandKind kind,
                                 const std::vector<int>& levels, int ref_level, int n_paths,
                                 std::uint64_t seed) {
    if (levels.empty()) throw std::invalid_argument("rate study needs levels");
    for (int l : levels)
        if (l >= ref_level)
            throw std::invalid_argument("levels must sit below the reference level");
    const int n_steps = model.kind == LevyKind::Brownian ? (1 << ref_level) : 1;
    const PathGrid grid{t_max, n_steps};
    RateStudy out;
    out.levels = levels;
    out.ref_level = ref_level;
    std::vector<double> sq(levels.size(), 0.0);
    for (int p = 0; p < n_paths; ++p) {
        const auto x = sample_path_stream(model, grid, seed, static_cast<std::uint64_t>(p), 0);
        const auto phi = make_integrand(kind, x);
        const double ref = g_integral(phi, x, ref_level, ref_level).terminal();
        for (std::size_t j = 0; j < levels.size(); ++j) {
            const double g = g_integral(phi, x, levels[j], ref_level).terminal();
            sq[j] += (g - ref) * (g - ref);
        }
    }
    double mean_l = 0.0, mean_y = 0.0;
    std::vector<double> ys(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) {
        out.rms.push_back(std::sqrt(sq[j] / n_paths));
        ys[j] = std::log2(std::max(out.rms.back(), 1e-300));
        mean_l += levels[j];
        mean_y += ys[j];
    }
    mean_l /= static_cast<double>(levels.size());
    mean_y /= static_cast<double>(levels.size());
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < levels.size(); ++j) {
        num += (levels[j] - mean_l) * (ys[j] - mean_y);
        den += (levels[j] - mean_l) * (levels[j] - mean_l);
    }
    out.slope = den > 0.0 ? num / den : 0.0;
    return out;
}

} // namespace hjmm
