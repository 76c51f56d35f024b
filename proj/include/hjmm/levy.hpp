#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "hjmm/errors.hpp"
#include "hjmm/rng.hpp"

namespace hjmm {

// ------------------------------ model ---------------------------------------

enum class LevyKind { Brownian, Poisson, CompoundPoissonNormal, ParametricJump };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double z) const { return lo <= z && z <= hi; }
    bool strictly_inside(const Interval& outer) const { return outer.lo < lo && hi < outer.hi; }
    bool zero_interior() const { return lo < 0.0 && 0.0 < hi; }
    double width() const { return hi - lo; }
};

// One real-valued driver: its cumulant family, characteristic quantities and
// the intervals on which exponential moments are controlled. Immutable after
// construction; safe to share across threads.
struct LevyModel {
    LevyKind kind = LevyKind::Brownian;

    double volatility = 0.0;  // Brownian scale
    double intensity = 0.0;   // jump arrival rate (Poisson, compound Poisson)
    double jump_mean = 0.0;   // compound Poisson normal jump mean
    double jump_std = 0.0;    // compound Poisson normal jump std

    std::string family;       // parametric jump family name
    double alpha_plus = 0.0;  // bilateral gamma: positive-jump shape
    double lambda_plus = 0.0; //                  positive-jump decay
    double alpha_minus = 0.0; //                  negative-jump shape
    double lambda_minus = 0.0;//                  negative-jump decay

    // adds slope_adjust*z to the cumulant; the martingale decomposition of
    // X_t = M_t + b*t sets it to -b so that Psi'(0) becomes 0
    double slope_adjust = 0.0;

    double gaussian_part = 0.0;             // c in the quadratic variation
    double levy_measure_second_moment = 0.0;// integral of x^2 F(dx)
    double mean_slope = 0.0;                // b = E[X_1] = Psi'(0)

    Interval moment_interval{-2.0, 2.0};
    Interval working_interval{-1.0, 1.0};
};

namespace detail {

inline void validate_intervals(const Interval& moment, const Interval& working) {
    if (!moment.zero_interior())
        throw std::invalid_argument("moment_interval must contain 0 as an interior point");
    if (!working.zero_interior())
        throw std::invalid_argument("working_interval must contain 0 as an interior point");
    if (!working.strictly_inside(moment))
        throw std::invalid_argument("working_interval must lie strictly inside moment_interval");
}

} // namespace detail

inline LevyModel brownian(double volatility,
                          Interval moment = {-2.0, 2.0},
                          Interval working = {-1.0, 1.0}) {
    if (!(volatility > 0.0))
        throw std::invalid_argument("brownian volatility must be positive");
    detail::validate_intervals(moment, working);
    LevyModel m;
    m.kind = LevyKind::Brownian;
    m.volatility = volatility;
    m.gaussian_part = volatility * volatility;
    m.levy_measure_second_moment = 0.0;
    m.mean_slope = 0.0;
    m.moment_interval = moment;
    m.working_interval = working;
    return m;
}

inline LevyModel poisson(double intensity,
                         Interval moment = {-2.0, 2.0},
                         Interval working = {-1.0, 1.0}) {
    if (!(intensity > 0.0))
        throw std::invalid_argument("poisson intensity must be positive");
    detail::validate_intervals(moment, working);
    LevyModel m;
    m.kind = LevyKind::Poisson;
    m.intensity = intensity;
    m.gaussian_part = 0.0;
    m.levy_measure_second_moment = intensity; // jumps of size 1
    m.mean_slope = intensity;
    m.moment_interval = moment;
    m.working_interval = working;
    return m;
}

inline LevyModel compound_poisson_normal(double intensity, double mean, double std,
                                         Interval moment = {-2.0, 2.0},
                                         Interval working = {-1.0, 1.0}) {
    if (!(intensity > 0.0))
        throw std::invalid_argument("compound poisson intensity must be positive");
    if (!(std > 0.0))
        throw std::invalid_argument("compound poisson jump std must be positive");
    detail::validate_intervals(moment, working);
    LevyModel m;
    m.kind = LevyKind::CompoundPoissonNormal;
    m.intensity = intensity;
    m.jump_mean = mean;
    m.jump_std = std;
    m.gaussian_part = 0.0;
    m.levy_measure_second_moment = intensity * (mean * mean + std * std);
    m.mean_slope = intensity * mean;
    m.moment_interval = moment;
    m.working_interval = working;
    return m;
}

// Bilateral gamma: difference of two independent gamma subordinators with
// shapes alpha± and decays lambda±. Cumulant defined on (-lambda_minus,
// lambda_plus), so the moment interval must sit strictly inside that range.
inline LevyModel bilateral_gamma(double alpha_plus, double lambda_plus,
                                 double alpha_minus, double lambda_minus,
                                 Interval moment = {-2.0, 2.0},
                                 Interval working = {-1.0, 1.0}) {
    if (!(alpha_plus > 0.0) || !(lambda_plus > 0.0) ||
        !(alpha_minus > 0.0) || !(lambda_minus > 0.0))
        throw std::invalid_argument("bilateral gamma parameters must be positive");
    detail::validate_intervals(moment, working);
    if (!(moment.lo > -lambda_minus && moment.hi < lambda_plus))
        throw std::invalid_argument(
            "bilateral gamma: moment_interval must lie strictly inside (-lambda_minus, lambda_plus); "
            "pass explicit intervals for small decay rates");
    LevyModel m;
    m.kind = LevyKind::ParametricJump;
    m.family = "bilateral_gamma";
    m.alpha_plus = alpha_plus;
    m.lambda_plus = lambda_plus;
    m.alpha_minus = alpha_minus;
    m.lambda_minus = lambda_minus;
    m.gaussian_part = 0.0;
    m.levy_measure_second_moment = alpha_plus / (lambda_plus * lambda_plus) +
                                   alpha_minus / (lambda_minus * lambda_minus);
    m.mean_slope = alpha_plus / lambda_plus - alpha_minus / lambda_minus;
    m.moment_interval = moment;
    m.working_interval = working;
    return m;
}

// ---------------------------- cumulants -------------------------------------

// Psi and its first three derivatives in closed form. order 0..3.
inline double cumulant(const LevyModel& m, double z, int order) {
    if (order < 0 || order > 3)
        throw UnsupportedOrder("cumulant order must be in {0,1,2,3}, got " + std::to_string(order));
    if (!m.moment_interval.contains(z))
        throw OutOfDomain("cumulant argument " + std::to_string(z) + " outside moment interval [" +
                          std::to_string(m.moment_interval.lo) + "," +
                          std::to_string(m.moment_interval.hi) + "]");

    double base = 0.0;
    switch (m.kind) {
        case LevyKind::Brownian: {
            const double s2 = m.volatility * m.volatility;
            if (order == 0) base = 0.5 * s2 * z * z;
            else if (order == 1) base = s2 * z;
            else if (order == 2) base = s2;
            else base = 0.0;
            break;
        }
        case LevyKind::Poisson: {
            const double ez = std::exp(z);
            if (order == 0) base = m.intensity * (ez - 1.0);
            else base = m.intensity * ez;
            break;
        }
        case LevyKind::CompoundPoissonNormal: {
            const double s2 = m.jump_std * m.jump_std;
            const double e = std::exp(m.jump_mean * z + 0.5 * s2 * z * z);
            const double u = m.jump_mean + s2 * z;
            if (order == 0) base = m.intensity * (e - 1.0);
            else if (order == 1) base = m.intensity * u * e;
            else if (order == 2) base = m.intensity * (u * u + s2) * e;
            else base = m.intensity * (u * u * u + 3.0 * s2 * u) * e;
            break;
        }
        case LevyKind::ParametricJump: {
            const double dp = m.lambda_plus - z;
            const double dm = m.lambda_minus + z;
            if (order == 0)
                base = m.alpha_plus * std::log(m.lambda_plus / dp) +
                       m.alpha_minus * std::log(m.lambda_minus / dm);
            else if (order == 1)
                base = m.alpha_plus / dp - m.alpha_minus / dm;
            else if (order == 2)
                base = m.alpha_plus / (dp * dp) + m.alpha_minus / (dm * dm);
            else
                base = 2.0 * m.alpha_plus / (dp * dp * dp) - 2.0 * m.alpha_minus / (dm * dm * dm);
            break;
        }
    }
    if (order == 0) base += m.slope_adjust * z;
    else if (order == 1) base += m.slope_adjust;
    return base;
}

// True iff the jump measure has finite exponential moments on the whole
// interval; decided analytically per kind.
inline bool check_exponential_moments(const LevyModel& m, const Interval& interval) {
    if (!(interval.lo <= 0.0 && 0.0 <= interval.hi))
        throw std::invalid_argument("exponential moment interval must contain 0");
    switch (m.kind) {
        case LevyKind::Brownian:
        case LevyKind::Poisson:
        case LevyKind::CompoundPoissonNormal:
            // no jumps, bounded jumps, or Gaussian jump tails: finite everywhere
            return true;
        case LevyKind::ParametricJump:
            // exponential jump tails with decays lambda±
            return interval.lo > -m.lambda_minus && interval.hi < m.lambda_plus;
    }
    return false;
}

// X_t = M_t + b*t with b = Psi'(0); the martingale part has the cumulant
// Psi_M(z) = Psi(z) - b*z, so Psi_M'(0) = 0 exactly.
inline std::pair<double, LevyModel> decompose(const LevyModel& m) {
    const double b = cumulant(m, 0.0, 1);
    LevyModel mart = m;
    mart.slope_adjust -= b;
    mart.mean_slope = 0.0;
    return {b, mart};
}

// Rate of the predictable quadratic variation: <M,M>_t = rate * t for the
// martingale part, rate = c + integral of x^2 F(dx) = Psi''(0).
inline double predictable_qv_rate(const LevyModel& m) {
    return m.gaussian_part + m.levy_measure_second_moment;
}

// ------------------------------ paths ---------------------------------------

struct PathGrid {
    double t_max = 1.0;
    int n_steps = 1;

    double dt() const { return t_max / n_steps; }
    double time(int k) const { return k * dt(); }
};

struct Jump {
    double time = 0.0;
    double size = 0.0;
};

// A sampled driver realization. Jump kinds carry exact jump records, so the
// path can be evaluated exactly at arbitrary times; diffusion paths are only
// defined at grid times.
struct LevyPath {
    PathGrid grid;
    std::vector<double> values;       // at grid times, values[0] = 0
    std::vector<Jump> jumps;          // exact jump times/sizes, ascending
    std::vector<double> jump_prefix;  // running sum of jump sizes
    double linear_slope = 0.0;        // deterministic drift rate
    bool has_diffusion = false;

    // sum of jump sizes up to and including time t
    double jump_sum_upto(double t) const {
        // first jump with time > t
        auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                                   [](double v, const Jump& j) { return v < j.time; });
        if (it == jumps.begin()) return 0.0;
        return jump_prefix[static_cast<std::size_t>(it - jumps.begin()) - 1];
    }

    // sum of jump sizes strictly before time t
    double jump_sum_before(double t) const {
        auto it = std::lower_bound(jumps.begin(), jumps.end(), t,
                                   [](const Jump& j, double v) { return j.time < v; });
        if (it == jumps.begin()) return 0.0;
        return jump_prefix[static_cast<std::size_t>(it - jumps.begin()) - 1];
    }

    // X_t. Exact for jump kinds; diffusion paths require t aligned with the
    // sampling grid.
    double value_at(double t) const {
        if (has_diffusion) {
            const double k_real = t / grid.dt();
            const auto k = static_cast<long long>(std::llround(k_real));
            if (std::abs(k_real - static_cast<double>(k)) > 1e-9 * std::max(1.0, std::abs(k_real)) ||
                k < 0 || k >= static_cast<long long>(values.size()))
                throw std::invalid_argument("diffusion path evaluated off its sampling grid");
            return values[static_cast<std::size_t>(k)];
        }
        return jump_sum_upto(t) + linear_slope * t;
    }

    // X_{t-}: for jump kinds the jump at exactly t is excluded
    double left_value_at(double t) const {
        if (has_diffusion) return value_at(t); // continuous
        return jump_sum_before(t) + linear_slope * t;
    }

    // smallest gap between consecutive jumps (infinity with fewer than 2)
    double min_jump_gap() const {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < jumps.size(); ++i)
            gap = std::min(gap, jumps[i].time - jumps[i - 1].time);
        return gap;
    }
};

// Exact-in-law sampling: Gaussian increments for Brownian kinds, exponential
// inter-arrival clocks with exact jump records for jump kinds. Deterministic
// given (model, grid, seed, stream).
inline LevyPath sample_path_stream(const LevyModel& m, const PathGrid& grid,
                                   std::uint64_t seed, std::uint64_t stream_a,
                                   std::uint64_t stream_b) {
    if (grid.n_steps < 1 || !(grid.t_max > 0.0))
        throw std::invalid_argument("path grid needs t_max > 0 and n_steps >= 1");
    Rng rng(seed, stream_a, stream_b);
    LevyPath path;
    path.grid = grid;
    path.values.assign(static_cast<std::size_t>(grid.n_steps) + 1, 0.0);
    path.linear_slope = m.slope_adjust;

    switch (m.kind) {
        case LevyKind::Brownian: {
            path.has_diffusion = true;
            const double dt = grid.dt();
            const double sdt = m.volatility * std::sqrt(dt);
            const double drift = m.slope_adjust * dt;
            for (int k = 0; k < grid.n_steps; ++k)
                path.values[static_cast<std::size_t>(k) + 1] =
                    path.values[static_cast<std::size_t>(k)] + sdt * rng.normal() + drift;
            return path;
        }
        case LevyKind::Poisson:
        case LevyKind::CompoundPoissonNormal: {
            double t = rng.exponential(m.intensity);
            double prefix = 0.0;
            while (t <= grid.t_max) {
                const double size = (m.kind == LevyKind::Poisson)
                                        ? 1.0
                                        : m.jump_mean + m.jump_std * rng.normal();
                prefix += size;
                path.jumps.push_back({t, size});
                path.jump_prefix.push_back(prefix);
                t += rng.exponential(m.intensity);
            }
            std::size_t j = 0;
            double sum = 0.0;
            for (int k = 0; k <= grid.n_steps; ++k) {
                const double tk = grid.time(k);
                while (j < path.jumps.size() && path.jumps[j].time <= tk)
                    sum += path.jumps[j++].size;
                path.values[static_cast<std::size_t>(k)] = sum + m.slope_adjust * tk;
            }
            return path;
        }
        case LevyKind::ParametricJump:
            throw UnsupportedOperation(
                "path sampling is not supported for parametric jump families (cumulants only)");
    }
    return path;
}

inline LevyPath sample_path(const LevyModel& m, const PathGrid& grid, std::uint64_t seed) {
    return sample_path_stream(m, grid, seed, 0, 0);
}

} // namespace hjmm
