#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hjmm/curve.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/levy.hpp"
#include "hjmm/spaces.hpp"

namespace hjmm {

// running integral T sigma(x) = int_0^x sigma(u) du by trapezoid prefix; the
// tail keeps the last value, which is only faithful when sigma decays to 0
inline ForwardCurve primitive(const ForwardCurve& sigma) {
    ForwardCurve out = sigma;
    const double dx = sigma.dx();
    out.values[0] = 0.0;
    for (int i = 1; i <= sigma.n_points; ++i)
        out.values[static_cast<std::size_t>(i)] =
            out.values[static_cast<std::size_t>(i) - 1] +
            0.5 * dx * (sigma.values[static_cast<std::size_t>(i) - 1] +
                        sigma.values[static_cast<std::size_t>(i)]);
    out.tail_value = out.values.back();
    return out;
}

struct AdmissibilityReport {
    double lo = 0.0;               // smallest -T sigma over grid nodes
    double hi = 0.0;               // largest -T sigma over grid nodes
    double tail_slope_limit = 0.0; // limit of -T sigma at infinity; +-inf when the
                                   // volatility does not vanish past the grid
    bool contained = false;        // grid range inside [c, d]
    double worst_x = 0.0;          // node with the largest excursion from [c, d]
};

// checks -T sigma against the band [c, d] on which the cumulant derivatives
// are controlled
inline AdmissibilityReport admissible(const ForwardCurve& sigma, double c, double d) {
    if (!(c < d)) throw std::invalid_argument("admissibility band needs c < d");
    const auto T = primitive(sigma);
    AdmissibilityReport rep;
    rep.lo = std::numeric_limits<double>::infinity();
    rep.hi = -std::numeric_limits<double>::infinity();
    double worst_excess = -1.0;
    for (int i = 0; i <= sigma.n_points; ++i) {
        const double m = -T.values[static_cast<std::size_t>(i)];
        rep.lo = std::min(rep.lo, m);
        rep.hi = std::max(rep.hi, m);
        const double excess = std::max(c - m, m - d);
        if (excess > worst_excess) {
            worst_excess = excess;
            rep.worst_x = sigma.x(i);
        }
    }
    if (sigma.tail_value > 0.0)
        rep.tail_slope_limit = -std::numeric_limits<double>::infinity();
    else if (sigma.tail_value < 0.0)
        rep.tail_slope_limit = std::numeric_limits<double>::infinity();
    else
        rep.tail_slope_limit = -T.values.back();
    rep.contained = rep.lo >= c && rep.hi <= d;
    return rep;
}

struct DriftResult {
    ForwardCurve alpha;
    int clamped_nodes = 0;
};

// No-arbitrage drift alpha(x) = -sum_i sigma_i(x) Psi_i'(-T sigma_i(x)),
// equivalently d/dx sum_i Psi_i(-T sigma_i(x)). Each -T sigma_i must stay in
// the driver's working interval; with clamp the argument is pinned to the
// band instead and the pinned nodes are counted.
inline DriftResult hjm_drift(const std::vector<ForwardCurve>& sigmas,
                             const std::vector<LevyModel>& models, bool clamp = false) {
    if (sigmas.empty() || sigmas.size() != models.size())
        throw std::invalid_argument("need one volatility curve per driver");
    for (const auto& s : sigmas)
        if (s.n_points != sigmas[0].n_points || s.x_max != sigmas[0].x_max)
            throw std::invalid_argument("volatility curves must share one grid");

    DriftResult out;
    out.alpha = sigmas[0];
    std::fill(out.alpha.values.begin(), out.alpha.values.end(), 0.0);
    out.alpha.tail_value = 0.0;

    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const auto& sigma = sigmas[i];
        const auto& m = models[i];
        const double c = m.working_interval.lo;
        const double d = m.working_interval.hi;
        if (!clamp) {
            const auto rep = admissible(sigma, c, d);
            if (!rep.contained)
                throw InadmissibleVolatility(
                    "driver " + std::to_string(i) + ": -T sigma reaches [" +
                    std::to_string(rep.lo) + "," + std::to_string(rep.hi) +
                    "], outside the working interval [" + std::to_string(c) + "," +
                    std::to_string(d) + "] near x = " + std::to_string(rep.worst_x));
        }
        const auto T = primitive(sigma);
        for (int k = 0; k <= sigma.n_points; ++k) {
            double z = -T.values[static_cast<std::size_t>(k)];
            if (clamp) {
                const double pinned = std::clamp(z, c, d);
                if (pinned != z) ++out.clamped_nodes;
                z = pinned;
            }
            out.alpha.values[static_cast<std::size_t>(k)] -=
                sigma.values[static_cast<std::size_t>(k)] * cumulant(m, z, 1);
        }
        if (sigma.tail_value != 0.0) {
            const double z = std::clamp(-T.tail_value, c, d);
            out.alpha.tail_value -= sigma.tail_value * cumulant(m, z, 1);
        }
    }
    return out;
}

struct ConsistencyReport {
    double max_discrepancy = 0.0; // between the product form and the
                                  // derivative form at interior nodes
    double dx = 0.0;
};

// The drift equals d/dx of the summed cumulants along -T sigma; a central
// difference of that potential must agree with the product form to second
// order in the grid spacing.
inline ConsistencyReport drift_consistency(const std::vector<ForwardCurve>& sigmas,
                                           const std::vector<LevyModel>& models) {
    const auto drift = hjm_drift(sigmas, models);
    const auto& alpha = drift.alpha;
    const int n = alpha.n_points;
    std::vector<double> potential(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        const auto T = primitive(sigmas[i]);
        for (int k = 0; k <= n; ++k)
            potential[static_cast<std::size_t>(k)] +=
                cumulant(models[i], -T.values[static_cast<std::size_t>(k)], 0);
    }
    ConsistencyReport rep;
    rep.dx = alpha.dx();
    for (int k = 1; k < n; ++k) {
        const double fd = (potential[static_cast<std::size_t>(k) + 1] -
                           potential[static_cast<std::size_t>(k) - 1]) /
                          (2.0 * rep.dx);
        rep.max_discrepancy =
            std::max(rep.max_discrepancy,
                     std::abs(fd - alpha.values[static_cast<std::size_t>(k)]));
    }
    return rep;
}

struct DerivativeBounds {
    double k1 = 0.0; // sup |Psi'|   on the working interval
    double k2 = 0.0; // sup |Psi''|
    double k3 = 0.0; // sup |Psi'''|
};

// bounds taken on a 1000-point inclusive grid over the working interval
inline DerivativeBounds cumulant_derivative_bounds(const LevyModel& m) {
    DerivativeBounds b;
    const double c = m.working_interval.lo;
    const double d = m.working_interval.hi;
    const int n = 1000;
    for (int j = 0; j < n; ++j) {
        const double z = c + (d - c) * j / (n - 1);
        b.k1 = std::max(b.k1, std::abs(cumulant(m, z, 1)));
        b.k2 = std::max(b.k2, std::abs(cumulant(m, z, 2)));
        b.k3 = std::max(b.k3, std::abs(cumulant(m, z, 3)));
    }
    return b;
}

// Lipschitz constant of the drift map on the weighted space: with n drivers,
// 2 sqrt(n) max_i sqrt(K_i^2 + (C3^2 + 4 C4) L_i^2 + C3^2 C4 M_i^2)
inline double drift_lipschitz_constant(const std::vector<LevyModel>& models,
                                       const WeightSpec& w) {
    if (models.empty()) throw std::invalid_argument("need at least one driver");
    const auto c = embedding_constants(w);
    double worst = 0.0;
    for (const auto& m : models) {
        const auto b = cumulant_derivative_bounds(m);
        worst = std::max(worst, b.k1 * b.k1 + (c.c3 * c.c3 + 4.0 * c.c4) * b.k2 * b.k2 +
                                    c.c3 * c.c3 * c.c4 * b.k3 * b.k3);
    }
    return 2.0 * std::sqrt(static_cast<double>(models.size())) * std::sqrt(worst);
}

struct DriftLipschitzCheck {
    double lhs = 0.0;    // || alpha(g) - alpha(h) ||_w
    double rhs = 0.0;    // constant * scale^2 * sqrt(sum || g_i - h_i ||^2)
    double ratio = 0.0;  // lhs / rhs
};

// Verifies the Lipschitz bound of the drift map between two volatility
// families in the weighted space with the tail-anchored norm.
inline DriftLipschitzCheck verify_drift_lipschitz(const std::vector<LevyModel>& models,
                                                  const std::vector<ForwardCurve>& g,
                                                  const std::vector<ForwardCurve>& h,
                                                  const WeightSpec& w) {
    if (g.size() != models.size() || h.size() != models.size())
        throw std::invalid_argument("need one curve per driver on each side");
    const auto drift_g = hjm_drift(g, models);
    const auto drift_h = hjm_drift(h, models);
    ForwardCurve diff = drift_g.alpha;
    for (int k = 0; k <= diff.n_points; ++k)
        diff.values[static_cast<std::size_t>(k)] -=
            drift_h.alpha.values[static_cast<std::size_t>(k)];
    diff.tail_value -= drift_h.alpha.tail_value;

    double scale = 1.0;
    double delta_sq = 0.0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const double ng = norm_w(g[i], w, NormVariant::Tehranchi, 1.0).value;
        const double nh = norm_w(h[i], w, NormVariant::Tehranchi, 1.0).value;
        scale = std::max({scale, ng, nh});
        ForwardCurve d = g[i];
        for (int k = 0; k <= d.n_points; ++k)
            d.values[static_cast<std::size_t>(k)] -= h[i].values[static_cast<std::size_t>(k)];
        d.tail_value -= h[i].tail_value;
        const double nd = norm_w(d, w, NormVariant::Tehranchi, 1.0).value;
        delta_sq += nd * nd;
    }
    DriftLipschitzCheck chk;
    chk.lhs = norm_w(diff, w, NormVariant::Tehranchi, 1.0).value;
    chk.rhs = drift_lipschitz_constant(models, w) * scale * scale * std::sqrt(delta_sq);
    chk.ratio = chk.rhs > 0.0 ? chk.lhs / chk.rhs : 0.0;
    if (chk.lhs > chk.rhs * (1.0 + 1e-9))
        throw ViolationDetected("drift Lipschitz bound violated: " + std::to_string(chk.lhs) +
                                " > " + std::to_string(chk.rhs));
    return chk;
}

} // namespace hjmm
