#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "hjmm/analytic.hpp"
#include "hjmm/csv.hpp"
#include "hjmm/errors.hpp"

namespace hjmm {

// A forward curve sampled on the uniform grid x_i = i * x_max / n_points,
// flat at tail_value beyond the last node. n_points cells, n_points+1 values.
struct ForwardCurve {
    double x_max = 30.0;
    int n_points = 0;
    std::vector<double> values;
    double tail_value = 0.0;

    ForwardCurve() = default;

    ForwardCurve(double x_max_, int n_points_, std::vector<double> values_, double tail)
        : x_max(x_max_), n_points(n_points_), values(std::move(values_)), tail_value(tail) {
        if (n_points < 1 || !(x_max > 0.0))
            throw std::invalid_argument("curve grid needs x_max > 0 and n_points >= 1");
        if (values.size() != static_cast<std::size_t>(n_points) + 1)
            throw std::invalid_argument("curve needs n_points + 1 values");
    }

    static ForwardCurve from_analytic(const AnalyticCurve& h, double x_max, int n_points) {
        return ForwardCurve(x_max, n_points, h.sample(x_max, n_points), h.tail_limit());
    }

    double dx() const { return x_max / n_points; }
    double x(int i) const { return x_max * i / n_points; }

    // linear interpolation on the grid, flat extension past x_max
    double value_at(double xq) const {
        if (xq < 0.0) throw std::invalid_argument("curve evaluated at negative maturity");
        if (xq >= x_max) return xq == x_max ? values.back() : tail_value;
        const double pos = xq / dx();
        const int i = static_cast<int>(pos);
        const double frac = pos - i;
        return values[static_cast<std::size_t>(i)] * (1.0 - frac) +
               values[static_cast<std::size_t>(i) + 1] * frac;
    }

    // left translation by t: (S_t h)(x) = h(x + t). t must be a whole number
    // of grid cells; vacated nodes take the tail value.
    ForwardCurve shifted(double t) const {
        if (t < 0.0) throw std::invalid_argument("curve shift must be nonnegative");
        const auto k = static_cast<long long>(std::llround(t / dx()));
        if (std::abs(t - static_cast<double>(k) * dx()) > 1e-12 * std::max(1.0, std::abs(t)))
            throw NonAlignedShift("shift " + std::to_string(t) +
                                  " is not a whole number of grid cells of size " +
                                  std::to_string(dx()));
        ForwardCurve out = *this;
        for (int i = 0; i <= n_points; ++i) {
            const long long src = i + k;
            out.values[static_cast<std::size_t>(i)] =
                src <= n_points ? values[static_cast<std::size_t>(src)] : tail_value;
        }
        return out;
    }

    // trapezoid integral over [0, tau] with an exact partial last cell
    double integral_to(double tau) const {
        if (tau < 0.0) throw std::invalid_argument("integral bound must be nonnegative");
        if (tau > x_max * (1.0 + 1e-12))
            throw MaturityBeyondGrid("integral to " + std::to_string(tau) +
                                     " exceeds the curve grid extent " + std::to_string(x_max));
        const double h = dx();
        const double pos = std::min(tau, x_max) / h;
        const auto full = static_cast<int>(pos);
        double acc = 0.0;
        for (int i = 0; i < full; ++i)
            acc += 0.5 * (values[static_cast<std::size_t>(i)] + values[static_cast<std::size_t>(i) + 1]);
        acc *= h;
        const double frac = pos - full;
        if (frac > 0.0) {
            const double a = values[static_cast<std::size_t>(full)];
            const double b = values[static_cast<std::size_t>(full) + 1];
            const double end = a + (b - a) * frac;
            acc += 0.5 * (a + end) * frac * h;
        }
        return acc;
    }

    void write_csv(const std::string& path) const {
        CsvWriter w(path);
        w.comment("tail_value=" + format_double(tail_value));
        w.row({"x", "value"});
        for (int i = 0; i <= n_points; ++i)
            w.row({format_double(x(i)), format_double(values[static_cast<std::size_t>(i)])});
    }
};

inline ForwardCurve read_curve_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open curve file: " + path);
    std::string line;
    double tail = 0.0;
    bool have_tail = false;
    bool have_header = false;
    std::vector<double> xs, vals;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto eq = line.find("tail_value=");
            if (eq != std::string::npos) {
                tail = parse_double(line.substr(eq + 11));
                have_tail = true;
            }
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ScenarioError("curve file row needs exactly two fields: '" + line + "'");
        if (!have_header) {
            const bool plain = fields[0] == "x" && fields[1] == "value";
            const bool unit_tagged =
                fields[0] == "x_years" && fields[1] == "forward_rate_per_annum";
            if (!plain && !unit_tagged)
                throw ScenarioError("curve file must start with the header 'x,value' or "
                                    "'x_years,forward_rate_per_annum'");
            have_header = true;
            continue;
        }
        xs.push_back(parse_double(fields[0]));
        vals.push_back(parse_double(fields[1]));
    }
    if (!have_tail) throw ScenarioError("curve file is missing the '# tail_value=' line");
    if (!have_header || xs.size() < 2)
        throw ScenarioError("curve file needs a header and at least two rows");
    if (xs.front() != 0.0)
        throw ScenarioError("curve grid must start at x = 0");
    const double h = xs[1] - xs[0];
    if (!(h > 0.0)) throw ScenarioError("curve grid must be strictly increasing");
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double expect = h * static_cast<double>(i);
        if (std::abs(xs[i] - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
            throw ScenarioError("curve grid is not uniformly spaced near x = " +
                                std::to_string(xs[i]));
    }
    const auto n = static_cast<int>(xs.size()) - 1;
    return ForwardCurve(xs.back(), n, std::move(vals), tail);
}

} // namespace hjmm
