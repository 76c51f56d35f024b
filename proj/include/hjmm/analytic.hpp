#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hjmm/errors.hpp"

namespace hjmm {

// One closed-form building block: coeff * x^power * exp(rate*x).
struct AnalyticTerm {
    double coeff = 0.0;
    int power = 0;
    double rate = 0.0;
};

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double b = 1.0;
    for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
    return b;
}

} // namespace detail

// Finite sum of terms x^k e^{rho x}, closed under differentiation, products
// and antiderivatives. Every integral below is exact, which is what the norm
// series, the drift primitives and the bond reconstruction lean on.
class AnalyticCurve {
public:
    AnalyticCurve() = default;

    explicit AnalyticCurve(std::vector<AnalyticTerm> terms) : terms_(std::move(terms)) {
        consolidate();
    }

    static AnalyticCurve constant(double v) {
        return AnalyticCurve({{v, 0, 0.0}});
    }

    // coeffs[k] multiplies x^k
    static AnalyticCurve polynomial(const std::vector<double>& coeffs) {
        std::vector<AnalyticTerm> t;
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            t.push_back({coeffs[k], static_cast<int>(k), 0.0});
        return AnalyticCurve(std::move(t));
    }

    static AnalyticCurve exponential(double scale, double rate) {
        return AnalyticCurve({{scale, 0, rate}});
    }

    // scale * (e^{rate x} - 1); vanishes at the origin
    static AnalyticCurve shifted_exponential(double scale, double rate) {
        return AnalyticCurve({{scale, 0, rate}, {-scale, 0, 0.0}});
    }

    const std::vector<AnalyticTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    double operator()(double x) const {
        double v = 0.0;
        for (const auto& t : terms_) v += t.coeff * std::pow(x, t.power) * std::exp(t.rate * x);
        return v;
    }

    AnalyticCurve derivative() const {
        std::vector<AnalyticTerm> out;
        out.reserve(2 * terms_.size());
        for (const auto& t : terms_) {
            if (t.power > 0) out.push_back({t.coeff * t.power, t.power - 1, t.rate});
            if (t.rate != 0.0) out.push_back({t.coeff * t.rate, t.power, t.rate});
        }
        return AnalyticCurve(std::move(out));
    }

    // F(x) = integral of the curve over [0, x], so F(0) = 0
    AnalyticCurve antiderivative() const {
        std::vector<AnalyticTerm> out;
        for (const auto& t : terms_) {
            if (t.rate == 0.0) {
                out.push_back({t.coeff / (t.power + 1), t.power + 1, 0.0});
                continue;
            }
            // repeated integration by parts of x^k e^{rho x}
            double c = t.coeff / t.rate;
            double at_zero = 0.0;
            for (int j = t.power; j >= 0; --j) {
                out.push_back({c, j, t.rate});
                if (j == 0) at_zero += c;
                c *= -static_cast<double>(j) / t.rate;
            }
            out.push_back({-at_zero, 0, 0.0});
        }
        return AnalyticCurve(std::move(out));
    }

    AnalyticCurve operator+(const AnalyticCurve& o) const {
        std::vector<AnalyticTerm> out = terms_;
        out.insert(out.end(), o.terms_.begin(), o.terms_.end());
        return AnalyticCurve(std::move(out));
    }

    AnalyticCurve operator-(const AnalyticCurve& o) const {
        std::vector<AnalyticTerm> out = terms_;
        for (const auto& t : o.terms_) out.push_back({-t.coeff, t.power, t.rate});
        return AnalyticCurve(std::move(out));
    }

    AnalyticCurve scaled(double a) const {
        std::vector<AnalyticTerm> out = terms_;
        for (auto& t : out) t.coeff *= a;
        return AnalyticCurve(std::move(out));
    }

    // the curve x -> h(x + t), expanded back into the same term family
    AnalyticCurve shifted(double t) const {
        if (t < 0.0) throw std::invalid_argument("curve shift must be nonnegative");
        std::vector<AnalyticTerm> out;
        for (const auto& term : terms_) {
            const double base = term.coeff * std::exp(term.rate * t);
            for (int j = 0; j <= term.power; ++j)
                out.push_back({base * detail::binomial(term.power, j) *
                                   std::pow(t, term.power - j),
                               j, term.rate});
        }
        return AnalyticCurve(std::move(out));
    }

    AnalyticCurve times(const AnalyticCurve& o) const {
        std::vector<AnalyticTerm> out;
        out.reserve(terms_.size() * o.terms_.size());
        for (const auto& a : terms_)
            for (const auto& b : o.terms_)
                out.push_back({a.coeff * b.coeff, a.power + b.power, a.rate + b.rate});
        return AnalyticCurve(std::move(out));
    }

    // limit at +infinity; +-inf when a growing term survives
    double tail_limit() const {
        double limit = 0.0;
        double growth_rate = -std::numeric_limits<double>::infinity();
        int growth_power = -1;
        double growth_coeff = 0.0;
        for (const auto& t : terms_) {
            if (t.coeff == 0.0) continue;
            if (t.rate < 0.0) continue;
            if (t.rate == 0.0 && t.power == 0) {
                limit += t.coeff;
                continue;
            }
            // growing term; the largest (rate, power) pair wins
            if (t.rate > growth_rate || (t.rate == growth_rate && t.power > growth_power)) {
                growth_rate = t.rate;
                growth_power = t.power;
                growth_coeff = t.coeff;
            }
        }
        if (growth_power >= 0)
            return growth_coeff > 0.0 ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
        return limit;
    }

    // integral over [0, inf) of curve(x) e^{-s x}; exact, term by term
    double weighted_integral(double s) const {
        double v = 0.0;
        for (const auto& t : terms_) {
            if (t.coeff == 0.0) continue;
            const double d = s - t.rate;
            if (!(d > 0.0))
                throw Divergent("weighted integral diverges: decay " + std::to_string(s) +
                                " does not dominate rate " + std::to_string(t.rate));
            v += t.coeff * detail::factorial(t.power) / std::pow(d, t.power + 1);
        }
        return v;
    }

    // integral over [0, inf) of curve(x)^2 e^{-s x}
    double weighted_square_integral(double s) const { return times(*this).weighted_integral(s); }

    // values at x_i = i * x_max / n_points, i = 0..n_points
    std::vector<double> sample(double x_max, int n_points) const {
        std::vector<double> v(static_cast<std::size_t>(n_points) + 1);
        for (int i = 0; i <= n_points; ++i)
            v[static_cast<std::size_t>(i)] = (*this)(x_max * i / n_points);
        return v;
    }

    int max_power() const {
        int p = 0;
        for (const auto& t : terms_) p = std::max(p, t.power);
        return p;
    }

    double max_abs_rate() const {
        double r = 0.0;
        for (const auto& t : terms_)
            if (t.coeff != 0.0) r = std::max(r, std::abs(t.rate));
        return r;
    }

private:
    void consolidate() {
        std::sort(terms_.begin(), terms_.end(), [](const AnalyticTerm& a, const AnalyticTerm& b) {
            if (a.rate != b.rate) return a.rate < b.rate;
            return a.power < b.power;
        });
        std::vector<AnalyticTerm> merged;
        for (const auto& t : terms_) {
            if (!merged.empty() && merged.back().rate == t.rate && merged.back().power == t.power)
                merged.back().coeff += t.coeff;
            else
                merged.push_back(t);
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const AnalyticTerm& t) { return t.coeff == 0.0; }),
                     merged.end());
        terms_ = std::move(merged);
    }

    std::vector<AnalyticTerm> terms_;
};

} // namespace hjmm
