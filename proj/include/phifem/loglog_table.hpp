#pragma once

#include "phifem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace phifem {

// Tabulation of a positive, strictly increasing function f on a log-spaced
// grid, stored as (x, y, s) = (ln t, ln f(t), d ln f / d ln t).  Evaluation
// uses cubic Hermite interpolation in log-log coordinates, which is exact for
// pure power laws and fourth-order accurate otherwise.  Outside the table the
// function is continued as a power law with the boundary exponent; since the
// tabulated functions approach power behaviour at both ends, the tails stay
// accurate far beyond the knot range.
class LogLogTable {
public:
    LogLogTable() = default;
    LogLogTable(std::vector<double> x, std::vector<double> y,
                std::vector<double> slope)
        : x_(std::move(x)), y_(std::move(y)), s_(std::move(slope)) {
        if (x_.size() < 2 || x_.size() != y_.size() || x_.size() != s_.size()) {
            throw Error("log-log table needs at least two consistent knots");
        }
        for (std::size_t i = 1; i < x_.size(); ++i) {
            if (!(x_[i] > x_[i - 1]) || !(y_[i] > y_[i - 1])) {
                throw Error("log-log table knots must be strictly increasing");
            }
        }
    }

    bool valid() const { return x_.size() >= 2; }
    std::size_t size() const { return x_.size(); }

    double t_min() const { return std::exp(x_.front()); }
    double t_max() const { return std::exp(x_.back()); }
    double f_min() const { return std::exp(y_.front()); }
    double f_max() const { return std::exp(y_.back()); }

    // f(t) for t > 0.
    double value(double t) const { return std::exp(value_log(std::log(t))); }

    // f^{-1}(w) for w > 0 (f is strictly increasing).
    double inverse(double w) const {
        return std::exp(inverse_log(std::log(w)));
    }

    // ln f as a function of ln t.
    double value_log(double lx) const {
        if (lx <= x_.front()) {
            return y_.front() + s_.front() * (lx - x_.front());
        }
        if (lx >= x_.back()) {
            return y_.back() + s_.back() * (lx - x_.back());
        }
        const std::size_t k = panel(lx);
        double dummy;
        return hermite(k, lx, dummy);
    }

    // ln f^{-1} as a function of ln w.
    double inverse_log(double lw) const {
        if (lw <= y_.front()) {
            return x_.front() + (lw - y_.front()) / s_.front();
        }
        if (lw >= y_.back()) {
            return x_.back() + (lw - y_.back()) / s_.back();
        }
        // Locate the knot panel in y, then solve the cubic by safeguarded
        // Newton in x.
        const std::size_t k =
            static_cast<std::size_t>(
                std::upper_bound(y_.begin(), y_.end(), lw) - y_.begin()) -
            1;
        double lo = x_[k];
        double hi = x_[k + 1];
        const double frac = (lw - y_[k]) / (y_[k + 1] - y_[k]);
        double lx = lo + frac * (hi - lo);
        for (int it = 0; it < 100; ++it) {
            double deriv;
            const double val = hermite(k, lx, deriv) - lw;
            if (val > 0.0) {
                hi = lx;
            } else {
                lo = lx;
            }
            double step = (deriv > 0.0) ? val / deriv : 0.0;
            double next = lx - step;
            if (!(next > lo && next < hi)) {
                next = 0.5 * (lo + hi);
            }
            if (std::fabs(next - lx) <= 1e-15 * (1.0 + std::fabs(lx))) {
                return next;
            }
            lx = next;
        }
        return lx;
    }

private:
    std::vector<double> x_, y_, s_;

    std::size_t panel(double lx) const {
        const std::size_t k =
            static_cast<std::size_t>(
                std::upper_bound(x_.begin(), x_.end(), lx) - x_.begin()) -
            1;
        return std::min(k, x_.size() - 2);
    }

    // Cubic Hermite on panel k; also reports the derivative d(ln f)/d(ln t).
    double hermite(std::size_t k, double lx, double &deriv) const {
        const double h = x_[k + 1] - x_[k];
        const double u = (lx - x_[k]) / h;
        const double u2 = u * u;
        const double u3 = u2 * u;
        const double h00 = 2 * u3 - 3 * u2 + 1;
        const double h10 = u3 - 2 * u2 + u;
        const double h01 = -2 * u3 + 3 * u2;
        const double h11 = u3 - u2;
        const double val = h00 * y_[k] + h01 * y_[k + 1] +
                           h * (h10 * s_[k] + h11 * s_[k + 1]);
        const double d00 = 6 * u2 - 6 * u;
        const double d10 = 3 * u2 - 4 * u + 1;
        const double d01 = -d00;
        const double d11 = 3 * u2 - 2 * u;
        deriv = (d00 * y_[k] + d01 * y_[k + 1]) / h + d10 * s_[k] +
                d11 * s_[k + 1];
        return val;
    }
};

} // namespace phifem
