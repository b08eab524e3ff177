#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace floq {

// Composite Simpson rule on [a, b] with `cells` subintervals, each sampled at
// its endpoints and midpoint.
template <class F>
double integrate_simpson(F&& f, double a, double b, int cells) {
    if (cells < 1) throw std::invalid_argument("integrate_simpson: cells < 1");
    const double w = (b - a) / cells;
    double acc = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double x0 = a + w * c;
        const double x1 = a + w * (c + 1);
        const double xm = 0.5 * (x0 + x1);
        acc += (w / 6.0) * (f(x0) + 4.0 * f(xm) + f(x1));
    }
    return acc;
}

// Simpson value plus a conservative error estimate obtained by comparing with
// the doubled-resolution result.
template <class F>
std::pair<double, double> integrate_simpson_with_error(F&& f, double a, double b, int cells) {
    const double coarse = integrate_simpson(f, a, b, cells);
    const double fine = integrate_simpson(f, a, b, 2 * cells);
    return {fine, std::abs(fine - coarse) + 1e-14 * std::abs(fine)};
}

// Cumulative integral of f on [0, len] sampled at `per_unit * len + 1`
// uniformly spaced nodes; entry q holds the integral over [0, q/per_unit].
template <class F>
std::vector<double> cumulative_integral(F&& f, double len, int per_unit) {
    const int n = static_cast<int>(std::lround(len * per_unit));
    std::vector<double> table(n + 1, 0.0);
    const double w = len / n;
    for (int q = 0; q < n; ++q) {
        const double x0 = w * q;
        const double x1 = w * (q + 1);
        const double xm = 0.5 * (x0 + x1);
        table[q + 1] = table[q] + (w / 6.0) * (f(x0) + 4.0 * f(xm) + f(x1));
    }
    return table;
}

// Trapezoid rule over uniformly spaced samples spanning an interval of length `len`.
inline double trapezoid(const std::vector<double>& samples, double len) {
    if (samples.size() < 2) return 0.0;
    const double w = len / static_cast<double>(samples.size() - 1);
    double acc = 0.5 * (samples.front() + samples.back());
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) acc += samples[i];
    return acc * w;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_line: need two samples of equal length");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

}  // namespace floq
