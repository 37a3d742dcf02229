#pragma once

// Small dense-grid numerics used across the library: composite trapezoid rules,
// finite-difference derivative stencils on uniform grids, and local cubic
// (4-point Lagrange) interpolation of sampled functions.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "charflow/errors.hpp"

namespace charflow::num {

// Validates that params is ascending, starts at start0, and is uniformly
// spaced to relative tolerance; returns the spacing.
inline double uniform_spacing(std::span<const double> params, double rel_tol = 1e-9) {
    if (params.size() < 2) throw ConfigError("need at least 2 sample points");
    const double dx = (params.back() - params.front()) / double(params.size() - 1);
    if (!(dx > 0.0)) throw ConfigError("sample grid must be strictly ascending");
    for (std::size_t k = 0; k + 1 < params.size(); ++k) {
        const double step = params[k + 1] - params[k];
        if (std::abs(step - dx) > rel_tol * std::abs(dx))
            throw ConfigError("sample grid must be uniform");
    }
    return dx;
}

inline double trapz(std::span<const double> y, double dx) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (std::size_t k = 1; k + 1 < y.size(); ++k) s += y[k];
    return s * dx;
}

// Cumulative composite trapezoid; out[0] = 0.
inline void cumtrapz(std::span<const double> y, double dx, std::span<double> out) {
    out[0] = 0.0;
    for (std::size_t k = 1; k < y.size(); ++k)
        out[k] = out[k - 1] + 0.5 * dx * (y[k - 1] + y[k]);
}

inline std::vector<double> cumtrapz(std::span<const double> y, double dx) {
    std::vector<double> out(y.size());
    cumtrapz(y, dx, out);
    return out;
}

// Second-order first derivative: centered interior, one-sided at the ends.
inline void derivative2(std::span<const double> y, double dx, std::span<double> out) {
    const std::size_t n = y.size();
    if (n < 3) throw ConfigError("derivative2 needs >= 3 points");
    out[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dx);
    for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (y[k + 1] - y[k - 1]) / (2.0 * dx);
    out[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * dx);
}

inline std::vector<double> derivative2(std::span<const double> y, double dx) {
    std::vector<double> out(y.size());
    derivative2(y, dx, out);
    return out;
}

// Fourth-order first derivative on a uniform grid (5-point stencils).
inline std::vector<double> derivative4(std::span<const double> y, double dx) {
    const std::size_t n = y.size();
    if (n < 5) throw ConfigError("derivative4 needs >= 5 points");
    std::vector<double> out(n);
    const double c = 1.0 / (12.0 * dx);
    out[0] = c * (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]);
    out[1] = c * (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]);
    for (std::size_t k = 2; k + 2 < n; ++k)
        out[k] = c * (y[k - 2] - 8.0 * y[k - 1] + 8.0 * y[k + 1] - y[k + 2]);
    out[n - 2] = -c * (-3.0 * y[n - 1] - 10.0 * y[n - 2] + 18.0 * y[n - 3] - 6.0 * y[n - 4] + y[n - 5]);
    out[n - 1] = -c * (-25.0 * y[n - 1] + 48.0 * y[n - 2] - 36.0 * y[n - 3] + 16.0 * y[n - 4] - 3.0 * y[n - 5]);
    return out;
}

// Local 4-point Lagrange interpolation of samples y on the uniform grid
// x_k = x0 + k*dx. Exact for cubic polynomials; used for off-grid evaluation
// of sampled free data (e.g. RK4 half-steps).
inline double lagrange_cubic(std::span<const double> y, double x0, double dx, double x) {
    const std::ptrdiff_t n = std::ptrdiff_t(y.size());
    if (n < 4) throw ConfigError("lagrange_cubic needs >= 4 points");
    const double s = (x - x0) / dx;
    std::ptrdiff_t k = std::ptrdiff_t(std::floor(s));
    std::ptrdiff_t lo = k - 1;
    if (lo < 0) lo = 0;
    if (lo > n - 4) lo = n - 4;
    const double t = s - double(lo);  // position relative to the stencil start, in grid units
    const double t0 = t, t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
    const double w0 = -t1 * t2 * t3 / 6.0;
    const double w1 = t0 * t2 * t3 / 2.0;
    const double w2 = -t0 * t1 * t3 / 2.0;
    const double w3 = t0 * t1 * t2 / 6.0;
    return w0 * y[lo] + w1 * y[lo + 1] + w2 * y[lo + 2] + w3 * y[lo + 3];
}

// Classic RK4 step for a small fixed-size system y' = f(x, y).
template <std::size_t N, class F>
std::array<double, N> rk4_step(F&& f, double x, const std::array<double, N>& y, double dx) {
    std::array<double, N> k1 = f(x, y);
    std::array<double, N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dx * k1[i];
    std::array<double, N> k2 = f(x + 0.5 * dx, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dx * k2[i];
    std::array<double, N> k3 = f(x + 0.5 * dx, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dx * k3[i];
    std::array<double, N> k4 = f(x + dx, tmp);
    std::array<double, N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + dx / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

}  // namespace charflow::num
