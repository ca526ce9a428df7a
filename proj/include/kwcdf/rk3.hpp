#pragma once

#include <array>
#include <cstddef>

namespace kwcdf {

/// One step of the three-stage TVD Runge-Kutta scheme, written as convex
/// combinations of Euler steps, for dy/ds = f(y, s). `h` may be negative
/// (backward integration).
template <std::size_t N, class Rhs>
std::array<double, N> tvd_rk3(const std::array<double, N>& y, double s, double h, Rhs&& f) {
    std::array<double, N> y1{};
    std::array<double, N> y2{};
    std::array<double, N> out{};

    const std::array<double, N> f0 = f(y, s);
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h * f0[i];

    const std::array<double, N> f1 = f(y1, s + h);
    for (std::size_t i = 0; i < N; ++i) y2[i] = 0.75 * y[i] + 0.25 * y1[i] + 0.25 * h * f1[i];

    const std::array<double, N> f2 = f(y2, s + 0.5 * h);
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] / 3.0 + 2.0 / 3.0 * y2[i] + 2.0 / 3.0 * h * f2[i];
    return out;
}

}  // namespace kwcdf
