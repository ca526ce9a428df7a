#include "kwcdf/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "kwcdf/errors.hpp"
#include "kwcdf/rk3.hpp"

namespace kwcdf {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double domain_lo = 0.0;
constexpr double domain_hi = 2.0;
constexpr int scan_points = 512;

}  // namespace

std::optional<double> ShockTrajectory::position(double t) const {
    if (times.empty() || t < times.front()) return std::nullopt;
    if (t >= times.back()) return positions.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto i = static_cast<std::size_t>(it - times.begin()) - 1;
    const double w = (t - times[i]) / (times[i + 1] - times[i]);
    return (1.0 - w) * positions[i] + w * positions[i + 1];
}

BurgersCharacteristics::BurgersCharacteristics(double z) : z_(z) {
    if (!(z > 0.0)) throw DomainError(fmt::format("Burgers amplitude must be positive, got {}", z));
    // dX/dx0 = 1 + 2 pi z t cos(pi x0) first vanishes at x0 = 1.
    t_break_ = 1.0 / (2.0 * pi * z);
    x0_break_ = 1.0;
}

double BurgersCharacteristics::k0(double x0) const { return z_ * std::sin(pi * x0); }

double BurgersCharacteristics::invert(double x, double t, double lo, double hi) const {
    auto f = [&](double x0) { return x0 + 2.0 * k0(x0) * t - x; };
    double flo = f(lo);
    if (flo > 0.0 || f(hi) < 0.0)
        throw NumericError(fmt::format("characteristic inversion failed to bracket x={} at t={} in [{}, {}]", x, t,
                                       lo, hi));
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm <= 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double BurgersCharacteristics::foot_left(double x_s, double t) const {
    auto f = [&](double x0) { return x0 + 2.0 * k0(x0) * t - x_s; };
    const double h = (x0_break_ - domain_lo) / scan_points;
    double prev = domain_lo;
    for (int i = 1; i <= scan_points; ++i) {
        const double cur = i == scan_points ? x0_break_ : domain_lo + h * i;
        if (f(cur) >= 0.0) return invert(x_s, t, prev, cur);
        prev = cur;
    }
    throw NumericError(fmt::format("left shock state failed to bracket at x_s={}, t={}", x_s, t));
}

double BurgersCharacteristics::foot_right(double x_s, double t) const {
    auto f = [&](double x0) { return x0 + 2.0 * k0(x0) * t - x_s; };
    const double h = (domain_hi - x0_break_) / scan_points;
    double prev = domain_hi;
    for (int i = 1; i <= scan_points; ++i) {
        const double cur = i == scan_points ? x0_break_ : domain_hi - h * i;
        if (f(cur) <= 0.0) return invert(x_s, t, cur, prev);
        prev = cur;
    }
    throw NumericError(fmt::format("right shock state failed to bracket at x_s={}, t={}", x_s, t));
}

std::pair<double, double> BurgersCharacteristics::shock_states(double x_s, double t) const {
    return {k0(foot_left(x_s, t)), k0(foot_right(x_s, t))};
}

ShockTrajectory BurgersCharacteristics::shock_trajectory(double t_final, double dt) const {
    if (!(dt > 0.0)) throw DomainError(fmt::format("shock time step must be positive, got {}", dt));
    ShockTrajectory out;
    out.t_break = t_break_;
    out.x_break = x0_break_;
    if (t_final <= t_break_) return out;

    auto rhs = [&](const std::array<double, 1>& y, double t) {
        const auto [kl, kr] = shock_states(y[0], t);
        return std::array<double, 1>{kl + kr};
    };
    double t = t_break_;
    std::array<double, 1> y{x0_break_};
    out.times.push_back(t);
    out.positions.push_back(y[0]);
    while (t < t_final) {
        const double h = std::min(dt, t_final - t);
        y = tvd_rk3(y, t, h, rhs);
        t = h == t_final - t ? t_final : t + h;
        out.times.push_back(t);
        out.positions.push_back(y[0]);
    }
    return out;
}

double BurgersCharacteristics::state(double x, double t, const ShockTrajectory& shock) const {
    const std::optional<double> x_s = t > t_break_ ? shock.position(t) : std::nullopt;
    if (!x_s) return k0(invert(x, t, domain_lo, domain_hi));
    if (x <= *x_s) return k0(invert(x, t, domain_lo, foot_left(*x_s, t)));
    return k0(invert(x, t, foot_right(*x_s, t), domain_hi));
}

ShockTrajectory burgers_shock_ode(const Realization& realization, double t_final, double dt) {
    return BurgersCharacteristics(realization.scalar("z")).shock_trajectory(t_final, dt);
}

double burgers_state(const Realization& realization, double x, double t, double dt) {
    const BurgersCharacteristics bc(realization.scalar("z"));
    const double xp = x - 2.0 * std::floor(x / 2.0);
    return bc.state(xp, t, bc.shock_trajectory(t, dt));
}

std::uint8_t evaluate_pi_burgers(const Realization& realization, const CharPoint& query, double dt) {
    return query.K - burgers_state(realization, query.x[0], query.t, dt) >= 0.0 ? 1 : 0;
}

}  // namespace kwcdf
