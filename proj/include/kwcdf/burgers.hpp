#pragma once

// Characteristics with shock fitting for k_t + (k^2)_x = 0 on a periodic
// domain. Characteristics are straight lines X(x0, t) = x0 + 2 k0(x0) t; after
// they cross, the shock moves with the Rankine-Hugoniot speed k_L + k_R.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kwcdf/characteristics.hpp"
#include "kwcdf/randfield.hpp"

namespace kwcdf {

struct ShockTrajectory {
    double t_break = 0.0;
    double x_break = 0.0;
    std::vector<double> times;
    std::vector<double> positions;

    /// Shock position at t, linear between integration nodes; nullopt before breaking.
    std::optional<double> position(double t) const;
};

/// Scalar Burgers solution from one realization's initial profile
/// k0(x) = z sin(pi x) on [0, 2].
class BurgersCharacteristics {
public:
    explicit BurgersCharacteristics(double z);

    double breaking_time() const { return t_break_; }
    /// Foot of the first characteristic pair to cross.
    double breaking_point() const { return x0_break_; }

    /// Left and right states at a shock located at x_s at time t, by
    /// characteristic inversion from each side.
    /// Throws NumericError when either side fails to bracket.
    std::pair<double, double> shock_states(double x_s, double t) const;

    /// Shock path from breaking to t_final with TVD-RK3 steps of size dt.
    ShockTrajectory shock_trajectory(double t_final, double dt) const;

    /// State at (x, t) using only characteristics that have not entered the shock.
    double state(double x, double t, const ShockTrajectory& shock) const;

private:
    double k0(double x0) const;
    double foot_left(double x_s, double t) const;
    double foot_right(double x_s, double t) const;
    double invert(double x, double t, double lo, double hi) const;

    double z_;
    double t_break_;
    double x0_break_;
};

/// Shock trajectory of the realization's Burgers problem; empty before breaking.
ShockTrajectory burgers_shock_ode(const Realization& realization, double t_final, double dt);

/// Pi = H(K - k(x, t)) with k from the restricted characteristic inversion.
std::uint8_t evaluate_pi_burgers(const Realization& realization, const CharPoint& query, double dt);

/// k(x, t) for the realization; the step location of its Pi profile.
double burgers_state(const Realization& realization, double x, double t, double dt);

}  // namespace kwcdf
