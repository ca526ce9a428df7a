#pragma once

// Backward method of characteristics for the fine-grained CDF equation
//
//     dPi/dt + v . grad_c Pi = 0,   c = (x1, x2, x3, K),
//
// one realization at a time. Pi is constant along characteristics, so its
// value at a query point is read off at the foot of the characteristic on the
// initial plane, the inflow boundary, or the K floor.

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "kwcdf/errors.hpp"
#include "kwcdf/problems.hpp"
#include "kwcdf/rk3.hpp"
#include "kwcdf/types.hpp"

namespace kwcdf {

/// Default lower cutoff of the state axis (state units).
inline constexpr double kDefaultKFloor = 1e-8;

/// Hard cap on the number of tracing steps for one characteristic.
inline constexpr long kMaxTraceSteps = 10'000'000;

struct CharPoint {
    Vec3 x{0.0, 0.0, 0.0};
    double K = 0.0;
    double t = 0.0;
};

/// Augmented-space velocity: vx = dq_i/dK, vK = dK/dt.
struct VelocityEval {
    Vec3 vx{0.0, 0.0, 0.0};
    double vK = 0.0;
};

enum class BoundaryKind { initial_plane, spatial_boundary, K_boundary };

std::string to_string(BoundaryKind kind);

struct FootPoint {
    CharPoint location;
    BoundaryKind kind = BoundaryKind::initial_plane;
};

/// Pi(K; x, t) sampled on a K grid. Values are 0 or 1.
struct PiSolution {
    Vec3 x{0.0, 0.0, 0.0};
    double t = 0.0;
    std::vector<double> K_grid;
    std::vector<std::uint8_t> pi_values;

    /// First K where Pi is 1, or nullopt-like NaN when the row is all zeros.
    double step_location() const;
};

/// Characteristic velocity at a point of the augmented space.
///
/// State form: vx_i = dq_i/dK and vK = S - sum_ij dq_i/dz_j dz_j/dx_i, with
/// the field gradients taken by central differences of the interpolated
/// fields (step: half the local field spacing).
/// Flux form: the t-parametrized velocity (1/a, S/a) of  a q_t + q_x = S.
///
/// Throws SingularityError when K is below the problem's floor.
VelocityEval velocity(const ProblemSpec& problem, const Realization& realization, const CharPoint& point);

/// One TVD-RK3 step of dc/dt = v. Negative dt traces backward.
/// Throws NumericError carrying the state when the velocity is not finite.
template <class Velocity>
CharPoint rk3_step(const CharPoint& state, double dt, Velocity&& v) {
    auto rhs = [&](const std::array<double, 4>& y, double t) {
        const CharPoint p{{y[0], y[1], y[2]}, y[3], t};
        const VelocityEval e = v(p);
        if (!std::isfinite(e.vx[0]) || !std::isfinite(e.vx[1]) || !std::isfinite(e.vx[2]) ||
            !std::isfinite(e.vK))
            throw NumericError(fmt::format("non-finite characteristic velocity at x=({}, {}, {}), K={}, t={}",
                                           p.x[0], p.x[1], p.x[2], p.K, p.t));
        return std::array<double, 4>{e.vx[0], e.vx[1], e.vx[2], e.vK};
    };
    const std::array<double, 4> y{state.x[0], state.x[1], state.x[2], state.K};
    const std::array<double, 4> out = tvd_rk3(y, state.t, dt, rhs);
    return CharPoint{{out[0], out[1], out[2]}, out[3], state.t + dt};
}

/// Integrates the characteristic through `query` backward until it meets the
/// initial plane, the inflow boundary, or the K floor.
///
/// For flux-form problems the characteristic is parametrized by x1 and `step`
/// is the x1 step; otherwise `step` is the time step.
/// A foot that reaches t = 0 and the boundary at once is reported on the
/// initial plane.
FootPoint trace_back(const ProblemSpec& problem, const Realization& realization, const CharPoint& query,
                     double step);

/// Pi at `query`: H(K_foot - k_in), H(K_foot - k_bx), or 0 on the K floor.
/// Burgers-type problems (has_shock) are routed to evaluate_pi_burgers.
std::uint8_t evaluate_pi(const ProblemSpec& problem, const Realization& realization, const CharPoint& query,
                         double step);

enum class ProfileSearch {
    /// Evaluate Pi independently at every K.
    exhaustive,
    /// Scan upward and stop at the first 1.
    linear,
    /// Binary search for the first 1. Requires a monotone profile.
    bisection,
};

/// Pi over a K grid at one space-time point. `linear` and `bisection` rely on
/// monotonicity in K and are only valid for shock-free problems.
PiSolution solve_pi_profile(const ProblemSpec& problem, const Realization& realization, const Vec3& x, double t,
                            std::span<const double> K_grid, double step,
                            ProfileSearch search = ProfileSearch::bisection);

/// Continuous location of the 0 -> 1 transition of Pi in [K_lo, K_hi] by
/// bisection; this is the characteristic solution k(x, t).
double step_location(const ProblemSpec& problem, const Realization& realization, const Vec3& x, double t,
                     double step, double K_lo, double K_hi, double tol = 1e-12);

/// Tracing step for a problem: flux-form problems with fields use at most half
/// the field spacing in x; otherwise `requested` is returned.
double characteristic_step(const ProblemSpec& problem, const Realization& realization, double requested);

/// Audit output: header "K,pi".
void write_pi_csv(std::ostream& out, const PiSolution& solution);

}  // namespace kwcdf
