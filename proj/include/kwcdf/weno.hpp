#pragma once

// Direct solver for  w_t + u(w; c(x))_x = S  on a uniform 1D grid: fifth-order
// finite-difference WENO with Roe upwinding in space, TVD-RK3 in time.
// For the Manning channel w is the area q' = (q C_M / sqrt(s0))^(3/4).

#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "kwcdf/problems.hpp"

namespace kwcdf {

double to_qprime(double q, double C_M, double s0);
double from_qprime(double qprime, double C_M, double s0);

enum class Side {
    /// u^- at i+1/2, biased to the left.
    left,
    /// u^+ at i-1/2, biased to the right.
    right,
};

/// WENO5 reconstruction (linear weights 1/10, 6/10, 3/10, epsilon 1e-6, squared
/// smoothness indicators) from the nodes i-2..i+2.
double weno5_reconstruct(const std::array<double, 5>& v, Side side);

/// Roe speed (u_r - u_l) / (w_r - w_l); `derivative` is evaluated at the mean
/// state when the jump is below 1e-14.
template <class Derivative>
double roe_speed(double u_left, double u_right, double w_left, double w_right, Derivative&& derivative) {
    const double dw = w_right - w_left;
    if (std::abs(dw) < 1e-14) return derivative(0.5 * (w_left + w_right));
    return (u_right - u_left) / dw;
}

enum class GhostFill {
    /// Ghosts repeat the boundary node.
    copy,
    /// Ghosts continue the quartic through the five nodes nearest the boundary.
    extrapolate,
};

struct WenoGrid {
    double a = 0.0;
    double b = 1.0;
    std::size_t cells = 1;

    double dx() const { return (b - a) / static_cast<double>(cells); }
};

struct WenoState {
    WenoGrid grid;
    /// Conserved variable per node.
    std::vector<double> qprime;
    double t = 0.0;
};

struct WenoOptions {
    GhostFill inflow = GhostFill::extrapolate;
    GhostFill outflow = GhostFill::extrapolate;
    double cfl = 0.4;
};

/// Solution at the final time in the problem's state variable.
struct McsProfile {
    std::vector<double> x;
    std::vector<double> q;
    double t = 0.0;
};

/// One realization's discretization. Non-periodic problems have cells+1 nodes
/// with a Dirichlet inflow node at x = a; periodic problems have `cells` nodes.
class WenoSolver {
public:
    WenoSolver(const ProblemSpec& problem, const Realization& realization, std::size_t cells,
               WenoOptions options = {});

    const WenoGrid& grid() const { return grid_; }
    std::size_t nodes() const { return x_.size(); }
    const std::vector<double>& x() const { return x_; }

    WenoState initial_state() const;

    /// Numerical fluxes at the nodes' interfaces; entry j is the flux between
    /// node j-1 and node j (entry 0 is the inflow face).
    std::vector<double> interface_fluxes(const WenoState& state, double* max_speed = nullptr) const;

    /// dq'/dt per node. The Dirichlet node has zero rate.
    std::vector<double> rhs(const WenoState& state, double* max_speed = nullptr) const;

    /// Largest stable step for reaching t_final: cfl * dx / speed bound, with
    /// the bound taken over the initial state, the inflow data and the
    /// problem's state range, then shrunk to divide t_final evenly.
    double stable_dt(double t_final) const;

    /// One TVD-RK3 step. Throws CflError when dt violates the CFL bound and
    /// NumericError on non-finite or (for nonnegative problems) negative values.
    void step(WenoState& state, double dt) const;

    /// One TVD-RK3 step of cfl * dx / (current max Roe speed), cut to land on
    /// t_final. Returns the step taken.
    double step_adaptive(WenoState& state, double t_final) const;

    /// Conserved variable -> problem state per node.
    std::vector<double> to_state(const WenoState& state) const;

private:
    double inflow(double t) const;
    void apply_inflow(std::vector<double>& w, double t) const;
    void check(const WenoState& state) const;
    void finish_step(WenoState& state, double dt, const std::vector<double>& L0) const;

    const ProblemSpec& problem_;
    const Realization& realization_;
    const ConservativeForm& form_;
    WenoGrid grid_;
    WenoOptions options_;
    bool periodic_;
    std::vector<double> x_;
    std::vector<double> coef_;
};

std::vector<double> weno_rhs(const WenoSolver& solver, const WenoState& state);

/// Solves one realization to t_final with fixed steps of dt; dt <= 0 selects
/// adaptive CFL steps.
McsProfile solve_mcs(const ProblemSpec& problem, const Realization& realization, double t_final,
                     std::size_t cells, double dt, WenoOptions options = {});

/// Linear interpolation of a profile at x.
double sample_profile(const McsProfile& profile, double x);

/// Audit output: header "x,q".
void write_profile_csv(std::ostream& out, const McsProfile& profile);

}  // namespace kwcdf
