#include "kwcdf/weno.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "kwcdf/csv.hpp"
#include "kwcdf/errors.hpp"

namespace kwcdf {

namespace {

constexpr double eps_w = 1e-6;
constexpr std::size_t ghosts = 3;

double apply(double (*f)(double, double), double v, double c) { return f ? f(v, c) : v; }

// Quartic through p0..p4 (p0 nearest the boundary) evaluated 1, 2, 3 spacings beyond p0.
std::array<double, 3> extrapolate(double p0, double p1, double p2, double p3, double p4) {
    return {5.0 * p0 - 10.0 * p1 + 10.0 * p2 - 5.0 * p3 + p4,
            15.0 * p0 - 40.0 * p1 + 45.0 * p2 - 24.0 * p3 + 5.0 * p4,
            35.0 * p0 - 105.0 * p1 + 126.0 * p2 - 70.0 * p3 + 15.0 * p4};
}

}  // namespace

double to_qprime(double q, double C_M, double s0) {
    if (q < 0.0) throw DomainError(fmt::format("flow rate must be non-negative, got {}", q));
    if (!(C_M > 0.0) || !(s0 > 0.0)) throw DomainError("C_M and s0 must be positive");
    return std::pow(q * C_M / std::sqrt(s0), 0.75);
}

double from_qprime(double qprime, double C_M, double s0) {
    if (qprime < 0.0) throw DomainError(fmt::format("q' must be non-negative, got {}", qprime));
    if (!(C_M > 0.0) || !(s0 > 0.0)) throw DomainError("C_M and s0 must be positive");
    return std::sqrt(s0) * qprime * std::cbrt(qprime) / C_M;
}

double weno5_reconstruct(const std::array<double, 5>& s, Side side) {
    const std::array<double, 5> v = side == Side::left ? s : std::array<double, 5>{s[4], s[3], s[2], s[1], s[0]};

    const double p0 = (2.0 * v[0] - 7.0 * v[1] + 11.0 * v[2]) / 6.0;
    const double p1 = (-v[1] + 5.0 * v[2] + 2.0 * v[3]) / 6.0;
    const double p2 = (2.0 * v[2] + 5.0 * v[3] - v[4]) / 6.0;

    const double d0 = v[0] - 2.0 * v[1] + v[2];
    const double d1 = v[1] - 2.0 * v[2] + v[3];
    const double d2 = v[2] - 2.0 * v[3] + v[4];
    const double e0 = v[0] - 4.0 * v[1] + 3.0 * v[2];
    const double e1 = v[1] - v[3];
    const double e2 = 3.0 * v[2] - 4.0 * v[3] + v[4];
    const double b0 = 13.0 / 12.0 * d0 * d0 + 0.25 * e0 * e0;
    const double b1 = 13.0 / 12.0 * d1 * d1 + 0.25 * e1 * e1;
    const double b2 = 13.0 / 12.0 * d2 * d2 + 0.25 * e2 * e2;

    const double a0 = 0.1 / ((eps_w + b0) * (eps_w + b0));
    const double a1 = 0.6 / ((eps_w + b1) * (eps_w + b1));
    const double a2 = 0.3 / ((eps_w + b2) * (eps_w + b2));
    return (a0 * p0 + a1 * p1 + a2 * p2) / (a0 + a1 + a2);
}

WenoSolver::WenoSolver(const ProblemSpec& problem, const Realization& realization, std::size_t cells,
                       WenoOptions options)
    : problem_(problem),
      realization_(realization),
      form_(problem.conservative ? *problem.conservative
                                 : throw ConfigError(fmt::format("problem '{}' has no conservative form", problem.name))),
      grid_{problem.domain.lo[0], problem.domain.hi[0], cells},
      options_(options),
      periodic_(problem.periodic) {
    if (problem.dim != 1) throw ConfigError("the direct solver is one-dimensional");
    if (cells < 5) throw ConfigError(fmt::format("need at least 5 cells, got {}", cells));
    if (!(options.cfl > 0.0)) throw ConfigError("CFL number must be positive");
    const std::size_t n = periodic_ ? cells : cells + 1;
    x_.resize(n);
    coef_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        x_[i] = grid_.a + grid_.dx() * static_cast<double>(i);
        coef_[i] = form_.coefficient(x_[i], realization_);
    }
}

double WenoSolver::inflow(double t) const {
    return apply(form_.to_conserved, problem_.boundary(vec1(x_[0]), t, realization_), coef_[0]);
}

void WenoSolver::apply_inflow(std::vector<double>& w, double t) const {
    if (!periodic_) w[0] = inflow(t);
}

WenoState WenoSolver::initial_state() const {
    WenoState s;
    s.grid = grid_;
    s.t = 0.0;
    s.qprime.resize(nodes());
    for (std::size_t i = 0; i < nodes(); ++i)
        s.qprime[i] = apply(form_.to_conserved, problem_.initial(vec1(x_[i]), realization_), coef_[i]);
    apply_inflow(s.qprime, 0.0);
    return s;
}

std::vector<double> WenoSolver::interface_fluxes(const WenoState& state, double* max_speed) const {
    const std::size_t n = nodes();
    const std::vector<double>& w = state.qprime;
    if (w.size() != n) throw ShapeError(fmt::format("state has {} nodes, grid has {}", w.size(), n));

    // Extended arrays: index j + ghosts holds node j, j in [-3, n+2].
    std::vector<double> we(n + 2 * ghosts);
    std::vector<double> ce(n + 2 * ghosts);
    for (std::size_t i = 0; i < n; ++i) {
        we[i + ghosts] = w[i];
        ce[i + ghosts] = coef_[i];
    }
    for (std::size_t g = 1; g <= ghosts; ++g) {
        if (periodic_) {
            we[ghosts - g] = w[n - g];
            ce[ghosts - g] = coef_[n - g];
            we[ghosts + n - 1 + g] = w[g - 1];
            ce[ghosts + n - 1 + g] = coef_[g - 1];
        } else {
            ce[ghosts - g] = coef_[0];
            ce[ghosts + n - 1 + g] = coef_[n - 1];
        }
    }
    if (!periodic_) {
        const auto left = options_.inflow == GhostFill::copy
                              ? std::array<double, 3>{w[0], w[0], w[0]}
                              : extrapolate(w[0], w[1], w[2], w[3], w[4]);
        const auto right = options_.outflow == GhostFill::copy
                               ? std::array<double, 3>{w[n - 1], w[n - 1], w[n - 1]}
                               : extrapolate(w[n - 1], w[n - 2], w[n - 3], w[n - 4], w[n - 5]);
        for (std::size_t g = 1; g <= ghosts; ++g) {
            double l = left[g - 1];
            double r = right[g - 1];
            if (form_.nonnegative) {
                l = std::max(l, 0.0);
                r = std::max(r, 0.0);
            }
            we[ghosts - g] = l;
            we[ghosts + n - 1 + g] = r;
        }
    }

    std::vector<double> fe(we.size());
    for (std::size_t j = 0; j < we.size(); ++j) fe[j] = form_.flux(we[j], ce[j]);

    // Interface between extended nodes e and e+1 for e = ghosts-1 .. ghosts+n-1.
    std::vector<double> out(n + 1);
    double amax = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const std::size_t e = ghosts - 1 + k;
        // Speed from the state jump alone: both fluxes use the interface coefficient.
        const double c_mid = 0.5 * (ce[e] + ce[e + 1]);
        const double a = roe_speed(form_.flux(we[e], c_mid), form_.flux(we[e + 1], c_mid), we[e], we[e + 1],
                                   [&](double wm) { return form_.flux_derivative(wm, c_mid); });
        amax = std::max(amax, std::abs(a));
        double flux;
        if (a >= 0.0)
            flux = weno5_reconstruct({fe[e - 2], fe[e - 1], fe[e], fe[e + 1], fe[e + 2]}, Side::left);
        else
            flux = weno5_reconstruct({fe[e - 1], fe[e], fe[e + 1], fe[e + 2], fe[e + 3]}, Side::right);
        if (!std::isfinite(flux))
            throw NumericError(fmt::format("non-finite interface flux left of node {} at t={}", k, state.t));
        out[k] = flux;
    }
    if (max_speed) *max_speed = amax;
    return out;
}

std::vector<double> WenoSolver::rhs(const WenoState& state, double* max_speed) const {
    const std::vector<double> f = interface_fluxes(state, max_speed);
    const std::size_t n = nodes();
    const double dx = grid_.dx();
    std::vector<double> out(n);
    for (std::size_t i = periodic_ ? 0 : 1; i < n; ++i)
        out[i] = -(f[i + 1] - f[i]) / dx + problem_.source(vec1(x_[i]), state.t, realization_);
    return out;
}

double WenoSolver::stable_dt(double t_final) const {
    double bound = 0.0;
    auto consider = [&](double w, double c) {
        const double s = std::abs(form_.flux_derivative(w, c));
        if (std::isfinite(s)) bound = std::max(bound, s);
    };
    const WenoState s0 = initial_state();
    for (std::size_t i = 0; i < nodes(); ++i) consider(s0.qprime[i], coef_[i]);
    if (!periodic_)
        for (int k = 0; k <= 64; ++k) consider(inflow(t_final * k / 64.0), coef_[0]);
    for (std::size_t i = 0; i < nodes(); ++i) {
        consider(apply(form_.to_conserved, problem_.k_max, coef_[i]), coef_[i]);
        if (!form_.nonnegative || problem_.k_min > 0.0)
            consider(apply(form_.to_conserved, problem_.k_min, coef_[i]), coef_[i]);
    }
    if (!(bound > 0.0)) bound = 1.0;
    double dt = options_.cfl * grid_.dx() / bound;
    if (t_final > 0.0) dt = t_final / std::ceil(t_final / dt);
    return dt;
}

void WenoSolver::check(const WenoState& state) const {
    for (std::size_t i = 0; i < state.qprime.size(); ++i) {
        const double v = state.qprime[i];
        if (!std::isfinite(v)) throw NumericError(fmt::format("non-finite state at node {} (t={})", i, state.t));
        if (form_.nonnegative && v < 0.0)
            throw NumericError(fmt::format("negative state {} at node {} (t={})", v, i, state.t));
    }
}

void WenoSolver::step(WenoState& s, double dt) const {
    double amax = 0.0;
    apply_inflow(s.qprime, s.t);
    const std::vector<double> L0 = rhs(s, &amax);
    if (amax > 0.0 && dt > options_.cfl * grid_.dx() / amax * (1.0 + 1e-12))
        throw CflError(fmt::format("dt={} exceeds the CFL limit {} (max Roe speed {}, dx={}) at t={}", dt,
                                   options_.cfl * grid_.dx() / amax, amax, grid_.dx(), s.t));
    finish_step(s, dt, L0);
}

double WenoSolver::step_adaptive(WenoState& s, double t_final) const {
    double amax = 0.0;
    apply_inflow(s.qprime, s.t);
    const std::vector<double> L0 = rhs(s, &amax);
    double dt = amax > 0.0 ? options_.cfl * grid_.dx() / amax : t_final - s.t;
    // Avoid a sliver step at the end.
    if (s.t + dt * (1.0 + 1e-9) >= t_final) dt = t_final - s.t;
    finish_step(s, dt, L0);
    return dt;
}

void WenoSolver::finish_step(WenoState& s, double dt, const std::vector<double>& L0) const {
    const std::size_t n = nodes();
    const double t = s.t;

    WenoState s1{grid_, std::vector<double>(n), t + dt};
    for (std::size_t i = 0; i < n; ++i) s1.qprime[i] = s.qprime[i] + dt * L0[i];
    apply_inflow(s1.qprime, t + dt);
    const std::vector<double> L1 = rhs(s1);

    WenoState s2{grid_, std::vector<double>(n), t + 0.5 * dt};
    for (std::size_t i = 0; i < n; ++i)
        s2.qprime[i] = 0.75 * s.qprime[i] + 0.25 * s1.qprime[i] + 0.25 * dt * L1[i];
    apply_inflow(s2.qprime, t + 0.5 * dt);
    const std::vector<double> L2 = rhs(s2);

    for (std::size_t i = 0; i < n; ++i)
        s.qprime[i] = s.qprime[i] / 3.0 + 2.0 / 3.0 * s2.qprime[i] + 2.0 / 3.0 * dt * L2[i];
    s.t = t + dt;
    apply_inflow(s.qprime, s.t);
    check(s);
}

std::vector<double> WenoSolver::to_state(const WenoState& state) const {
    std::vector<double> out(state.qprime.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = apply(form_.from_conserved, state.qprime[i], coef_[i]);
    return out;
}

std::vector<double> weno_rhs(const WenoSolver& solver, const WenoState& state) { return solver.rhs(state); }

McsProfile solve_mcs(const ProblemSpec& problem, const Realization& realization, double t_final,
                     std::size_t cells, double dt, WenoOptions options) {
    if (!(t_final >= 0.0)) throw DomainError(fmt::format("final time must be non-negative, got {}", t_final));
    const WenoSolver solver(problem, realization, cells, options);

    WenoState s = solver.initial_state();
    if (!(dt > 0.0)) {
        while (s.t < t_final) solver.step_adaptive(s, t_final);
        s.t = t_final;
        McsProfile out;
        out.x = solver.x();
        out.q = solver.to_state(s);
        out.t = s.t;
        return out;
    }
    const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
    for (long k = 0; k < steps; ++k) {
        const double t_next = k + 1 == steps ? t_final : static_cast<double>(k + 1) * dt;
        solver.step(s, t_next - s.t);
        s.t = t_next;
    }

    McsProfile out;
    out.x = solver.x();
    out.q = solver.to_state(s);
    out.t = s.t;
    return out;
}

double sample_profile(const McsProfile& profile, double x) {
    const auto& xs = profile.x;
    if (xs.empty()) throw ShapeError("empty profile");
    if (x <= xs.front()) return profile.q.front();
    if (x >= xs.back()) return profile.q.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const auto i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return (1.0 - w) * profile.q[i] + w * profile.q[i + 1];
}

void write_profile_csv(std::ostream& out, const McsProfile& profile) {
    out << "x,q\n";
    for (std::size_t i = 0; i < profile.x.size(); ++i)
        out << csv::real(profile.x[i]) << ',' << csv::real(profile.q[i]) << '\n';
}

}  // namespace kwcdf
