#include "kwcdf/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "kwcdf/burgers.hpp"
#include "kwcdf/csv.hpp"

namespace kwcdf {

namespace {

std::uint8_t heaviside(double y) { return y >= 0.0 ? 1 : 0; }

bool below_floor(const ProblemSpec& problem, double K) { return problem.k_floor && K <= *problem.k_floor; }

FootPoint K_foot(CharPoint at, double floor) {
    at.K = floor;
    return {at, BoundaryKind::K_boundary};
}

Vec3 wrap_periodic(const ProblemSpec& problem, Vec3 x) {
    for (int d = 0; d < problem.dim; ++d) {
        const double lo = problem.domain.lo[d];
        const double len = problem.domain.hi[d] - lo;
        x[d] = lo + (x[d] - lo - len * std::floor((x[d] - lo) / len));
    }
    return x;
}

Vec3 clamp_to(const Box& box, Vec3 x) {
    for (int d = 0; d < box.dim; ++d) x[d] = std::clamp(x[d], box.lo[d], box.hi[d]);
    return x;
}

FootPoint trace_state(const ProblemSpec& problem, const Realization& r, const CharPoint& query, double dt) {
    auto v = [&](const CharPoint& p) { return velocity(problem, r, p); };
    const double floor = problem.k_floor.value_or(-std::numeric_limits<double>::infinity());

    CharPoint c = query;
    if (below_floor(problem, c.K)) return K_foot(c, floor);

    for (long steps = 0;; ++steps) {
        if (steps >= kMaxTraceSteps)
            throw DivergenceError(fmt::format("characteristic through x={}, K={}, t={} exceeded {} steps",
                                              query.x[0], query.K, query.t, kMaxTraceSteps));
        const double h = std::min(dt, c.t);
        const bool last = h >= c.t;

        CharPoint next;
        try {
            next = rk3_step(c, -h, v);
        } catch (const SingularityError&) {
            return K_foot(c, floor);
        }
        next.t = last ? 0.0 : c.t - h;
        if (below_floor(problem, next.K)) return K_foot(next, floor);

        if (problem.periodic) {
            next.x = wrap_periodic(problem, next.x);
        } else if (!problem.domain.contains(next.x)) {
            // Locate the exit within the step: inside at 0, outside at h.
            double lo = 0.0;
            double hi = h;
            CharPoint exit = next;
            while (hi - lo > 1e-10 * dt) {
                const double mid = 0.5 * (lo + hi);
                CharPoint p;
                try {
                    p = rk3_step(c, -mid, v);
                } catch (const SingularityError&) {
                    return K_foot(c, floor);
                }
                if (problem.domain.contains(p.x)) {
                    lo = mid;
                } else {
                    hi = mid;
                    exit = p;
                }
            }
            exit.x = clamp_to(problem.domain, exit.x);
            exit.t = std::max(c.t - hi, 0.0);
            if (below_floor(problem, exit.K)) return K_foot(exit, floor);
            return {exit, exit.t == 0.0 ? BoundaryKind::initial_plane : BoundaryKind::spatial_boundary};
        }

        if (last) return {next, BoundaryKind::initial_plane};
        c = next;
    }
}

// Flux form  a(x, Q) q_t + q_x = S, traced with x as the independent variable:
// d(t, Q)/dx = (a(x, Q), S(x, t)).
FootPoint trace_flux(const ProblemSpec& problem, const Realization& r, const CharPoint& query, double dx) {
    const double floor = problem.k_floor.value_or(-std::numeric_limits<double>::infinity());
    const double inlet = problem.domain.lo[0];

    auto rhs = [&](const std::array<double, 2>& y, double x) {
        const Vec3 xv{x, 0.0, 0.0};
        if (below_floor(problem, y[1]))
            throw SingularityError(fmt::format("Q={} below floor at x={}", y[1], x));
        const double a = problem.time_coefficient(y[1], xv, r);
        const double s = problem.source(xv, y[0], r);
        if (!std::isfinite(a) || !std::isfinite(s))
            throw NumericError(fmt::format("non-finite characteristic slope at x={}, Q={}, t={}", x, y[1], y[0]));
        return std::array<double, 2>{a, s};
    };
    auto at = [](double x, const std::array<double, 2>& y) { return CharPoint{{x, 0.0, 0.0}, y[1], y[0]}; };

    double x = query.x[0];
    std::array<double, 2> y{query.t, query.K};
    if (below_floor(problem, y[1])) return K_foot(at(x, y), floor);

    for (long steps = 0;; ++steps) {
        if (steps >= kMaxTraceSteps)
            throw DivergenceError(fmt::format("characteristic through x={}, Q={}, t={} exceeded {} steps",
                                              query.x[0], query.K, query.t, kMaxTraceSteps));
        const double h = std::min(dx, x - inlet);
        const bool last = h >= x - inlet;

        std::array<double, 2> next;
        try {
            next = tvd_rk3(y, x, -h, rhs);
        } catch (const SingularityError&) {
            return K_foot(at(x, y), floor);
        }
        if (below_floor(problem, next[1])) return K_foot(at(x - h, next), floor);

        if (next[0] <= 0.0) {
            double lo = 0.0;
            double hi = h;
            std::array<double, 2> foot = next;
            while (hi - lo > 1e-10 * dx) {
                const double mid = 0.5 * (lo + hi);
                std::array<double, 2> p;
                try {
                    p = tvd_rk3(y, x, -mid, rhs);
                } catch (const SingularityError&) {
                    return K_foot(at(x, y), floor);
                }
                if (p[0] > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                    foot = p;
                }
            }
            foot[0] = 0.0;
            if (below_floor(problem, foot[1])) return K_foot(at(x - hi, foot), floor);
            return {at(std::max(x - hi, inlet), foot), BoundaryKind::initial_plane};
        }

        x = last ? inlet : x - h;
        y = next;
        if (last) return {at(x, y), BoundaryKind::spatial_boundary};
    }
}

}  // namespace

std::string to_string(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::initial_plane: return "initial_plane";
        case BoundaryKind::spatial_boundary: return "spatial_boundary";
        case BoundaryKind::K_boundary: return "K_boundary";
    }
    return "?";
}

double PiSolution::step_location() const {
    for (std::size_t j = 0; j < pi_values.size(); ++j)
        if (pi_values[j]) return K_grid[j];
    return std::numeric_limits<double>::quiet_NaN();
}

VelocityEval velocity(const ProblemSpec& problem, const Realization& r, const CharPoint& p) {
    if (problem.k_floor && p.K < *problem.k_floor)
        throw SingularityError(fmt::format("K={} below floor {} at x={}, t={}", p.K, *problem.k_floor, p.x[0], p.t));

    VelocityEval e;
    if (problem.form == ProblemForm::flux) {
        const double a = problem.time_coefficient(p.K, p.x, r);
        e.vx = {1.0 / a, 0.0, 0.0};
        e.vK = problem.source(p.x, p.t, r) / a;
        return e;
    }

    e.vx = problem.flux_derivative(p.K, p.x, r);
    e.vK = problem.source(p.x, p.t, r);
    if (problem.flux_field_sensitivity && !r.fields.empty()) {
        const std::vector<Vec3> dq_dz = problem.flux_field_sensitivity(p.K, p.x, r);
        for (std::size_t j = 0; j < r.fields.size() && j < dq_dz.size(); ++j) {
            const GridField& f = r.fields[j].second;
            const double h = 0.5 * f.spacing_at(p.x[0]);
            const double dz_dx = (f(p.x[0] + h) - f(p.x[0] - h)) / (2.0 * h);
            e.vK -= dq_dz[j][0] * dz_dx;
        }
    }
    return e;
}

FootPoint trace_back(const ProblemSpec& problem, const Realization& realization, const CharPoint& query,
                     double step) {
    if (!(query.t > 0.0)) throw DomainError(fmt::format("query time must be positive, got {}", query.t));
    if (!(step > 0.0)) throw DomainError(fmt::format("tracing step must be positive, got {}", step));
    if (problem.form == ProblemForm::flux) return trace_flux(problem, realization, query, step);
    return trace_state(problem, realization, query, step);
}

std::uint8_t evaluate_pi(const ProblemSpec& problem, const Realization& realization, const CharPoint& query,
                         double step) {
    if (problem.has_shock) return evaluate_pi_burgers(realization, query, step);
    const FootPoint foot = trace_back(problem, realization, query, step);
    const CharPoint& c = foot.location;
    switch (foot.kind) {
        case BoundaryKind::initial_plane: return heaviside(c.K - problem.initial(c.x, realization));
        case BoundaryKind::spatial_boundary: return heaviside(c.K - problem.boundary(c.x, c.t, realization));
        case BoundaryKind::K_boundary: return 0;
    }
    return 0;
}

PiSolution solve_pi_profile(const ProblemSpec& problem, const Realization& realization, const Vec3& x, double t,
                            std::span<const double> K_grid, double step, ProfileSearch search) {
    PiSolution out;
    out.x = x;
    out.t = t;
    out.K_grid.assign(K_grid.begin(), K_grid.end());
    out.pi_values.assign(K_grid.size(), 0);
    const std::size_t n = K_grid.size();

    if (problem.has_shock) {
        const double k = burgers_state(realization, x[0], t, step);
        for (std::size_t j = 0; j < n; ++j) out.pi_values[j] = heaviside(K_grid[j] - k);
        return out;
    }

    auto pi_at = [&](std::size_t j) { return evaluate_pi(problem, realization, CharPoint{x, K_grid[j], t}, step); };
    switch (search) {
        case ProfileSearch::exhaustive:
            for (std::size_t j = 0; j < n; ++j) out.pi_values[j] = pi_at(j);
            break;
        case ProfileSearch::linear:
            for (std::size_t j = 0; j < n; ++j) {
                if (pi_at(j)) {
                    std::fill(out.pi_values.begin() + static_cast<std::ptrdiff_t>(j), out.pi_values.end(), 1);
                    break;
                }
            }
            break;
        case ProfileSearch::bisection: {
            // Invariant: Pi(lo) = 0 (or lo = -1), Pi(hi) = 1 (or hi = n).
            std::ptrdiff_t lo = -1;
            auto hi = static_cast<std::ptrdiff_t>(n);
            while (hi - lo > 1) {
                const std::ptrdiff_t mid = lo + (hi - lo) / 2;
                if (pi_at(static_cast<std::size_t>(mid)))
                    hi = mid;
                else
                    lo = mid;
            }
            std::fill(out.pi_values.begin() + hi, out.pi_values.end(), 1);
            break;
        }
    }
    return out;
}

double step_location(const ProblemSpec& problem, const Realization& realization, const Vec3& x, double t,
                     double step, double K_lo, double K_hi, double tol) {
    if (problem.has_shock) return burgers_state(realization, x[0], t, step);
    auto pi_at = [&](double K) { return evaluate_pi(problem, realization, CharPoint{x, K, t}, step); };
    if (pi_at(K_lo) != 0 || pi_at(K_hi) != 1)
        throw NumericError(fmt::format("Pi does not switch from 0 to 1 on [{}, {}] at x={}, t={}", K_lo, K_hi, x[0], t));
    while (K_hi - K_lo > tol) {
        const double mid = 0.5 * (K_lo + K_hi);
        if (mid <= K_lo || mid >= K_hi) break;
        if (pi_at(mid))
            K_hi = mid;
        else
            K_lo = mid;
    }
    return 0.5 * (K_lo + K_hi);
}

double characteristic_step(const ProblemSpec& problem, const Realization& realization, double requested) {
    if (problem.form != ProblemForm::flux || realization.fields.empty()) return requested;
    double spacing = std::numeric_limits<double>::infinity();
    for (const auto& [name, field] : realization.fields) {
        const auto& g = field.grid();
        for (std::size_t i = 1; i < g.size(); ++i) spacing = std::min(spacing, g[i] - g[i - 1]);
    }
    return std::min(requested, 0.5 * spacing);
}

void write_pi_csv(std::ostream& out, const PiSolution& solution) {
    out << "K,pi\n";
    for (std::size_t j = 0; j < solution.K_grid.size(); ++j)
        out << csv::real(solution.K_grid[j]) << ',' << static_cast<int>(solution.pi_values[j]) << '\n';
}

}  // namespace kwcdf
