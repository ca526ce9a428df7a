#include "kwcdf/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "kwcdf/errors.hpp"

namespace kwcdf {

namespace {

constexpr double pi = std::numbers::pi;

double z_of(const Realization& r) { return r.has_scalar("z") ? r.scalar("z") : 1.0; }

double identity_flux_sqrt(double w, double) { return std::sqrt(std::max(w, 0.0)); }
double identity_flux_sqrt_derivative(double w, double) { return 0.5 / std::sqrt(w); }

double burgers_flux(double w, double) { return w * w; }
double burgers_flux_derivative(double w, double) { return 2.0 * w; }

// Manning law with coefficient beta = C_M / sqrt(s0): the conserved variable is
// the area k = (q beta)^(3/4) and the flux is q = k^(4/3) / beta.
double manning_flux(double w, double beta) {
    const double v = std::max(w, 0.0);
    return v * std::cbrt(v) / beta;
}
double manning_flux_derivative(double w, double beta) {
    return 4.0 / 3.0 * std::cbrt(std::max(w, 0.0)) / beta;
}
double manning_to_area(double q, double beta) { return std::pow(q * beta, 0.75); }
double manning_to_flow(double w, double beta) { return manning_flux(w, beta); }

double beta_at(double x, const Realization& r) {
    return r.field("C_M")(x) / std::sqrt(r.field("s0")(x));
}

ProblemSpec make_test1d_impl(bool deterministic) {
    const double offset = deterministic ? 1.1 : 5.0;

    ProblemSpec p;
    p.name = deterministic ? "test1d-deterministic" : "test1d-stochastic";
    p.description = deterministic ? "q = sqrt(k), k = (sin pi(x+t) + 1.1)^2"
                                  : "q = sqrt(k), k = (z sin pi(x+t) + 5)^2, ln z ~ N(0, 0.1)";
    p.dim = 1;
    p.form = ProblemForm::state;
    p.domain = Box{{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}, 1};
    p.k_floor = 1e-8;
    if (deterministic) {
        p.k_min = (offset - 1.0) * (offset - 1.0);
        p.k_max = (offset + 1.0) * (offset + 1.0);
    } else {
        p.k_min = 0.0;
        p.k_max = 100.0;
        p.scalar_inputs.emplace_back("z", ScalarDistSpec{0.0, 0.1});
    }

    p.flux_derivative = [](double K, const Vec3&, const Realization&) {
        return Vec3{0.5 / std::sqrt(K), 0.0, 0.0};
    };
    // k = (z s + a)^2 with s = sin pi(x+t), c = cos pi(x+t):
    // k_t + (sqrt k)_x = 2 (z s + a) z pi c + z pi c.
    p.source = [offset](const Vec3& x, double t, const Realization& r) {
        const double z = z_of(r);
        const double arg = pi * (x[0] + t);
        const double s = std::sin(arg);
        const double c = std::cos(arg);
        return 2.0 * pi * z * (z * s + offset) * c + pi * z * c;
    };
    p.initial = [offset](const Vec3& x, const Realization& r) {
        const double v = z_of(r) * std::sin(pi * x[0]) + offset;
        return v * v;
    };
    p.boundary = [offset](const Vec3&, double t, const Realization& r) {
        const double v = z_of(r) * std::sin(pi * t) + offset;
        return v * v;
    };
    p.exact = [offset](const Vec3& x, double t, const Realization& r) {
        const double v = z_of(r) * std::sin(pi * (x[0] + t)) + offset;
        return v * v;
    };

    ConservativeForm cf;
    cf.coefficient = [](double, const Realization&) { return 0.0; };
    cf.flux = identity_flux_sqrt;
    cf.flux_derivative = identity_flux_sqrt_derivative;
    cf.nonnegative = true;
    p.conservative = cf;

    p.default_query = deterministic ? Vec3{0.5, 0.0, 0.0} : Vec3{0.2, 0.0, 0.0};
    p.default_time = deterministic ? 0.1 : 1.0;
    return p;
}

}  // namespace

std::string to_string(SourceCase c) {
    switch (c) {
        case SourceCase::zero: return "0";
        case SourceCase::one: return "1";
        case SourceCase::x: return "x";
    }
    return "?";
}

SourceCase source_case_from_string(const std::string& s) {
    if (s == "0" || s == "zero") return SourceCase::zero;
    if (s == "1" || s == "one") return SourceCase::one;
    if (s == "x") return SourceCase::x;
    throw ConfigError(fmt::format("unknown source case '{}' (expected 0, 1 or x)", s));
}

ProblemSpec make_test1d(bool deterministic) { return make_test1d_impl(deterministic); }

ProblemSpec make_3d() {
    ProblemSpec p;
    p.name = "3d";
    p.description = "unit advection in three directions, k = (z/3) sum sin(pi t x_i)";
    p.dim = 3;
    p.form = ProblemForm::state;
    p.domain = Box{{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}, 3};
    p.k_min = -3.0;
    p.k_max = 3.0;
    p.scalar_inputs.emplace_back("z", ScalarDistSpec{0.0, 0.01});

    p.flux_derivative = [](double, const Vec3&, const Realization&) { return Vec3{1.0, 1.0, 1.0}; };
    p.source = [](const Vec3& x, double t, const Realization& r) {
        double acc = 0.0;
        for (double xi : x) acc += (t + xi) * std::cos(pi * t * xi);
        return pi * z_of(r) / 3.0 * acc;
    };
    p.exact = [](const Vec3& x, double t, const Realization& r) {
        double acc = 0.0;
        for (double xi : x) acc += std::sin(pi * t * xi);
        return z_of(r) / 3.0 * acc;
    };
    p.initial = [](const Vec3&, const Realization&) { return 0.0; };
    p.boundary = p.exact;

    p.default_query = Vec3{1.3, 1.3, 1.3};
    p.default_time = 1.0;
    return p;
}

CoupledSystem make_coupled() {
    auto base = [](const std::string& name, double speed) {
        ProblemSpec p;
        p.name = name;
        p.dim = 1;
        p.form = ProblemForm::state;
        p.domain = Box{{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}, 1};
        p.k_min = -2.0;
        p.k_max = 2.0;
        p.scalar_inputs.emplace_back("z", ScalarDistSpec{0.0, 0.01});
        p.flux_derivative = [speed](double, const Vec3&, const Realization&) { return Vec3{speed, 0.0, 0.0}; };
        p.source = [](const Vec3&, double, const Realization&) { return 0.0; };
        p.default_query = Vec3{0.3, 0.0, 0.0};
        p.default_time = 1.0;
        return p;
    };

    CoupledSystem sys;
    // v1 = (k1+k2)/2 moves right, v2 = (k1-k2)/2 moves left.
    sys.v1 = base("coupled-v1", 1.0);
    sys.v1.description = "v1 = (k1+k2)/2, unit speed to the right";
    sys.v1.exact = [](const Vec3& x, double t, const Realization& r) {
        const double a = pi * (x[0] - t);
        return 0.5 * z_of(r) * (std::sin(a) + std::cos(a));
    };
    sys.v2 = base("coupled-v2", -1.0);
    sys.v2.description = "v2 = (k1-k2)/2, unit speed to the left";
    sys.v2.exact = [](const Vec3& x, double t, const Realization& r) {
        const double a = pi * (x[0] + t);
        return 0.5 * z_of(r) * (std::sin(a) - std::cos(a));
    };
    for (ProblemSpec* p : {&sys.v1, &sys.v2}) {
        p->boundary = p->exact;
        p->initial = [exact = p->exact](const Vec3& x, const Realization& r) { return exact(x, 0.0, r); };
    }

    sys.exact_k1 = [v1 = sys.v1.exact, v2 = sys.v2.exact](const Vec3& x, double t, const Realization& r) {
        return v1(x, t, r) + v2(x, t, r);
    };
    sys.exact_k2 = [v1 = sys.v1.exact, v2 = sys.v2.exact](const Vec3& x, double t, const Realization& r) {
        return v1(x, t, r) - v2(x, t, r);
    };
    return sys;
}

std::pair<double, double> decouple(double k1, double k2) { return {0.5 * (k1 + k2), 0.5 * (k1 - k2)}; }

std::pair<double, double> recombine_pi(double step_v1, double step_v2) {
    return {step_v1 + step_v2, step_v1 - step_v2};
}

ProblemSpec make_burgers() {
    ProblemSpec p;
    p.name = "burgers";
    p.description = "k_t + (k^2)_x = 0, periodic on [0,2], k(x,0) = z sin(pi x)";
    p.dim = 1;
    p.form = ProblemForm::state;
    p.domain = Box{{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}, 1};
    p.periodic = true;
    p.has_shock = true;
    p.k_min = -2.0;
    p.k_max = 2.0;
    p.scalar_inputs.emplace_back("z", ScalarDistSpec{0.0, 0.01});

    p.flux_derivative = [](double K, const Vec3&, const Realization&) { return Vec3{2.0 * K, 0.0, 0.0}; };
    p.source = [](const Vec3&, double, const Realization&) { return 0.0; };
    p.initial = [](const Vec3& x, const Realization& r) { return z_of(r) * std::sin(pi * x[0]); };

    ConservativeForm cf;
    cf.coefficient = [](double, const Realization&) { return 0.0; };
    cf.flux = burgers_flux;
    cf.flux_derivative = burgers_flux_derivative;
    p.conservative = cf;

    p.default_query = Vec3{0.4, 0.0, 0.0};
    p.default_time = 1.0;
    return p;
}

ProblemSpec make_saint_venant(SourceCase source_case, double corr_length, std::size_t grid_points) {
    if (!(corr_length > 0.0))
        throw DomainError(fmt::format("correlation length must be positive, got {}", corr_length));
    if (grid_points < 2) throw DomainError("field grid needs at least 2 points");

    ProblemSpec p;
    p.name = "saint-venant";
    p.description = fmt::format("Manning channel flow in flux form, S = {}, lambda = {}", to_string(source_case),
                                corr_length);
    p.dim = 1;
    p.form = ProblemForm::flux;
    p.domain = Box{{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}, 1};
    p.k_floor = 1e-8;
    p.k_min = 0.0;
    p.k_max = 3.0;

    std::vector<double> grid(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i)
        grid[i] = 2.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    p.field_inputs.emplace_back("C_M", FieldSpec{0.037, 0.00925, corr_length, grid});
    p.field_inputs.emplace_back("s0", FieldSpec{0.01, 0.0025, corr_length, grid});

    p.time_coefficient = [](double Q, const Vec3& x, const Realization& r) {
        return 0.75 * std::pow(beta_at(x[0], r), 0.75) * std::pow(Q, -0.25);
    };
    switch (source_case) {
        case SourceCase::zero: p.source = [](const Vec3&, double, const Realization&) { return 0.0; }; break;
        case SourceCase::one: p.source = [](const Vec3&, double, const Realization&) { return 1.0; }; break;
        case SourceCase::x: p.source = [](const Vec3& x, double, const Realization&) { return x[0]; }; break;
    }
    p.initial = [](const Vec3&, const Realization&) { return 0.5; };
    p.boundary = [](const Vec3&, double t, const Realization&) { return std::max(std::sin(pi * t), 0.5); };

    ConservativeForm cf;
    cf.coefficient = beta_at;
    cf.flux = manning_flux;
    cf.flux_derivative = manning_flux_derivative;
    cf.to_conserved = manning_to_area;
    cf.from_conserved = manning_to_flow;
    cf.nonnegative = true;
    p.conservative = cf;

    p.default_query = Vec3{1.0, 0.0, 0.0};
    p.default_time = 1.0;
    return p;
}

std::vector<std::string> catalog_ids() {
    return {"test1d-deterministic", "test1d-stochastic", "3d", "coupled", "burgers", "saint-venant"};
}

ProblemSpec make_problem(const std::string& id, const ProblemParams& params) {
    if (id == "test1d-deterministic") return make_test1d(true);
    if (id == "test1d-stochastic") return make_test1d(false);
    if (id == "3d") return make_3d();
    if (id == "burgers") return make_burgers();
    if (id == "saint-venant") return make_saint_venant(params.source_case, params.corr_length, params.field_points);
    if (id == "coupled") throw ConfigError("'coupled' is a system; build it with make_coupled");
    throw ConfigError(fmt::format("unknown problem '{}'", id));
}

RealizationSource::RealizationSource(const ProblemSpec& problem, std::uint64_t master_seed)
    : master_seed_(master_seed), scalars_(problem.scalar_inputs) {
    for (const auto& [name, spec] : problem.field_inputs) fields_.emplace_back(name, FieldSampler(spec));
}

Realization RealizationSource::draw(std::int64_t index) const {
    Realization r;
    r.index = index;
    r.seed = realization_seed(master_seed_, index);
    Rng rng(r.seed);
    for (const auto& [name, spec] : scalars_) r.scalars.emplace_back(name, sample_scalar(spec, rng));
    for (const auto& [name, sampler] : fields_) r.fields.emplace_back(name, sampler.sample(rng));
    return r;
}

}  // namespace kwcdf
