#pragma once

// Catalog of kinematic wave benchmark problems.
//
// A problem is described twice: once for the fine-grained CDF equation
// (characteristic speeds in the augmented space) and once in conservative
// form for the direct WENO solver.

#include <functional>
#include <optional>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kwcdf/randfield.hpp"
#include "kwcdf/types.hpp"

namespace kwcdf {

/// `state`: the unknown is k and characteristics are parametrized by t.
/// `flux`: the unknown is the flow rate q of a  a(x,q) q_t + q_x = S  equation and
/// characteristics are parametrized by x.
enum class ProblemForm { state, flux };

enum class SourceCase { zero, one, x };

std::string to_string(SourceCase c);
SourceCase source_case_from_string(const std::string& s);

/// Conservative form  w_t + u(w; c(x))_x = S  used by the direct solver.
/// `coefficient` is evaluated once per node and realization; the hot-loop
/// callbacks are plain function pointers.
struct ConservativeForm {
    std::function<double(double x, const Realization&)> coefficient;
    double (*flux)(double w, double coef) = nullptr;
    double (*flux_derivative)(double w, double coef) = nullptr;
    /// State of interest <-> conserved variable. nullptr means identity.
    double (*to_conserved)(double state, double coef) = nullptr;
    double (*from_conserved)(double w, double coef) = nullptr;
    /// Conserved variable must stay >= 0 (checked every step).
    bool nonnegative = false;
};

using SpaceTimeFn = std::function<double(const Vec3& x, double t, const Realization&)>;

struct ProblemSpec {
    std::string name;
    std::string description;
    int dim = 1;
    ProblemForm form = ProblemForm::state;
    Box domain;
    bool periodic = false;
    bool has_shock = false;

    /// Lower cutoff of the state axis where Pi is pinned to 0; absent for
    /// problems whose state may be negative.
    std::optional<double> k_floor;
    double k_min = 0.0;
    double k_max = 1.0;

    std::vector<std::pair<std::string, ScalarDistSpec>> scalar_inputs;
    std::vector<std::pair<std::string, FieldSpec>> field_inputs;

    /// State form: dq_i/dK at (K, x).
    std::function<Vec3(double K, const Vec3& x, const Realization&)> flux_derivative;
    /// State form, optional: dq_i/dz_j for every field input j (same order as field_inputs).
    std::function<std::vector<Vec3>(double K, const Vec3& x, const Realization&)> flux_field_sensitivity;
    /// Flux form: a(x, Q) in  a q_t + q_x = S.
    std::function<double(double Q, const Vec3& x, const Realization&)> time_coefficient;

    SpaceTimeFn source;
    std::function<double(const Vec3& x, const Realization&)> initial;
    /// Inflow boundary data, evaluated at a boundary point.
    SpaceTimeFn boundary;
    /// Closed-form solution; empty when none is known.
    SpaceTimeFn exact;

    std::optional<ConservativeForm> conservative;

    Vec3 default_query{0.0, 0.0, 0.0};
    double default_time = 1.0;

    bool has_exact() const { return static_cast<bool>(exact); }
};

/// q = k^(1/2) on [0,2]. Deterministic: offset 1.1, no random inputs.
/// Stochastic: offset 5, scalar input "z" with ln z ~ N(0, 0.1).
ProblemSpec make_test1d(bool deterministic);

/// Unit advection in three directions on [0,2]^3 with ln z ~ N(0, 0.1^2).
ProblemSpec make_3d();

/// Linear 2x2 system  k1_t + k2_x = 0,  k2_t + k1_x = 0, handled through the
/// decoupled variables v1 = (k1+k2)/2 (speed +1) and v2 = (k1-k2)/2 (speed -1).
struct CoupledSystem {
    ProblemSpec v1;
    ProblemSpec v2;
    SpaceTimeFn exact_k1;
    SpaceTimeFn exact_k2;
};

CoupledSystem make_coupled();

std::pair<double, double> decouple(double k1, double k2);
/// Step locations of (Pi_v1, Pi_v2) -> step locations of (Pi_k1, Pi_k2).
std::pair<double, double> recombine_pi(double step_v1, double step_v2);

/// k_t + (k^2)_x = 0 on the periodic domain [0,2], k(x,0) = z sin(pi x).
ProblemSpec make_burgers();

/// Manning open-channel flow in flux form with lognormal s0 and C_M fields
/// sampled on `grid_points` uniform nodes of [0,2].
ProblemSpec make_saint_venant(SourceCase source_case, double corr_length, std::size_t grid_points = 401);

/// Catalog ids: test1d-deterministic, test1d-stochastic, 3d, coupled, burgers,
/// saint-venant.
std::vector<std::string> catalog_ids();

struct ProblemParams {
    SourceCase source_case = SourceCase::zero;
    double corr_length = 0.2;
    std::size_t field_points = 401;
};

/// Single-equation catalog entry. "coupled" is a system and is built with
/// make_coupled instead. Throws ConfigError for unknown ids.
ProblemSpec make_problem(const std::string& id, const ProblemParams& params = {});

/// Draws realizations of a problem's random inputs: scalars first, in
/// declaration order, then fields. Field Cholesky factors are built once.
class RealizationSource {
public:
    RealizationSource(const ProblemSpec& problem, std::uint64_t master_seed);

    Realization draw(std::int64_t index) const;
    std::uint64_t master_seed() const { return master_seed_; }

private:
    std::uint64_t master_seed_;
    std::vector<std::pair<std::string, ScalarDistSpec>> scalars_;
    std::vector<std::pair<std::string, FieldSampler>> fields_;
};

}  // namespace kwcdf
