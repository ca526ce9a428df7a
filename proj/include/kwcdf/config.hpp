#pragma once

// Experiment configuration: a JSON document (schema in docs/config.schema.json).
// Errors carry the line of the offending key.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kwcdf/characteristics.hpp"
#include "kwcdf/problems.hpp"
#include "kwcdf/weno.hpp"

namespace kwcdf {

enum class Method { cdf, mcs, both };
enum class Estimator { mc, weighted };
enum class SweepKind { none, M, dt, dx };
enum class ReferenceKind {
    none,
    /// Draws through the exact solution formula.
    exact,
    /// Separate direct-solver ensemble.
    mcs,
    /// The run's own direct-solver ensemble at its largest M.
    self,
};

struct KGridSpec {
    double min = 0.0;
    double max = 1.0;
    std::size_t n = 101;

    std::vector<double> values() const;
};

struct Numerics {
    double dt_char = 0.01;
    std::size_t n_x = 400;
    /// <= 0 selects the stable step automatically.
    double dt_weno = 0.0;
    WenoOptions weno;
    ProfileSearch search = ProfileSearch::bisection;
};

struct Sweep {
    SweepKind kind = SweepKind::none;
    std::vector<double> values;
};

struct Reference {
    ReferenceKind kind = ReferenceKind::none;
    std::size_t draws = 1'000'000;
    std::size_t M = 2000;
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    std::string problem = "test1d-stochastic";
    ProblemParams params;
    /// Coupled system only: "k1" or "k2".
    std::string component = "k1";

    Method method = Method::cdf;
    std::size_t M = 100;
    std::uint64_t master_seed = 1;
    Vec3 query_x{0.0, 0.0, 0.0};
    double query_t = 1.0;
    KGridSpec K_grid;
    Numerics numerics;
    Estimator estimator = Estimator::mc;
    Sweep sweep;
    Reference reference;
    /// Points of the error grid for dt sweeps.
    std::size_t convergence_points = 101;
    std::size_t benchmark_realizations = 3;
    bool audit = false;
    std::string output_dir = "out";

    /// Canonical JSON text (sorted keys, no whitespace); hashed into the manifest.
    std::string canonical;
};

/// Parses and validates a config. `source` names the document in messages.
/// Throws ConfigError with "source:line: message".
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");

ExperimentConfig load_config(const std::string& path);

/// Checks the cross-field invariants (K_min >= K_floor, sweep halvings, method
/// and reference compatibility). Called by parse_config; callers that edit a
/// config in code may call it again.
void validate(const ExperimentConfig& config);

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace kwcdf
