#pragma once

// Experiment drivers behind the command-line tool: CDF-method and direct
// ensembles, convergence sweeps and the timing benchmark, plus their CSV
// outputs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kwcdf/config.hpp"
#include "kwcdf/ensemble.hpp"
#include "kwcdf/problems.hpp"
#include "kwcdf/weno.hpp"

namespace kwcdf {

inline constexpr const char* kVersion = "1.0.0";

struct RealizationFailure {
    std::int64_t index = 0;
    std::string method;
    std::string message;
};

/// One configured experiment: the problem, its realizations and the
/// per-realization solvers.
class Experiment {
public:
    explicit Experiment(ExperimentConfig config);

    const ExperimentConfig& config() const { return config_; }
    /// The catalog problem; for the coupled system, its right-moving part.
    const ProblemSpec& problem() const { return problem_; }
    bool coupled() const { return coupled_.has_value(); }
    const std::vector<double>& K_grid() const { return K_grid_; }

    Realization realization(std::int64_t index) const { return source_.draw(index); }

    /// CDF method: Pi over the K grid at the query point.
    std::vector<std::uint8_t> pi_row(const Realization& r) const;

    /// Direct solution of one realization at the query point. Problems
    /// without a direct solver are sampled through their exact solution.
    double direct_sample(const Realization& r) const;

    /// Full direct-solver profile; nullopt for problems sampled exactly.
    std::optional<McsProfile> direct_profile(const Realization& r) const;

    /// Exact state at the query point.
    double exact_sample(const Realization& r) const;

    /// Ensemble average of the first rows according to the configured estimator.
    EmpiricalCDF estimate(std::span<const Realization> realizations, const PiMatrix& pi) const;

private:
    ExperimentConfig config_;
    ProblemSpec problem_;
    std::optional<CoupledSystem> coupled_;
    std::vector<double> K_grid_;
    RealizationSource source_;
};

struct EnsembleResult {
    std::vector<double> K_grid;
    std::vector<std::size_t> M_values;
    std::optional<EmpiricalCDF> cdf;
    std::optional<EmpiricalCDF> mcs;
    std::optional<EmpiricalCDF> reference;
    std::vector<double> eps_cdf;
    std::vector<double> eps_mcs;
    std::vector<RealizationFailure> failures;

    std::vector<Realization> realizations;
    std::vector<std::vector<std::uint8_t>> pi_rows;
    std::vector<McsProfile> profiles;
};

/// Draws max(M, sweep M) realizations and evaluates the configured methods.
/// Error columns are computed at every M of an M sweep (nested prefixes of
/// the same realizations), else at M.
EnsembleResult run_ensemble(const ExperimentConfig& config, std::size_t jobs);

/// Reference CDF on the experiment's K grid for the configured reference kind.
/// `own_mcs` supplies the direct samples for the "self" reference.
std::optional<EmpiricalCDF> reference_cdf(const Experiment& experiment, std::span<const double> own_mcs,
                                          std::size_t jobs);

/// Rows of a dt sweep (characteristics, mean squared error of the step
/// location over the configured number of equidistant points), a dx sweep
/// (direct solver, root-mean-square nodal error) or an M sweep (ensemble
/// error of the configured method).
std::vector<ErrorReport> run_convergence(const ExperimentConfig& config, std::size_t jobs);

struct TimingRow {
    std::string realization;
    std::string method;
    double seconds = 0.0;
};

/// Per-realization wall time of both methods, serially; Saint-Venant runs all
/// three source cases. Summary rows: "mean" per method and "ratio" mcs/cdf.
std::vector<TimingRow> run_benchmark(const ExperimentConfig& config);

/// Fraction of realizations that may fail before a run is aborted.
inline constexpr double kMaxFailureFraction = 0.01;

/// Throws NumericError when more than 1% of the realizations failed.
void check_failures(const EnsembleResult& result, std::size_t M);

void write_cdf_table(const std::filesystem::path& file, const EnsembleResult& result);
void write_error_table(const std::filesystem::path& file, const EnsembleResult& result);
void write_convergence_table(const std::filesystem::path& file, std::span<const ErrorReport> rows);
void write_timing_table(const std::filesystem::path& file, std::span<const TimingRow> rows);
void write_failures_table(const std::filesystem::path& file, std::span<const RealizationFailure> failures);
/// realizations.csv, pi/<index>.csv and profiles/<index>.csv.
void write_audit(const std::filesystem::path& dir, const EnsembleResult& result);
/// manifest.json: command, config hash, seed, module versions, output files.
void write_manifest(const std::filesystem::path& dir, const ExperimentConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs);

}  // namespace kwcdf
