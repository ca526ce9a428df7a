#pragma once

// Lognormal random scalars and stationary lognormal random fields with an
// exponential correlation kernel, plus the per-realization seeding scheme.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace kwcdf {

using Rng = std::mt19937_64;

/// Log-space parameters of a lognormal variable: ln z ~ N(mu, sigma2).
struct ScalarDistSpec {
    double mu = 0.0;
    double sigma2 = 0.0;

    double sigma() const;
    /// Mean of the lognormal variable itself.
    double mean() const;
    double cdf(double z) const;
};

/// Stationary lognormal field. `mean` and `std` are moments of the field
/// values (physical units), not of their logarithm.
struct FieldSpec {
    double mean = 1.0;
    double std = 0.0;
    double corr_length = 1.0;
    std::vector<double> grid;

    void validate() const;
};

/// A field sampled on a strictly increasing 1D grid.
class GridField {
public:
    GridField() = default;
    GridField(std::vector<double> grid, std::vector<double> values);

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return grid_.size(); }

    /// Piecewise-linear value at x; clamps to the endpoint values outside the grid.
    double operator()(double x) const;

    /// Width of the grid interval containing x (clamped to the first/last interval).
    double spacing_at(double x) const;

private:
    std::size_t interval(double x) const;

    std::vector<double> grid_;
    std::vector<double> values_;
};

double interpolate(const GridField& field, double x);

/// One draw of every random input of a problem.
struct Realization {
    std::int64_t index = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<std::pair<std::string, GridField>> fields;

    /// Throws std::out_of_range when the name is absent.
    double scalar(const std::string& name) const;
    const GridField& field(const std::string& name) const;
    bool has_scalar(const std::string& name) const;
};

/// Moment inversion: the lognormal with the returned parameters has exactly
/// the given mean and standard deviation. Throws DomainError for mean <= 0.
ScalarDistSpec lognormal_params_from_moments(double mean, double std);

double sample_scalar(const ScalarDistSpec& spec, Rng& rng);

/// Draws one field by Cholesky factorization of the exponential covariance.
/// Builds the factor on every call; use FieldSampler to reuse it.
GridField sample_field(const FieldSpec& spec, Rng& rng);

/// Caches the Cholesky factor of the log-space covariance of one FieldSpec.
class FieldSampler {
public:
    explicit FieldSampler(FieldSpec spec);

    GridField sample(Rng& rng) const;

    const FieldSpec& spec() const { return spec_; }
    const ScalarDistSpec& log_params() const { return log_params_; }

private:
    FieldSpec spec_;
    ScalarDistSpec log_params_;
    Eigen::MatrixXd lower_;
};

/// Counter-based seed for realization `index`: independent of how many other
/// realizations are drawn and in what order.
std::uint64_t realization_seed(std::uint64_t master_seed, std::int64_t index);

/// Audit sidecar: index, seed, scalar columns, then `name[node]` columns per field.
void write_realizations_csv(std::ostream& out, std::span<const Realization> realizations);

/// Reads a sidecar written by write_realizations_csv. Field grids are not
/// stored in the sidecar and are taken from `field_grids` (same order as the
/// field columns).
std::vector<Realization> read_realizations_csv(std::istream& in,
                                               const std::vector<std::vector<double>>& field_grids = {});

}  // namespace kwcdf
