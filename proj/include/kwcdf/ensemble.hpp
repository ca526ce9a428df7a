#pragma once

// Ensemble estimators of the single-point CDF F_k(K; x, t) and the error
// metrics used to compare them.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace kwcdf {

struct EmpiricalCDF {
    std::vector<double> K_grid;
    std::vector<double> F_values;
};

struct ErrorReport {
    double grid_param = 0.0;
    double eps = 0.0;
    std::optional<double> rate;
};

/// M rows of Pi over a shared K grid.
struct PiMatrix {
    std::vector<double> K_grid;
    std::vector<std::vector<std::uint8_t>> rows;
};

/// F(K_j) = (1/M) sum_i Pi_i(K_j). Throws EmptyEnsembleError for M = 0.
EmpiricalCDF estimate_cdf_mc(const PiMatrix& pi);

/// Weighted estimator for a single scalar input. With z_(1) <= ... <= z_(M)
/// the sorted samples, row (i) gets the weight F_z(z_(i+1)) - F_z(z_(i)),
/// where the outermost cut points are pinned to 0 and 1: the cuts are
/// 0, F_z(z_(2)), ..., F_z(z_(M)), 1, so the weights telescope to 1.
/// `input_dims` is the number of random inputs; anything but 1 throws
/// UnsupportedEstimatorError.
EmpiricalCDF estimate_cdf_weighted(std::span<const double> z_samples, const std::function<double(double)>& F_z,
                                   const PiMatrix& pi, std::size_t input_dims = 1);

/// Weights used by estimate_cdf_weighted, in the input order of z_samples.
std::vector<double> quadrature_weights(std::span<const double> z_samples, const std::function<double(double)>& F_z);

/// F(K_j) = fraction of samples <= K_j.
EmpiricalCDF empirical_cdf_from_samples(std::span<const double> k_samples, std::span<const double> K_grid);

/// sum (F_est - F_ref)^2 / sum F_ref^2. Throws ShapeError on mismatched grids.
double relative_error(const EmpiricalCDF& estimate, const EmpiricalCDF& reference);

/// (1/N) sum (k_exact - k)^2.
double mse_error(std::span<const double> k_num, std::span<const double> k_exact);

/// log2(eps_coarse / eps_fine). Throws DomainError for non-positive input.
double convergence_rate(double eps_coarse, double eps_fine);

/// Fills in rates between successive entries.
std::vector<ErrorReport> convergence_table(std::span<const double> params, std::span<const double> eps);

/// N equidistant points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Audit output: header "K,F".
void write_cdf_csv(std::ostream& out, const EmpiricalCDF& cdf);

}  // namespace kwcdf
