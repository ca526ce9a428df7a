#include "kwcdf/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "kwcdf/csv.hpp"
#include "kwcdf/errors.hpp"

namespace kwcdf {

namespace {

void check_rows(const PiMatrix& pi) {
    if (pi.rows.empty()) throw EmptyEnsembleError("no realizations to average");
    for (const auto& row : pi.rows)
        if (row.size() != pi.K_grid.size())
            throw ShapeError(fmt::format("Pi row has {} entries, K grid has {}", row.size(), pi.K_grid.size()));
}

}  // namespace

EmpiricalCDF estimate_cdf_mc(const PiMatrix& pi) {
    check_rows(pi);
    const std::size_t n = pi.K_grid.size();
    std::vector<std::size_t> counts(n, 0);
    for (const auto& row : pi.rows)
        for (std::size_t j = 0; j < n; ++j) counts[j] += row[j];
    EmpiricalCDF out{pi.K_grid, std::vector<double>(n)};
    const auto M = static_cast<double>(pi.rows.size());
    for (std::size_t j = 0; j < n; ++j) out.F_values[j] = static_cast<double>(counts[j]) / M;
    return out;
}

std::vector<double> quadrature_weights(std::span<const double> z, const std::function<double(double)>& F_z) {
    const std::size_t M = z.size();
    if (M == 0) throw EmptyEnsembleError("no realizations to weight");
    std::vector<std::size_t> order(M);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });

    std::vector<double> cuts(M + 1);
    cuts[0] = 0.0;
    for (std::size_t k = 1; k < M; ++k) cuts[k] = std::clamp(F_z(z[order[k]]), 0.0, 1.0);
    cuts[M] = 1.0;

    std::vector<double> w(M);
    for (std::size_t k = 0; k < M; ++k) w[order[k]] = cuts[k + 1] - cuts[k];
    return w;
}

EmpiricalCDF estimate_cdf_weighted(std::span<const double> z_samples, const std::function<double(double)>& F_z,
                                   const PiMatrix& pi, std::size_t input_dims) {
    if (input_dims != 1)
        throw UnsupportedEstimatorError(fmt::format(
            "the weighted estimator needs exactly one scalar input, got {}; use estimate_cdf_mc", input_dims));
    check_rows(pi);
    if (z_samples.size() != pi.rows.size())
        throw ShapeError(fmt::format("{} z samples for {} Pi rows", z_samples.size(), pi.rows.size()));

    const std::vector<double> w = quadrature_weights(z_samples, F_z);
    const std::size_t n = pi.K_grid.size();
    EmpiricalCDF out{pi.K_grid, std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < pi.rows.size(); ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (pi.rows[i][j]) out.F_values[j] += w[i];
    for (double& f : out.F_values) f = std::clamp(f, 0.0, 1.0);
    return out;
}

EmpiricalCDF empirical_cdf_from_samples(std::span<const double> k_samples, std::span<const double> K_grid) {
    if (k_samples.empty()) throw EmptyEnsembleError("no samples");
    std::vector<double> sorted(k_samples.begin(), k_samples.end());
    std::sort(sorted.begin(), sorted.end());
    EmpiricalCDF out{{K_grid.begin(), K_grid.end()}, std::vector<double>(K_grid.size())};
    const auto M = static_cast<double>(sorted.size());
    for (std::size_t j = 0; j < K_grid.size(); ++j) {
        const auto count = std::upper_bound(sorted.begin(), sorted.end(), K_grid[j]) - sorted.begin();
        out.F_values[j] = static_cast<double>(count) / M;
    }
    return out;
}

double relative_error(const EmpiricalCDF& estimate, const EmpiricalCDF& reference) {
    if (estimate.K_grid != reference.K_grid || estimate.F_values.size() != reference.F_values.size())
        throw ShapeError("CDFs are on different K grids");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < reference.F_values.size(); ++j) {
        const double d = estimate.F_values[j] - reference.F_values[j];
        num += d * d;
        den += reference.F_values[j] * reference.F_values[j];
    }
    if (num == 0.0) return 0.0;
    if (den == 0.0) throw DomainError("reference CDF is identically zero");
    return num / den;
}

double mse_error(std::span<const double> k_num, std::span<const double> k_exact) {
    if (k_num.size() != k_exact.size())
        throw ShapeError(fmt::format("{} values against {} exact values", k_num.size(), k_exact.size()));
    if (k_num.empty()) throw ShapeError("empty arrays");
    double acc = 0.0;
    for (std::size_t i = 0; i < k_num.size(); ++i) acc += (k_exact[i] - k_num[i]) * (k_exact[i] - k_num[i]);
    return acc / static_cast<double>(k_num.size());
}

double convergence_rate(double eps_coarse, double eps_fine) {
    if (!(eps_coarse > 0.0) || !(eps_fine > 0.0))
        throw DomainError(fmt::format("errors must be positive, got {} and {}", eps_coarse, eps_fine));
    return std::log2(eps_coarse / eps_fine);
}

std::vector<ErrorReport> convergence_table(std::span<const double> params, std::span<const double> eps) {
    if (params.size() != eps.size()) throw ShapeError("parameter and error lists differ in length");
    std::vector<ErrorReport> out;
    for (std::size_t i = 0; i < params.size(); ++i) {
        ErrorReport r{params[i], eps[i], std::nullopt};
        if (i > 0) r.rate = convergence_rate(eps[i - 1], eps[i]);
        out.push_back(r);
    }
    return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = hi;
    return out;
}

void write_cdf_csv(std::ostream& out, const EmpiricalCDF& cdf) {
    out << "K,F\n";
    for (std::size_t j = 0; j < cdf.K_grid.size(); ++j)
        out << csv::real(cdf.K_grid[j]) << ',' << csv::real(cdf.F_values[j]) << '\n';
}

}  // namespace kwcdf
