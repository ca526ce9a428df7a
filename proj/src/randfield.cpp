#include "kwcdf/randfield.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "kwcdf/csv.hpp"
#include "kwcdf/errors.hpp"

namespace kwcdf {

double ScalarDistSpec::sigma() const { return std::sqrt(sigma2); }

double ScalarDistSpec::mean() const { return std::exp(mu + 0.5 * sigma2); }

double ScalarDistSpec::cdf(double z) const {
    if (z <= 0.0) return 0.0;
    const double s = sigma();
    const double y = std::log(z) - mu;
    if (s == 0.0) return y >= 0.0 ? 1.0 : 0.0;
    return 0.5 * std::erfc(-y / (s * std::sqrt(2.0)));
}

void FieldSpec::validate() const {
    if (!(mean > 0.0)) throw DomainError(fmt::format("field mean must be positive, got {}", mean));
    if (!(std >= 0.0)) throw DomainError(fmt::format("field std must be non-negative, got {}", std));
    if (!(corr_length > 0.0))
        throw DomainError(fmt::format("correlation length must be positive, got {}", corr_length));
    if (grid.size() < 2) throw DomainError("field grid needs at least 2 points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw DomainError("field grid must be strictly increasing");
}

GridField::GridField(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() != values_.size())
        throw ShapeError(fmt::format("grid has {} points but {} values", grid_.size(), values_.size()));
    if (grid_.empty()) throw ShapeError("empty grid field");
}

std::size_t GridField::interval(double x) const {
    // index i with grid[i] <= x < grid[i+1], clamped to [0, n-2]
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - grid_.begin() - 1, 0));
    return std::min(i, grid_.size() - 2);
}

double GridField::operator()(double x) const {
    if (grid_.size() == 1 || x <= grid_.front()) return values_.front();
    if (x >= grid_.back()) return values_.back();
    const std::size_t i = interval(x);
    const double w = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
    if (w == 0.0) return values_[i];
    return (1.0 - w) * values_[i] + w * values_[i + 1];
}

double GridField::spacing_at(double x) const {
    if (grid_.size() < 2) return 0.0;
    const std::size_t i = interval(x);
    return grid_[i + 1] - grid_[i];
}

double interpolate(const GridField& field, double x) { return field(x); }

double Realization::scalar(const std::string& name) const {
    for (const auto& [key, value] : scalars)
        if (key == name) return value;
    throw std::out_of_range("realization has no scalar '" + name + "'");
}

bool Realization::has_scalar(const std::string& name) const {
    return std::any_of(scalars.begin(), scalars.end(), [&](const auto& kv) { return kv.first == name; });
}

const GridField& Realization::field(const std::string& name) const {
    for (const auto& [key, value] : fields)
        if (key == name) return value;
    throw std::out_of_range("realization has no field '" + name + "'");
}

ScalarDistSpec lognormal_params_from_moments(double mean, double std) {
    if (!(mean > 0.0)) throw DomainError(fmt::format("lognormal mean must be positive, got {}", mean));
    if (!(std >= 0.0)) throw DomainError(fmt::format("lognormal std must be non-negative, got {}", std));
    const double m2 = mean * mean;
    const double v = std * std;
    return {std::log(m2 / std::sqrt(m2 + v)), std::log1p(v / m2)};
}

double sample_scalar(const ScalarDistSpec& spec, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double g = normal(rng);
    return std::exp(spec.mu + spec.sigma() * g);
}

namespace {

Eigen::MatrixXd exponential_covariance_factor(const FieldSpec& spec, double sigma2) {
    const auto n = static_cast<Eigen::Index>(spec.grid.size());
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double c = sigma2 * std::exp(-std::abs(spec.grid[i] - spec.grid[j]) / spec.corr_length);
            cov(i, j) = c;
            cov(j, i) = c;
        }
        cov(i, i) += 1e-12 * sigma2;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
        const double pivot = ldlt.vectorD().minCoeff();
        throw NumericError(
            fmt::format("covariance Cholesky failed (n={}, corr_length={}): smallest pivot {:.3e}", n,
                        spec.corr_length, pivot));
    }
    return llt.matrixL();
}

}  // namespace

FieldSampler::FieldSampler(FieldSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    log_params_ = lognormal_params_from_moments(spec_.mean, spec_.std);
    if (log_params_.sigma2 > 0.0) lower_ = exponential_covariance_factor(spec_, log_params_.sigma2);
}

GridField FieldSampler::sample(Rng& rng) const {
    const std::size_t n = spec_.grid.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd g(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) g[static_cast<Eigen::Index>(i)] = normal(rng);

    std::vector<double> values(n, spec_.mean);
    if (log_params_.sigma2 > 0.0) {
        const Eigen::VectorXd y = lower_.triangularView<Eigen::Lower>() * g;
        for (std::size_t i = 0; i < n; ++i) values[i] = std::exp(log_params_.mu + y[static_cast<Eigen::Index>(i)]);
    }
    return GridField(spec_.grid, std::move(values));
}

GridField sample_field(const FieldSpec& spec, Rng& rng) { return FieldSampler(spec).sample(rng); }

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t realization_seed(std::uint64_t master_seed, std::int64_t index) {
    return splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

void write_realizations_csv(std::ostream& out, std::span<const Realization> realizations) {
    if (realizations.empty()) return;
    const Realization& first = realizations.front();
    std::vector<std::string> header{"index", "seed"};
    for (const auto& [name, value] : first.scalars) header.push_back(name);
    for (const auto& [name, field] : first.fields)
        for (std::size_t i = 0; i < field.size(); ++i) header.push_back(fmt::format("{}[{}]", name, i));
    csv::write_row(out, header);

    for (const Realization& r : realizations) {
        std::vector<std::string> row{std::to_string(r.index), std::to_string(r.seed)};
        for (const auto& [name, value] : r.scalars) row.push_back(csv::real(value));
        for (const auto& [name, field] : r.fields)
            for (double v : field.values()) row.push_back(csv::real(v));
        csv::write_row(out, row);
    }
}

std::vector<Realization> read_realizations_csv(std::istream& in,
                                               const std::vector<std::vector<double>>& field_grids) {
    std::vector<Realization> out;
    std::string line;
    if (!std::getline(in, line)) return out;
    const std::vector<std::string> header = csv::split(line);
    if (header.size() < 2 || header[0] != "index" || header[1] != "seed")
        throw ShapeError("realization sidecar must start with index,seed");

    // Column layout: scalars are plain names, field columns are name[i].
    std::vector<std::string> scalar_names;
    std::vector<std::pair<std::string, std::size_t>> field_layout;
    for (std::size_t c = 2; c < header.size(); ++c) {
        const std::string& h = header[c];
        const auto bracket = h.find('[');
        if (bracket == std::string::npos) {
            scalar_names.push_back(h);
            continue;
        }
        const std::string name = h.substr(0, bracket);
        if (field_layout.empty() || field_layout.back().first != name) field_layout.emplace_back(name, 0);
        ++field_layout.back().second;
    }
    if (!field_grids.empty() && field_grids.size() != field_layout.size())
        throw ShapeError("number of field grids does not match the sidecar");

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = csv::split(line);
        if (cells.size() != header.size())
            throw ShapeError(fmt::format("sidecar row has {} cells, header has {}", cells.size(), header.size()));
        Realization r;
        r.index = std::stoll(cells[0]);
        r.seed = std::stoull(cells[1]);
        std::size_t c = 2;
        for (const std::string& name : scalar_names) r.scalars.emplace_back(name, std::stod(cells[c++]));
        for (std::size_t f = 0; f < field_layout.size(); ++f) {
            const auto& [name, count] = field_layout[f];
            std::vector<double> values(count);
            for (std::size_t i = 0; i < count; ++i) values[i] = std::stod(cells[c++]);
            std::vector<double> grid;
            if (field_grids.empty()) {
                grid.resize(count);
                for (std::size_t i = 0; i < count; ++i) grid[i] = static_cast<double>(i);
            } else {
                grid = field_grids[f];
            }
            r.fields.emplace_back(name, GridField(std::move(grid), std::move(values)));
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace kwcdf
