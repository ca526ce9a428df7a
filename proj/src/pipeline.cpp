#include "kwcdf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "kwcdf/characteristics.hpp"
#include "kwcdf/csv.hpp"
#include "kwcdf/errors.hpp"
#include "kwcdf/parallel.hpp"

namespace kwcdf {

namespace fs = std::filesystem;

namespace {

ProblemSpec base_problem(const ExperimentConfig& c) {
    return c.problem == "coupled" ? make_coupled().v1 : make_problem(c.problem, c.params);
}

std::ofstream open_out(const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError(fmt::format("cannot write {}", file.string()));
    return out;
}

std::string method_label(const std::string& method, const ExperimentConfig& c) {
    if (c.problem != "saint-venant") return method;
    return fmt::format("{}[S={}]", method, to_string(c.params.source_case));
}

// Rates are reported only between successive halvings (or doublings) of the parameter.
std::vector<ErrorReport> with_rates(std::span<const double> params, std::span<const double> eps) {
    std::vector<ErrorReport> rows;
    for (std::size_t i = 0; i < params.size(); ++i) {
        ErrorReport r{params[i], eps[i], std::nullopt};
        if (i > 0 && eps[i - 1] > 0.0 && eps[i] > 0.0) {
            const double ratio = params[i - 1] / params[i];
            if (std::abs(ratio - 2.0) < 1e-9 || std::abs(ratio - 0.5) < 1e-9)
                r.rate = convergence_rate(eps[i - 1], eps[i]);
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

Experiment::Experiment(ExperimentConfig config)
    : config_(std::move(config)),
      problem_(base_problem(config_)),
      coupled_(config_.problem == "coupled" ? std::optional<CoupledSystem>(make_coupled()) : std::nullopt),
      K_grid_(config_.K_grid.values()),
      source_(problem_, config_.master_seed) {}

std::vector<std::uint8_t> Experiment::pi_row(const Realization& r) const {
    const double t = config_.query_t;
    const Vec3& x = config_.query_x;
    if (coupled_) {
        const double dt = config_.numerics.dt_char;
        const ProblemSpec& v1 = coupled_->v1;
        const ProblemSpec& v2 = coupled_->v2;
        const double s1 = step_location(v1, r, x, t, dt, v1.k_min, v1.k_max);
        const double s2 = step_location(v2, r, x, t, dt, v2.k_min, v2.k_max);
        const auto [k1, k2] = recombine_pi(s1, s2);
        const double k = config_.component == "k1" ? k1 : k2;
        std::vector<std::uint8_t> row(K_grid_.size());
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = K_grid_[j] - k >= 0.0 ? 1 : 0;
        return row;
    }
    const double step = characteristic_step(problem_, r, config_.numerics.dt_char);
    return solve_pi_profile(problem_, r, x, t, K_grid_, step, config_.numerics.search).pi_values;
}

std::optional<McsProfile> Experiment::direct_profile(const Realization& r) const {
    if (coupled_ || !problem_.conservative) return std::nullopt;
    return solve_mcs(problem_, r, config_.query_t, config_.numerics.n_x, config_.numerics.dt_weno,
                     config_.numerics.weno);
}

double Experiment::direct_sample(const Realization& r) const {
    const std::optional<McsProfile> p = direct_profile(r);
    if (p) return sample_profile(*p, config_.query_x[0]);
    return exact_sample(r);
}

double Experiment::exact_sample(const Realization& r) const {
    if (coupled_) {
        const SpaceTimeFn& f = config_.component == "k1" ? coupled_->exact_k1 : coupled_->exact_k2;
        return f(config_.query_x, config_.query_t, r);
    }
    if (!problem_.has_exact()) throw ConfigError(fmt::format("problem '{}' has no exact solution", problem_.name));
    return problem_.exact(config_.query_x, config_.query_t, r);
}

EmpiricalCDF Experiment::estimate(std::span<const Realization> realizations, const PiMatrix& pi) const {
    if (config_.estimator == Estimator::mc) return estimate_cdf_mc(pi);
    std::vector<double> z;
    z.reserve(realizations.size());
    for (const Realization& r : realizations) z.push_back(r.scalars.at(0).second);
    const ScalarDistSpec spec = problem_.scalar_inputs.at(0).second;
    return estimate_cdf_weighted(z, [spec](double v) { return spec.cdf(v); }, pi,
                                 problem_.scalar_inputs.size() + problem_.field_inputs.size());
}

std::optional<EmpiricalCDF> reference_cdf(const Experiment& e, std::span<const double> own_mcs, std::size_t jobs) {
    const ExperimentConfig& c = e.config();
    switch (c.reference.kind) {
        case ReferenceKind::none: return std::nullopt;
        case ReferenceKind::self: return empirical_cdf_from_samples(own_mcs, e.K_grid());
        case ReferenceKind::exact: {
            ExperimentConfig rc = c;
            rc.master_seed = c.reference.seed;
            const Experiment ref(rc);
            const std::size_t n = c.reference.draws;
            const std::size_t chunks = std::min<std::size_t>(64, n);
            auto parts = parallel_map<std::vector<double>>(chunks, jobs, [&](std::size_t k) {
                std::vector<double> v;
                for (std::size_t i = k * n / chunks; i < (k + 1) * n / chunks; ++i)
                    v.push_back(ref.exact_sample(ref.realization(static_cast<std::int64_t>(i))));
                return v;
            });
            std::vector<double> samples;
            samples.reserve(n);
            for (auto& p : parts) {
                if (!p.ok()) throw NumericError("reference sampling failed: " + p.error);
                samples.insert(samples.end(), p.value->begin(), p.value->end());
            }
            return empirical_cdf_from_samples(samples, e.K_grid());
        }
        case ReferenceKind::mcs: {
            ExperimentConfig rc = c;
            rc.master_seed = c.reference.seed;
            const Experiment ref(rc);
            auto out = parallel_map<double>(c.reference.M, jobs, [&](std::size_t i) {
                return ref.direct_sample(ref.realization(static_cast<std::int64_t>(i)));
            });
            std::vector<double> samples;
            for (const auto& o : out)
                if (o.ok()) samples.push_back(*o.value);
            if (samples.size() + static_cast<std::size_t>(kMaxFailureFraction * static_cast<double>(out.size())) <
                out.size())
                throw NumericError(fmt::format("reference ensemble: {} of {} realizations failed",
                                               out.size() - samples.size(), out.size()));
            return empirical_cdf_from_samples(samples, e.K_grid());
        }
    }
    return std::nullopt;
}

EnsembleResult run_ensemble(const ExperimentConfig& config, std::size_t jobs) {
    const Experiment e(config);
    std::size_t M = config.M;
    std::vector<std::size_t> M_values;
    if (config.sweep.kind == SweepKind::M) {
        for (double v : config.sweep.values) M_values.push_back(static_cast<std::size_t>(v));
        M = std::max(M, M_values.back());
    } else {
        M_values.push_back(M);
    }

    EnsembleResult res;
    res.K_grid = e.K_grid();
    res.M_values = M_values;

    std::vector<Realization> reals(M);
    for (std::size_t i = 0; i < M; ++i) reals[i] = e.realization(static_cast<std::int64_t>(i));

    const bool do_cdf = config.method != Method::mcs;
    const bool do_mcs = config.method != Method::cdf;

    std::vector<Outcome<std::vector<std::uint8_t>>> rows;
    if (do_cdf)
        rows = parallel_map<std::vector<std::uint8_t>>(M, jobs, [&](std::size_t i) { return e.pi_row(reals[i]); });

    struct Direct {
        double value;
        std::optional<McsProfile> profile;
    };
    std::vector<Outcome<Direct>> direct;
    if (do_mcs)
        direct = parallel_map<Direct>(M, jobs, [&](std::size_t i) {
            std::optional<McsProfile> p = e.direct_profile(reals[i]);
            const double v = p ? sample_profile(*p, config.query_x[0]) : e.exact_sample(reals[i]);
            if (!config.audit) p.reset();
            return Direct{v, std::move(p)};
        });

    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!rows[i].ok()) res.failures.push_back({static_cast<std::int64_t>(i), "cdf", rows[i].error});
    for (std::size_t i = 0; i < direct.size(); ++i)
        if (!direct[i].ok()) res.failures.push_back({static_cast<std::int64_t>(i), "mcs", direct[i].error});

    std::vector<double> all_mcs;
    for (const auto& d : direct)
        if (d.ok()) all_mcs.push_back(d.value->value);
    if (do_mcs && !all_mcs.empty()) res.reference = reference_cdf(e, all_mcs, jobs);
    else if (config.reference.kind != ReferenceKind::self) res.reference = reference_cdf(e, {}, jobs);

    auto cdf_at = [&](std::size_t m) {
        std::vector<Realization> used;
        PiMatrix pi{res.K_grid, {}};
        for (std::size_t i = 0; i < m; ++i) {
            if (!rows[i].ok()) continue;
            used.push_back(reals[i]);
            pi.rows.push_back(*rows[i].value);
        }
        return e.estimate(used, pi);
    };
    auto mcs_at = [&](std::size_t m) {
        std::vector<double> s;
        for (std::size_t i = 0; i < m; ++i)
            if (direct[i].ok()) s.push_back(direct[i].value->value);
        return empirical_cdf_from_samples(s, res.K_grid);
    };

    for (std::size_t m : M_values) {
        if (res.reference) {
            res.eps_cdf.push_back(do_cdf ? relative_error(cdf_at(m), *res.reference) : std::nan(""));
            res.eps_mcs.push_back(do_mcs ? relative_error(mcs_at(m), *res.reference) : std::nan(""));
        }
    }
    if (do_cdf) res.cdf = cdf_at(M);
    if (do_mcs) res.mcs = mcs_at(M);

    if (config.audit) {
        res.realizations = reals;
        for (const auto& r : rows) res.pi_rows.push_back(r.ok() ? *r.value : std::vector<std::uint8_t>{});
        for (const auto& d : direct)
            if (d.ok() && d.value->profile) res.profiles.push_back(*d.value->profile);
    }
    return res;
}

void check_failures(const EnsembleResult& result, std::size_t M) {
    std::vector<std::int64_t> idx;
    for (const auto& f : result.failures) idx.push_back(f.index);
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    if (static_cast<double>(idx.size()) > kMaxFailureFraction * static_cast<double>(M))
        throw NumericError(fmt::format("{} of {} realizations failed (first: realization {}, {}: {})", idx.size(), M,
                                       result.failures.front().index, result.failures.front().method,
                                       result.failures.front().message));
}

std::vector<ErrorReport> run_convergence(const ExperimentConfig& config, std::size_t jobs) {
    const std::vector<double>& params = config.sweep.values;
    std::vector<double> eps;

    switch (config.sweep.kind) {
        case SweepKind::none: throw ConfigError("sweep: the convergence command needs a sweep");
        case SweepKind::dt: {
            const Experiment e(config);
            const ProblemSpec& p = e.problem();
            if (p.dim != 1) throw ConfigError("sweep.kind: dt sweeps are one-dimensional");
            const Realization r = e.realization(0);
            const std::vector<double> xs = linspace(p.domain.lo[0], p.domain.hi[0], config.convergence_points);
            const double K_lo = p.k_floor ? *p.k_floor : p.k_min - 1.0;
            const double K_hi = p.k_max + 1.0;
            std::vector<double> exact;
            for (double x : xs) exact.push_back(p.exact(vec1(x), config.query_t, r));
            for (double dt : params) {
                auto out = parallel_map<double>(xs.size(), jobs, [&](std::size_t i) {
                    return step_location(p, r, vec1(xs[i]), config.query_t, dt, K_lo, K_hi, 1e-13);
                });
                std::vector<double> num;
                for (const auto& o : out) {
                    if (!o.ok()) throw NumericError(o.error);
                    num.push_back(*o.value);
                }
                eps.push_back(mse_error(num, exact));
            }
            break;
        }
        case SweepKind::dx: {
            const Experiment e(config);
            const ProblemSpec& p = e.problem();
            const Realization r = e.realization(0);
            auto out = parallel_map<double>(params.size(), jobs, [&](std::size_t k) {
                const auto cells = static_cast<std::size_t>(std::llround(p.domain.extent(0) / params[k]));
                const McsProfile prof =
                    solve_mcs(p, r, config.query_t, cells, config.numerics.dt_weno, config.numerics.weno);
                std::vector<double> exact;
                for (double x : prof.x) exact.push_back(p.exact(vec1(x), config.query_t, r));
                return std::sqrt(mse_error(prof.q, exact));
            });
            for (const auto& o : out) {
                if (!o.ok()) throw NumericError(o.error);
                eps.push_back(*o.value);
            }
            break;
        }
        case SweepKind::M: {
            if (config.reference.kind == ReferenceKind::none)
                throw ConfigError("reference.kind: an M sweep needs a reference");
            const EnsembleResult res = run_ensemble(config, jobs);
            check_failures(res, *std::max_element(res.M_values.begin(), res.M_values.end()));
            eps = config.method == Method::mcs ? res.eps_mcs : res.eps_cdf;
            break;
        }
    }
    return with_rates(params, eps);
}

std::vector<TimingRow> run_benchmark(const ExperimentConfig& config) {
    std::vector<ExperimentConfig> cases;
    if (config.problem == "saint-venant") {
        for (SourceCase s : {SourceCase::zero, SourceCase::one, SourceCase::x}) {
            ExperimentConfig c = config;
            c.params.source_case = s;
            cases.push_back(c);
        }
    } else {
        cases.push_back(config);
    }

    using clock = std::chrono::steady_clock;
    std::vector<TimingRow> rows;
    std::vector<TimingRow> summary;
    for (const ExperimentConfig& c : cases) {
        const Experiment e(c);
        const std::string cdf = method_label("cdf", c);
        const std::string mcs = method_label("mcs", c);
        double sum_cdf = 0.0;
        double sum_mcs = 0.0;
        for (std::size_t i = 0; i < c.benchmark_realizations; ++i) {
            const Realization r = e.realization(static_cast<std::int64_t>(i));
            auto t0 = clock::now();
            const auto row = e.pi_row(r);
            const double t_cdf = std::chrono::duration<double>(clock::now() - t0).count();
            t0 = clock::now();
            const double v = e.direct_sample(r);
            const double t_mcs = std::chrono::duration<double>(clock::now() - t0).count();
            if (row.empty() || !std::isfinite(v)) throw NumericError("benchmark realization produced no result");
            rows.push_back({std::to_string(i), cdf, t_cdf});
            rows.push_back({std::to_string(i), mcs, t_mcs});
            sum_cdf += t_cdf;
            sum_mcs += t_mcs;
        }
        const auto n = static_cast<double>(c.benchmark_realizations);
        summary.push_back({"mean", cdf, sum_cdf / n});
        summary.push_back({"mean", mcs, sum_mcs / n});
        summary.push_back({"ratio", method_label("mcs/cdf", c), sum_mcs / sum_cdf});
    }
    rows.insert(rows.end(), summary.begin(), summary.end());
    return rows;
}

void write_cdf_table(const fs::path& file, const EnsembleResult& r) {
    std::ofstream out = open_out(file);
    std::vector<std::string> header{"K"};
    if (r.cdf) header.emplace_back("F_cdf");
    if (r.mcs) header.emplace_back("F_mcs");
    csv::write_row(out, header);
    for (std::size_t j = 0; j < r.K_grid.size(); ++j) {
        std::vector<std::string> row{csv::real(r.K_grid[j])};
        if (r.cdf) row.push_back(csv::real(r.cdf->F_values[j]));
        if (r.mcs) row.push_back(csv::real(r.mcs->F_values[j]));
        csv::write_row(out, row);
    }
}

void write_error_table(const fs::path& file, const EnsembleResult& r) {
    std::ofstream out = open_out(file);
    csv::write_row(out, {"M", "eps_cdf", "eps_mcs"});
    for (std::size_t i = 0; i < r.eps_cdf.size(); ++i)
        csv::write_row(out, {std::to_string(r.M_values[i]), csv::real(r.eps_cdf[i]), csv::real(r.eps_mcs[i])});
}

void write_convergence_table(const fs::path& file, std::span<const ErrorReport> rows) {
    std::ofstream out = open_out(file);
    csv::write_row(out, {"param", "eps", "rate"});
    for (const ErrorReport& r : rows)
        csv::write_row(out, {csv::real(r.grid_param), csv::real(r.eps), r.rate ? csv::real(*r.rate) : ""});
}

void write_timing_table(const fs::path& file, std::span<const TimingRow> rows) {
    std::ofstream out = open_out(file);
    csv::write_row(out, {"realization", "method", "seconds"});
    for (const TimingRow& r : rows) csv::write_row(out, {r.realization, r.method, csv::real(r.seconds)});
}

void write_failures_table(const fs::path& file, std::span<const RealizationFailure> failures) {
    std::ofstream out = open_out(file);
    csv::write_row(out, {"realization", "method", "message"});
    for (const RealizationFailure& f : failures) csv::write_row(out, {std::to_string(f.index), f.method, f.message});
}

void write_audit(const fs::path& dir, const EnsembleResult& r) {
    {
        std::ofstream out = open_out(dir / "realizations.csv");
        write_realizations_csv(out, r.realizations);
    }
    for (std::size_t i = 0; i < r.pi_rows.size(); ++i) {
        if (r.pi_rows[i].empty()) continue;
        std::ofstream out = open_out(dir / "pi" / fmt::format("{}.csv", i));
        PiSolution s;
        s.K_grid = r.K_grid;
        s.pi_values = r.pi_rows[i];
        write_pi_csv(out, s);
    }
    for (std::size_t i = 0; i < r.profiles.size(); ++i) {
        std::ofstream out = open_out(dir / "profiles" / fmt::format("{}.csv", i));
        write_profile_csv(out, r.profiles[i]);
    }
}

void write_manifest(const fs::path& dir, const ExperimentConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs) {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["config_hash"] = fnv1a_hex(config.canonical);
    m["master_seed"] = config.master_seed;
    m["problem"] = config.problem;
    m["versions"] = {{"randfield", kVersion}, {"characteristics", kVersion}, {"weno", kVersion},
                     {"ensemble", kVersion},  {"problems", kVersion},        {"cli", kVersion}};
    m["outputs"] = outputs;
    std::ofstream out = open_out(dir / "manifest.json");
    out << m.dump(2) << '\n';
}

}  // namespace kwcdf
