// Command-line front end: run, convergence, benchmark, list-problems.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure
// (including more than 1% of realizations failing).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "kwcdf/config.hpp"
#include "kwcdf/errors.hpp"
#include "kwcdf/parallel.hpp"
#include "kwcdf/pipeline.hpp"
#include "kwcdf/problems.hpp"

namespace fs = std::filesystem;
using namespace kwcdf;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 0;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Override master_seed");
    cmd->add_option("--jobs", c.jobs, "Worker threads (default: hardware concurrency)");
    cmd->add_option("--out", c.out, "Override output_dir");
}

ExperimentConfig resolve(const Common& c) {
    ExperimentConfig config = load_config(c.config);
    if (c.seed) config.master_seed = *c.seed;
    if (!c.out.empty()) config.output_dir = c.out;
    return config;
}

std::size_t jobs_of(const Common& c) { return c.jobs == 0 ? default_jobs() : c.jobs; }

std::string command_line(const std::string& name, const Common& c) {
    std::string s = fmt::format("kwcdf {} --config {}", name, c.config);
    if (c.seed) s += fmt::format(" --seed {}", *c.seed);
    if (!c.out.empty()) s += fmt::format(" --out {}", c.out);
    return s;
}

int cmd_run(const Common& c) {
    const ExperimentConfig config = resolve(c);
    const fs::path dir = config.output_dir;
    const EnsembleResult res = run_ensemble(config, jobs_of(c));

    std::vector<std::string> outputs;
    if (!res.failures.empty()) {
        write_failures_table(dir / "failures.csv", res.failures);
        outputs.emplace_back("failures.csv");
    }
    std::size_t M = config.M;
    for (std::size_t m : res.M_values) M = std::max(M, m);
    check_failures(res, M);

    write_cdf_table(dir / "cdf.csv", res);
    outputs.emplace_back("cdf.csv");
    if (!res.eps_cdf.empty()) {
        write_error_table(dir / "error.csv", res);
        outputs.emplace_back("error.csv");
    }
    if (config.audit) {
        write_audit(dir / "audit", res);
        outputs.emplace_back("audit/");
    }
    write_manifest(dir, config, command_line("run", c), outputs);
    std::cout << fmt::format("wrote {} ({} realizations, {} failed)\n", (dir / "cdf.csv").string(), M,
                             res.failures.size());
    return 0;
}

int cmd_convergence(const Common& c) {
    const ExperimentConfig config = resolve(c);
    const fs::path dir = config.output_dir;
    const std::vector<ErrorReport> rows = run_convergence(config, jobs_of(c));
    write_convergence_table(dir / "convergence.csv", rows);
    write_manifest(dir, config, command_line("convergence", c), {"convergence.csv"});
    for (const ErrorReport& r : rows)
        std::cout << fmt::format("{:>12g}  eps={:.6e}  rate={}\n", r.grid_param, r.eps,
                                 r.rate ? fmt::format("{:.3f}", *r.rate) : "-");
    return 0;
}

int cmd_benchmark(const Common& c) {
    const ExperimentConfig config = resolve(c);
    const fs::path dir = config.output_dir;
    const std::vector<TimingRow> rows = run_benchmark(config);
    write_timing_table(dir / "timing.csv", rows);
    write_manifest(dir, config, command_line("benchmark", c), {"timing.csv"});
    for (const TimingRow& r : rows)
        if (r.realization == "mean" || r.realization == "ratio")
            std::cout << fmt::format("{:<6} {:<16} {:.6g}\n", r.realization, r.method, r.seconds);
    return 0;
}

int cmd_list() {
    for (const std::string& id : catalog_ids()) {
        if (id == "coupled") {
            std::cout << fmt::format("{:<20} two-component linear system, decoupled into opposite advections\n", id);
            continue;
        }
        const ProblemSpec p = make_problem(id, {});
        std::cout << fmt::format("{:<20} {}\n", id, p.description);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-point CDFs of random hyperbolic conservation laws"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common run_opts;
    Common conv_opts;
    Common bench_opts;
    CLI::App* run = app.add_subcommand("run", "Estimate the CDF at the query point");
    add_common(run, run_opts);
    CLI::App* conv = app.add_subcommand("convergence", "Error table of a dt, dx or M sweep");
    add_common(conv, conv_opts);
    CLI::App* bench = app.add_subcommand("benchmark", "Per-realization timing of both methods");
    add_common(bench, bench_opts);
    CLI::App* list = app.add_subcommand("list-problems", "List the problem catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*conv) return cmd_convergence(conv_opts);
        if (*bench) return cmd_benchmark(bench_opts);
        if (*list) return cmd_list();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const UnsupportedEstimatorError& e) {
        std::cerr << "unsupported estimator: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const EmptyEnsembleError& e) {
        std::cerr << "empty ensemble: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
