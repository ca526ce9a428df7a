#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string cli = KWCDF_CLI;
const fs::path configs = KWCDF_CONFIGS;

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = "\"" + cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("kwcdf_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("list-problems") {
    const fs::path dir = scratch("list");
    CHECK(run("list-problems", dir / "log") == 0);
    const std::string out = slurp(dir / "log");
    for (const char* id : {"test1d-deterministic", "test1d-stochastic", "3d", "coupled", "burgers", "saint-venant"})
        CHECK(out.find(id) != std::string::npos);
}

TEST_CASE("usage and config errors exit with 2") {
    const fs::path dir = scratch("errors");
    CHECK(run("", dir / "log") == 2);
    CHECK(run("run", dir / "log") == 2);
    CHECK(run("run --config /nonexistent.json", dir / "log") == 2);

    write(dir / "bad.json", "{\n  \"problem\": \"3d\",\n  \"colour\": 1\n}\n");
    CHECK(run("run --config " + (dir / "bad.json").string(), dir / "log") == 2);
    CHECK(slurp(dir / "log").find("bad.json:3: colour: unknown key") != std::string::npos);

    write(dir / "floor.json", R"({"problem": "saint-venant", "K_grid": {"min": 0.0, "max": 1.0}})");
    CHECK(run("run --config " + (dir / "floor.json").string(), dir / "log") == 2);
}

TEST_CASE("run writes the outputs and manifest") {
    const fs::path dir = scratch("run");
    write(dir / "cfg.json", R"({
  "problem": "3d",
  "method": "both",
  "M": 8,
  "K_grid": {"min": -1.2, "max": -0.4, "n": 21},
  "reference": {"kind": "exact", "draws": 1000},
  "audit": true
})");
    const std::string base = "run --config " + (dir / "cfg.json").string() + " --seed 11";
    REQUIRE(run(base + " --jobs 1 --out " + (dir / "a").string(), dir / "log") == 0);
    REQUIRE(run(base + " --jobs 3 --out " + (dir / "b").string(), dir / "log") == 0);
    // The manifests differ only in the --out path of the recorded command.
    CHECK(fs::exists(dir / "a" / "manifest.json"));
    for (const char* f : {"cdf.csv", "error.csv", "audit/realizations.csv"}) {
        CHECK(fs::exists(dir / "a" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    const std::string manifest = slurp(dir / "a" / "manifest.json");
    CHECK(manifest.find("\"master_seed\": 11") != std::string::npos);
    CHECK(manifest.find("--jobs") == std::string::npos);
    CHECK(slurp(dir / "a" / "error.csv").rfind("M,eps_cdf,eps_mcs\n", 0) == 0);
}

TEST_CASE("convergence prints and writes a rate table") {
    const fs::path dir = scratch("conv");
    REQUIRE(run("convergence --config " + (configs / "deterministic1d-dt-sweep.json").string() + " --out " +
                    dir.string(),
                dir / "log") == 0);
    const std::string table = slurp(dir / "convergence.csv");
    CHECK(table.rfind("param,eps,rate\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);
}
