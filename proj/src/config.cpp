#include "kwcdf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "kwcdf/errors.hpp"

namespace kwcdf {

namespace {

using nlohmann::json;

std::size_t line_at(const std::string& text, std::size_t pos) {
    pos = std::min(pos, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
public:
    Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    /// Line of the last key of `path`, searching each key after the previous one.
    std::size_t line_of(const std::vector<std::string>& path) const {
        std::size_t pos = 0;
        for (const std::string& key : path) {
            const std::size_t found = text_.find('"' + key + '"', pos);
            if (found == std::string::npos) break;
            pos = found + 1;
        }
        return line_at(text_, pos == 0 ? 0 : pos - 1);
    }

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
        std::string dotted;
        for (const std::string& k : path) dotted += (dotted.empty() ? "" : ".") + k;
        throw ConfigError(fmt::format("{}:{}: {}: {}", source_, line_of(path), dotted, message));
    }

    void only_keys(const json& obj, const std::vector<std::string>& path, const std::set<std::string>& allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (const auto& [key, value] : obj.items()) {
            if (!allowed.count(key)) {
                std::vector<std::string> p = path;
                p.push_back(key);
                fail(p, "unknown key");
            }
        }
    }

    double number(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(path, "expected a finite number");
        return d;
    }

    double positive(const json& v, const std::vector<std::string>& path) const {
        const double d = number(v, path);
        if (!(d > 0.0)) fail(path, fmt::format("must be positive, got {}", d));
        return d;
    }

    std::uint64_t count(const json& v, const std::vector<std::string>& path, std::uint64_t min = 1) const {
        if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected an integer");
        if (v.is_number_integer() && v.get<std::int64_t>() < 0) fail(path, "must be non-negative");
        const auto n = v.get<std::uint64_t>();
        if (n < min) fail(path, fmt::format("must be at least {}", min));
        return n;
    }

    std::string string(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_boolean()) fail(path, "expected true or false");
        return v.get<bool>();
    }

    template <class E>
    E choice(const json& v, const std::vector<std::string>& path,
             const std::vector<std::pair<std::string, E>>& options) const {
        const std::string s = string(v, path);
        std::string names;
        for (const auto& [name, value] : options) {
            if (name == s) return value;
            names += (names.empty() ? "" : ", ") + name;
        }
        fail(path, fmt::format("'{}' is not one of: {}", s, names));
    }

private:
    const std::string& text_;
    std::string source_;
};

void check_halvings(const Reader& in, const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] == v[i - 1]) in.fail({"sweep", "values"}, fmt::format("duplicate value {}", v[i]));
        if (std::abs(v[i] * 2.0 - v[i - 1]) > 1e-9 * v[i - 1])
            in.fail({"sweep", "values"}, fmt::format("{} is not half of {}; rate tables need successive halvings",
                                                      v[i], v[i - 1]));
    }
}

}  // namespace

std::vector<double> KGridSpec::values() const {
    std::vector<double> out(n);
    if (n == 1) return {min};
    for (std::size_t i = 0; i < n; ++i) out[i] = min + (max - min) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = max;
    return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}:{}: invalid JSON: {}", source, line_at(text, e.byte == 0 ? 0 : e.byte - 1),
                                      e.what()));
    }
    const Reader in(text, source);
    in.only_keys(doc, {}, {"problem", "method", "M", "master_seed", "query", "K_grid", "numerics", "estimator",
                           "sweep", "reference", "convergence", "benchmark", "audit", "output_dir"});

    ExperimentConfig c;
    if (!doc.contains("problem")) throw ConfigError(fmt::format("{}:1: missing required key 'problem'", source));
    const json& pj = doc["problem"];
    if (pj.is_string()) {
        c.problem = pj.get<std::string>();
    } else {
        in.only_keys(pj, {"problem"}, {"id", "source_case", "corr_length", "field_points", "component"});
        if (!pj.contains("id")) in.fail({"problem"}, "missing 'id'");
        c.problem = in.string(pj["id"], {"problem", "id"});
        if (pj.contains("source_case")) {
            const json& s = pj["source_case"];
            const std::string name = s.is_number() ? fmt::format("{}", s.get<int>()) : in.string(s, {"problem", "source_case"});
            try {
                c.params.source_case = source_case_from_string(name);
            } catch (const ConfigError& e) {
                in.fail({"problem", "source_case"}, e.what());
            }
        }
        if (pj.contains("corr_length")) c.params.corr_length = in.positive(pj["corr_length"], {"problem", "corr_length"});
        if (pj.contains("field_points"))
            c.params.field_points = in.count(pj["field_points"], {"problem", "field_points"}, 2);
        if (pj.contains("component")) {
            c.component = in.string(pj["component"], {"problem", "component"});
            if (c.component != "k1" && c.component != "k2") in.fail({"problem", "component"}, "expected k1 or k2");
        }
    }
    const std::vector<std::string> ids = catalog_ids();
    if (std::find(ids.begin(), ids.end(), c.problem) == ids.end())
        in.fail({"problem"}, fmt::format("unknown problem '{}'", c.problem));
    {
        const ProblemSpec p = c.problem == "coupled" ? make_coupled().v1 : make_problem(c.problem, c.params);
        c.query_x = p.default_query;
        c.query_t = p.default_time;
        c.K_grid.min = p.k_floor ? std::max(p.k_min, *p.k_floor) : p.k_min;
        c.K_grid.max = p.k_max;
    }

    if (doc.contains("method"))
        c.method = in.choice<Method>(doc["method"], {"method"},
                                     {{"cdf", Method::cdf}, {"mcs", Method::mcs}, {"both", Method::both}});
    if (doc.contains("M")) c.M = in.count(doc["M"], {"M"});
    if (doc.contains("master_seed")) c.master_seed = in.count(doc["master_seed"], {"master_seed"}, 0);

    if (doc.contains("query")) {
        const json& q = doc["query"];
        in.only_keys(q, {"query"}, {"x", "t"});
        if (q.contains("x")) {
            const json& x = q["x"];
            if (x.is_array()) {
                if (x.empty() || x.size() > 3) in.fail({"query", "x"}, "expected 1 to 3 coordinates");
                for (std::size_t i = 0; i < x.size(); ++i) c.query_x[i] = in.number(x[i], {"query", "x"});
            } else {
                c.query_x[0] = in.number(x, {"query", "x"});
            }
        }
        if (q.contains("t")) c.query_t = in.positive(q["t"], {"query", "t"});
    }

    if (doc.contains("K_grid")) {
        const json& k = doc["K_grid"];
        in.only_keys(k, {"K_grid"}, {"min", "max", "n"});
        if (k.contains("min")) c.K_grid.min = in.number(k["min"], {"K_grid", "min"});
        if (k.contains("max")) c.K_grid.max = in.number(k["max"], {"K_grid", "max"});
        if (k.contains("n")) c.K_grid.n = in.count(k["n"], {"K_grid", "n"}, 2);
        if (!(c.K_grid.max > c.K_grid.min)) in.fail({"K_grid", "max"}, "must exceed K_grid.min");
    }

    if (doc.contains("numerics")) {
        const json& n = doc["numerics"];
        in.only_keys(n, {"numerics"}, {"dt_char", "N_x", "dt_weno", "cfl", "inflow_ghost", "outflow_ghost", "search"});
        if (n.contains("dt_char")) c.numerics.dt_char = in.positive(n["dt_char"], {"numerics", "dt_char"});
        if (n.contains("N_x")) c.numerics.n_x = in.count(n["N_x"], {"numerics", "N_x"}, 5);
        if (n.contains("dt_weno")) c.numerics.dt_weno = in.number(n["dt_weno"], {"numerics", "dt_weno"});
        if (n.contains("cfl")) c.numerics.weno.cfl = in.positive(n["cfl"], {"numerics", "cfl"});
        const std::vector<std::pair<std::string, GhostFill>> ghosts{{"copy", GhostFill::copy},
                                                                   {"extrapolate", GhostFill::extrapolate}};
        if (n.contains("inflow_ghost"))
            c.numerics.weno.inflow = in.choice(n["inflow_ghost"], {"numerics", "inflow_ghost"}, ghosts);
        if (n.contains("outflow_ghost"))
            c.numerics.weno.outflow = in.choice(n["outflow_ghost"], {"numerics", "outflow_ghost"}, ghosts);
        if (n.contains("search"))
            c.numerics.search = in.choice<ProfileSearch>(n["search"], {"numerics", "search"},
                                                         {{"exhaustive", ProfileSearch::exhaustive},
                                                          {"linear", ProfileSearch::linear},
                                                          {"bisection", ProfileSearch::bisection}});
    }

    if (doc.contains("estimator"))
        c.estimator = in.choice<Estimator>(doc["estimator"], {"estimator"},
                                           {{"mc", Estimator::mc}, {"weighted", Estimator::weighted}});

    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        in.only_keys(s, {"sweep"}, {"kind", "values"});
        if (!s.contains("kind")) in.fail({"sweep"}, "missing 'kind'");
        c.sweep.kind = in.choice<SweepKind>(s["kind"], {"sweep", "kind"},
                                            {{"M", SweepKind::M}, {"dt", SweepKind::dt}, {"dx", SweepKind::dx}});
        if (!s.contains("values") || !s["values"].is_array() || s["values"].empty())
            in.fail({"sweep", "values"}, "expected a non-empty array");
        for (const json& v : s["values"]) c.sweep.values.push_back(in.positive(v, {"sweep", "values"}));
        if (c.sweep.kind == SweepKind::M) {
            for (std::size_t i = 0; i < c.sweep.values.size(); ++i) {
                const double v = c.sweep.values[i];
                if (v != std::floor(v)) in.fail({"sweep", "values"}, fmt::format("M values must be integers, got {}", v));
                if (i > 0 && !(v > c.sweep.values[i - 1]))
                    in.fail({"sweep", "values"}, "M values must be strictly increasing");
            }
        } else {
            check_halvings(in, c.sweep.values);
        }
    }

    if (doc.contains("reference")) {
        const json& r = doc["reference"];
        in.only_keys(r, {"reference"}, {"kind", "draws", "M", "seed"});
        if (r.contains("kind"))
            c.reference.kind = in.choice<ReferenceKind>(r["kind"], {"reference", "kind"},
                                                        {{"none", ReferenceKind::none},
                                                         {"exact", ReferenceKind::exact},
                                                         {"mcs", ReferenceKind::mcs},
                                                         {"self", ReferenceKind::self}});
        if (r.contains("draws")) c.reference.draws = in.count(r["draws"], {"reference", "draws"});
        if (r.contains("M")) c.reference.M = in.count(r["M"], {"reference", "M"});
        if (r.contains("seed")) c.reference.seed = in.count(r["seed"], {"reference", "seed"}, 0);
    }

    if (doc.contains("convergence")) {
        const json& v = doc["convergence"];
        in.only_keys(v, {"convergence"}, {"points"});
        if (v.contains("points")) c.convergence_points = in.count(v["points"], {"convergence", "points"}, 2);
    }
    if (doc.contains("benchmark")) {
        const json& b = doc["benchmark"];
        in.only_keys(b, {"benchmark"}, {"realizations"});
        if (b.contains("realizations"))
            c.benchmark_realizations = in.count(b["realizations"], {"benchmark", "realizations"});
    }
    if (doc.contains("audit")) c.audit = in.boolean(doc["audit"], {"audit"});
    if (doc.contains("output_dir")) c.output_dir = in.string(doc["output_dir"], {"output_dir"});

    c.canonical = doc.dump();

    try {
        validate(c);
    } catch (const ConfigError& e) {
        // Attach a line to cross-field errors using the key named first in the message.
        const std::string msg = e.what();
        const auto colon = msg.find(':');
        const std::string key = colon == std::string::npos ? "" : msg.substr(0, colon);
        std::vector<std::string> path;
        std::stringstream ss(key);
        for (std::string part; std::getline(ss, part, '.');) path.push_back(part);
        throw ConfigError(fmt::format("{}:{}: {}", source, in.line_of(path), msg));
    }
    return c;
}

void validate(const ExperimentConfig& c) {
    const bool coupled = c.problem == "coupled";
    const ProblemSpec p = coupled ? make_coupled().v1 : make_problem(c.problem, c.params);

    if (p.k_floor && c.K_grid.min < *p.k_floor)
        throw ConfigError(fmt::format("K_grid.min: {} is below the state floor {}", c.K_grid.min, *p.k_floor));
    if (!p.domain.contains(c.query_x)) throw ConfigError("query.x: query point lies outside the problem domain");

    const bool needs_mcs = c.method != Method::cdf;
    if (needs_mcs && !p.conservative && !p.has_exact() && !coupled)
        throw ConfigError(fmt::format("method: problem '{}' has no direct solver", c.problem));

    if (c.estimator == Estimator::weighted && (p.scalar_inputs.size() != 1 || !p.field_inputs.empty()))
        throw ConfigError(fmt::format(
            "estimator: the weighted estimator needs exactly one scalar input; use \"mc\" for '{}'", c.problem));

    if (c.reference.kind == ReferenceKind::exact && !p.has_exact() && !coupled)
        throw ConfigError(fmt::format("reference.kind: problem '{}' has no exact solution", c.problem));
    if (c.reference.kind == ReferenceKind::self && c.method != Method::both)
        throw ConfigError("reference.kind: 'self' needs method \"both\"");
    if (c.reference.kind == ReferenceKind::mcs && !p.conservative)
        throw ConfigError(fmt::format("reference.kind: problem '{}' has no direct solver", c.problem));

    if (c.sweep.kind == SweepKind::dt && !p.has_exact())
        throw ConfigError("sweep.kind: a dt sweep needs a problem with an exact solution");
    if (c.sweep.kind == SweepKind::dx && (!p.has_exact() || !p.conservative))
        throw ConfigError("sweep.kind: a dx sweep needs a direct solver and an exact solution");
    if (c.sweep.kind == SweepKind::dx) {
        for (double dx : c.sweep.values) {
            const double cells = p.domain.extent(0) / dx;
            if (std::abs(cells - std::round(cells)) > 1e-9 * cells)
                throw ConfigError(fmt::format("sweep.values: dx={} does not divide the domain", dx));
        }
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("{}: cannot open config", path));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace kwcdf
