#include "vmsd/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vmsd/errors.hpp"

namespace vmsd::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

template <class T>
T parse_number(const std::string& path, const std::string& raw) {
    const auto s = trim(raw);
    T value{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) {
        throw InvalidConfig(path + ": expected " + (std::is_integral_v<T> ? "an integer" : "a number") + ", got '" +
                            raw + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw InvalidConfig(path + ": value must be finite");
    }
    return value;
}

bool parse_bool(const std::string& path, const std::string& raw) {
    const auto s = trim(raw);
    if (s == "true") return true;
    if (s == "false") return false;
    throw InvalidConfig(path + ": expected true or false, got '" + raw + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& path, const std::string& raw) {
    std::vector<T> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_number<T>(path, item));
    }
    return out;
}

std::string format_double(double v) {
    // Shortest text that reads back to the same double.
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
std::string format_list(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        if constexpr (std::is_integral_v<T>) {
            out += std::to_string(v[i]);
        } else {
            out += format_double(v[i]);
        }
    }
    return out;
}

struct Key {
    std::string section;
    std::string name;
    std::function<void(RunConfig&, const std::string& path, const std::string& raw)> set;
    std::function<std::optional<std::string>(const RunConfig&)> get;
};

Key num_key(const std::string& section, const std::string& name, double RunConfig::*m) {
    return {section, name, [m](RunConfig& c, const std::string& p, const std::string& r) { c.*m = parse_number<double>(p, r); },
            [m](const RunConfig& c) -> std::optional<std::string> { return format_double(c.*m); }};
}

Key int_key(const std::string& section, const std::string& name, int RunConfig::*m) {
    return {section, name, [m](RunConfig& c, const std::string& p, const std::string& r) { c.*m = parse_number<int>(p, r); },
            [m](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.*m); }};
}

Key opt_key(const std::string& section, const std::string& name, std::optional<int> RunConfig::*m) {
    return {section, name, [m](RunConfig& c, const std::string& p, const std::string& r) { c.*m = parse_number<int>(p, r); },
            [m](const RunConfig& c) -> std::optional<std::string> {
                if (!(c.*m)) return std::nullopt;
                return std::to_string(*(c.*m));
            }};
}

Key str_key(const std::string& section, const std::string& name, std::string RunConfig::*m) {
    return {section, name, [m](RunConfig& c, const std::string&, const std::string& r) { c.*m = trim(r); },
            [m](const RunConfig& c) -> std::optional<std::string> { return c.*m; }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> all = [] {
        std::vector<Key> k;
        k.push_back({"run", "mode",
                     [](RunConfig& c, const std::string&, const std::string& r) { c.mode = mode_from_string(trim(r)); },
                     [](const RunConfig& c) -> std::optional<std::string> { return to_string(c.mode); }});
        k.push_back({"run", "seed",
                     [](RunConfig& c, const std::string& p, const std::string& r) { c.seed = parse_number<std::uint64_t>(p, r); },
                     [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.seed); }});
        // `case` is applied before the other [case] keys; see parse().
        k.push_back(int_key("case", "case", &RunConfig::case_id));
        k.push_back(num_key("case", "mu", &RunConfig::mu));
        k.push_back(num_key("case", "v01", &RunConfig::v01));
        k.push_back(num_key("case", "v02", &RunConfig::v02));
        k.push_back(num_key("case", "k0", &RunConfig::k0));
        k.push_back(num_key("case", "beta", &RunConfig::beta));
        k.push_back(num_key("case", "b", &RunConfig::b));
        k.push_back(str_key("mesh", "preset", &RunConfig::preset));
        k.push_back(opt_key("mesh", "x_cells", &RunConfig::x_cells));
        k.push_back(opt_key("mesh", "v_cells1", &RunConfig::v_cells1));
        k.push_back(opt_key("mesh", "v_cells2", &RunConfig::v_cells2));
        k.push_back(num_key("mesh", "v1_min", &RunConfig::v1_min));
        k.push_back(num_key("mesh", "v1_max", &RunConfig::v1_max));
        k.push_back(num_key("mesh", "v2_min", &RunConfig::v2_min));
        k.push_back(num_key("mesh", "v2_max", &RunConfig::v2_max));
        k.push_back(num_key("time", "final_time", &RunConfig::final_time));
        k.push_back(opt_key("time", "slabs", &RunConfig::slabs));
        k.push_back(int_key("method", "degree", &RunConfig::degree));
        k.push_back(str_key("method", "delta_rule", &RunConfig::delta_rule));
        k.push_back(num_key("method", "delta", &RunConfig::delta));
        k.push_back(num_key("method", "c1", &RunConfig::c1));
        k.push_back(num_key("method", "c2", &RunConfig::c2));
        k.push_back({"method", "relativistic",
                     [](RunConfig& c, const std::string& p, const std::string& r) { c.relativistic = parse_bool(p, r); },
                     [](const RunConfig& c) -> std::optional<std::string> { return c.relativistic ? "true" : "false"; }});
        k.push_back(int_key("iteration", "max_iterations", &RunConfig::max_iterations));
        k.push_back(num_key("iteration", "tolerance", &RunConfig::iteration_tolerance));
        k.push_back(str_key("solver", "kind", &RunConfig::solver));
        k.push_back(num_key("solver", "tolerance", &RunConfig::solver_tolerance));
        k.push_back(int_key("solver", "max_iterations", &RunConfig::solver_max_iterations));
        k.push_back(int_key("solver", "restart", &RunConfig::restart));
        k.push_back(int_key("solver", "direct_limit", &RunConfig::direct_limit));
        k.push_back(str_key("convergence", "problem", &RunConfig::problem));
        k.push_back({"convergence", "cells",
                     [](RunConfig& c, const std::string& p, const std::string& r) { c.convergence_cells = parse_list<int>(p, r); },
                     [](const RunConfig& c) -> std::optional<std::string> { return format_list(c.convergence_cells); }});
        k.push_back(num_key("convergence", "final_time", &RunConfig::convergence_time));
        k.push_back(num_key("nitsche", "gamma", &RunConfig::gamma));
        k.push_back({"nitsche", "cells",
                     [](RunConfig& c, const std::string& p, const std::string& r) { c.nitsche_cells = parse_list<int>(p, r); },
                     [](const RunConfig& c) -> std::optional<std::string> { return format_list(c.nitsche_cells); }});
        k.push_back(num_key("nitsche", "final_time", &RunConfig::nitsche_time));
        k.push_back(num_key("nitsche", "step_ratio", &RunConfig::step_ratio));
        k.push_back(str_key("output", "directory", &RunConfig::directory));
        k.push_back({"output", "snapshot_times",
                     [](RunConfig& c, const std::string& p, const std::string& r) { c.snapshot_times = parse_list<double>(p, r); },
                     [](const RunConfig& c) -> std::optional<std::string> { return format_list(c.snapshot_times); }});
        k.push_back(str_key("output", "snapshot_format", &RunConfig::snapshot_format));
        return k;
    }();
    return all;
}

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw InvalidConfig(path + ": " + what);
}

void validate(const RunConfig& c) {
    require(c.case_id == 1 || c.case_id == 2, "case.case", "must be 1 or 2");
    require(c.mu >= 0.0 && c.mu <= 1.0, "case.mu", "must lie in [0, 1]");
    require(c.k0 > 0.0, "case.k0", "must be positive");
    require(c.beta > 0.0, "case.beta", "must be positive");
    require(c.preset == "H1" || c.preset == "H2" || c.preset == "H3", "mesh.preset", "must be H1, H2 or H3");
    for (const auto& [name, v] : {std::pair{"x_cells", c.x_cells}, {"v_cells1", c.v_cells1}, {"v_cells2", c.v_cells2}}) {
        require(!v || *v >= 1, std::string("mesh.") + name, "must be >= 1");
    }
    require(c.v1_min < c.v1_max, "mesh.v1_min", "must be below mesh.v1_max");
    require(c.v2_min < c.v2_max, "mesh.v2_min", "must be below mesh.v2_max");
    require(c.final_time > 0.0, "time.final_time", "must be positive");
    require(!c.slabs || *c.slabs >= 1, "time.slabs", "must be >= 1");
    require(c.degree >= 1 && c.degree <= 4, "method.degree", "must lie in 1..4 (p >= 1)");
    require(c.delta_rule == "uniform" || c.delta_rule == "theory", "method.delta_rule", "must be uniform or theory");
    require(c.delta >= 0.0, "method.delta", "must be >= 0");
    require(c.c1 > 0.0, "method.c1", "must be positive");
    require(c.c2 > 0.0, "method.c2", "must be positive");
    require(c.max_iterations >= 1, "iteration.max_iterations", "must be >= 1");
    require(c.iteration_tolerance >= 0.0, "iteration.tolerance", "must be >= 0");
    (void)sparse::solver_kind_from_string(c.solver);
    require(c.solver_tolerance > 0.0, "solver.tolerance", "must be positive");
    require(c.solver_max_iterations >= 1, "solver.max_iterations", "must be >= 1");
    require(c.restart >= 1, "solver.restart", "must be >= 1");
    require(c.direct_limit >= 0, "solver.direct_limit", "must be >= 0");
    require(c.problem == "maxwell" || c.problem == "vlasov" || c.problem == "both", "convergence.problem",
            "must be maxwell, vlasov or both");
    require(!c.convergence_cells.empty(), "convergence.cells", "needs at least one entry");
    for (int n : c.convergence_cells) require(n >= 1, "convergence.cells", "entries must be >= 1");
    require(c.convergence_time > 0.0, "convergence.final_time", "must be positive");
    require(c.gamma > 0.0, "nitsche.gamma", "must be positive");
    require(!c.nitsche_cells.empty(), "nitsche.cells", "needs at least one entry");
    for (int n : c.nitsche_cells) require(n >= 1, "nitsche.cells", "entries must be >= 1");
    require(c.nitsche_time > 0.0, "nitsche.final_time", "must be positive");
    require(c.step_ratio > 0.0, "nitsche.step_ratio", "must be positive");
    require(!c.directory.empty(), "output.directory", "must not be empty");
    for (double t : c.snapshot_times) require(t >= 0.0, "output.snapshot_times", "entries must be >= 0");
    require(c.snapshot_format == "text" || c.snapshot_format == "binary", "output.snapshot_format",
            "must be text or binary");
}

void apply_case(RunConfig& c, int id) {
    const auto w = driver::WeibelCase::preset(id);
    c.case_id = id;
    c.mu = w.mu;
    c.v01 = w.v01;
    c.v02 = w.v02;
    c.k0 = w.k0;
    c.beta = w.beta;
    c.b = w.b;
}

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::weibel_run: return "weibel-run";
        case Mode::reversibility: return "reversibility";
        case Mode::sd_convergence: return "sd-convergence";
        case Mode::nitsche_convergence: return "nitsche-convergence";
        case Mode::ritz_study: return "ritz-study";
    }
    return "?";
}

Mode mode_from_string(const std::string& name) {
    for (auto m : {Mode::weibel_run, Mode::reversibility, Mode::sd_convergence, Mode::nitsche_convergence,
                   Mode::ritz_study}) {
        if (to_string(m) == name) return m;
    }
    throw InvalidConfig("run.mode: unknown mode '" + name +
                        "' (expected weibel-run, reversibility, sd-convergence, nitsche-convergence or ritz-study)");
}

driver::WeibelCase RunConfig::weibel_case() const { return {mu, v01, v02, k0, beta, b}; }

driver::Discretization RunConfig::discretization() const {
    const auto p = driver::mesh_preset(preset);
    driver::Discretization d;
    d.x_cells = x_cells.value_or(static_cast<int>(std::lround(1.0 / p.hx)));
    d.v_cells1 = v_cells1.value_or(p.v_cells);
    d.v_cells2 = v_cells2.value_or(p.v_cells);
    d.v1 = {v1_min, v1_max};
    d.v2 = {v2_min, v2_max};
    d.degree = degree;
    d.final_time = final_time;
    d.slabs = slabs.value_or(std::max(1, static_cast<int>(std::lround(final_time / p.ht))));
    if (delta_rule == "theory") {
        d.delta = mesh::TheoryDelta{degree, c1, c2};
    } else {
        d.delta = mesh::UniformDelta{degree, delta};
    }
    d.relativistic = relativistic;
    d.max_iterations = max_iterations;
    d.tolerance = iteration_tolerance;
    d.solver.kind = sparse::solver_kind_from_string(solver);
    d.solver.tolerance = solver_tolerance;
    d.solver.max_iterations = solver_max_iterations;
    d.solver.restart = restart;
    d.solver.direct_limit = static_cast<std::size_t>(direct_limit);
    return d;
}

RunConfig parse(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidConfig("config: malformed document at line " + std::to_string(e.line()) + ": " + e.message());
    }
    std::map<std::string, const Key*> index;
    for (const auto& k : keys()) index[k.section + "." + k.name] = &k;

    RunConfig c;
    std::vector<std::pair<const Key*, std::string>> assignments;
    for (const auto& [section, body] : tree) {
        if (!body.data().empty()) {
            throw InvalidConfig(section + ": keys must live inside a [section]");
        }
        for (const auto& [name, value] : body) {
            const auto path = section + "." + name;
            const auto it = index.find(path);
            if (it == index.end()) throw InvalidConfig(path + ": unknown key");
            if (!value.empty()) throw InvalidConfig(path + ": nested values are not supported");
            if (path == "case.case") {
                apply_case(c, parse_number<int>(path, value.data()));
            } else {
                assignments.emplace_back(it->second, value.data());
            }
        }
    }
    for (const auto& [key, raw] : assignments) key->set(c, key->section + "." + key->name, raw);
    validate(c);
    return c;
}

RunConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string render(const RunConfig& c) {
    std::string out;
    std::string section;
    for (const auto& k : keys()) {
        const auto v = k.get(c);
        if (!v) continue;
        if (k.section != section) {
            if (!section.empty()) out += "\n";
            out += "[" + k.section + "]\n";
            section = k.section;
        }
        out += k.name + " = " + *v + "\n";
    }
    return out;
}

std::string hash(const RunConfig& c) {
    const auto text = render(c);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("config: SHA-256 digest failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

}  // namespace vmsd::config
