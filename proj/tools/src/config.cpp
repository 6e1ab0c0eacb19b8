#include "odelay/cli/config.hpp"

#include "odelay/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <vector>

namespace odelay::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(path, "expected an object");
    }
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
        }
    }
}

std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
}

double read_real(const json& obj, const std::string& path, const char* key, std::optional<double> fallback) {
    const std::string where = join(path, key);
    if (!obj.contains(key)) {
        if (!fallback) {
            throw ConfigError(where, "missing required field");
        }
        return *fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw ConfigError(where, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ConfigError(where, "must be finite");
    }
    return d;
}

std::uint64_t read_count(const json& obj, const std::string& path, const char* key,
                         std::optional<std::uint64_t> fallback) {
    const std::string where = join(path, key);
    if (!obj.contains(key)) {
        if (!fallback) {
            throw ConfigError(where, "missing required field");
        }
        return *fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError(where, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

void require(bool ok, const std::string& where, const char* message) {
    if (!ok) {
        throw ConfigError(where, message);
    }
}

ComparatorParams read_comparator(const json& root) {
    if (!root.contains("comparator")) {
        throw ConfigError("comparator", "missing required section");
    }
    const json& c = root.at("comparator");
    check_keys(c, "comparator", {"G", "C_eff", "V_th"});
    ComparatorParams out;
    out.G = read_real(c, "comparator", "G", std::nullopt);
    out.C_eff = read_real(c, "comparator", "C_eff", std::nullopt);
    out.V_th = read_real(c, "comparator", "V_th", std::nullopt);
    require(out.G > 0.0, "comparator.G", "must be > 0");
    require(out.C_eff > 0.0, "comparator.C_eff", "must be > 0");
    require(out.V_th > 0.0, "comparator.V_th", "must be > 0");
    return out;
}

RampCycleInput read_ramp(const json& root) {
    if (!root.contains("ramp")) {
        throw ConfigError("ramp", "missing required section");
    }
    const json& r = root.at("ramp");
    check_keys(r, "ramp", {"m1", "command", "t_start", "initial"});
    RampCycleInput out;
    out.m1 = read_real(r, "ramp", "m1", std::nullopt);
    out.command = read_real(r, "ramp", "command", std::nullopt);
    out.t_start = read_real(r, "ramp", "t_start", 0.0);
    out.initial = read_real(r, "ramp", "initial", 0.0);
    require(out.m1 > 0.0, "ramp.m1", "must be > 0");
    return out;
}

std::vector<SpectrumLine> read_spectrum(const json& root) {
    std::vector<SpectrumLine> lines;
    if (!root.contains("spectrum")) {
        return lines;
    }
    const json& s = root.at("spectrum");
    if (!s.is_array()) {
        throw ConfigError("spectrum", "expected an array");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string path = "spectrum[" + std::to_string(i) + "]";
        check_keys(s[i], path, {"omega", "amplitude", "phase"});
        SpectrumLine line;
        line.omega = read_real(s[i], path, "omega", std::nullopt);
        line.amplitude = read_real(s[i], path, "amplitude", std::nullopt);
        line.phase = read_real(s[i], path, "phase", 0.0);
        require(line.omega > 0.0, path + ".omega", "must be > 0");
        require(line.amplitude >= 0.0, path + ".amplitude", "must be >= 0");
        lines.push_back(line);
    }
    return lines;
}

std::optional<LoopParams> read_loop(const json& root) {
    if (!root.contains("loop")) {
        return std::nullopt;
    }
    const json& l = root.at("loop");
    check_keys(l, "loop", {"t_off", "m2", "n_cycles", "valley0"});
    LoopParams out;
    out.t_off = read_real(l, "loop", "t_off", std::nullopt);
    out.m2 = read_real(l, "loop", "m2", std::nullopt);
    out.n_cycles = read_count(l, "loop", "n_cycles", std::nullopt);
    out.valley0 = read_real(l, "loop", "valley0", 0.0);
    require(out.t_off > 0.0, "loop.t_off", "must be > 0");
    require(out.m2 > 0.0, "loop.m2", "must be > 0");
    require(out.n_cycles >= 1, "loop.n_cycles", "must be >= 1");
    return out;
}

CycleSolverOptions read_solver(const json& root) {
    CycleSolverOptions out;
    if (!root.contains("solver")) {
        return out;
    }
    const json& s = root.at("solver");
    check_keys(s, "solver", {"step", "refine_limit", "rel_tol"});
    out.step = read_real(s, "solver", "step", 0.0);
    require(out.step >= 0.0, "solver.step", "must be >= 0 (0 selects the automatic step)");
    if (out.step > 0.0) {
        out.quadrature.step = out.step;
    }
    const std::uint64_t limit = read_count(s, "solver", "refine_limit",
                                           static_cast<std::uint64_t>(out.quadrature.refine_limit));
    require(limit >= 1 && limit <= 60, "solver.refine_limit", "must lie in [1, 60]");
    out.quadrature.refine_limit = static_cast<int>(limit);
    out.quadrature.rel_tol = read_real(s, "solver", "rel_tol", out.quadrature.rel_tol);
    require(out.quadrature.rel_tol > 0.0 && out.quadrature.rel_tol < 1.0, "solver.rel_tol",
            "must lie in (0, 1)");
    return out;
}

} // namespace

AnalysisConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
    }
    check_keys(root, "", {"comparator", "ramp", "spectrum", "loop", "solver", "seed"});

    AnalysisConfig cfg;
    cfg.comparator = read_comparator(root);
    cfg.ramp = read_ramp(root);
    const std::vector<SpectrumLine> lines = read_spectrum(root);
    cfg.spectrum = InterferenceSpec::from_lines(lines);
    cfg.merged_lines = cfg.spectrum.merged_count();
    cfg.loop = read_loop(root);
    cfg.solver = read_solver(root);
    cfg.seed = read_count(root, "", "seed", 0);
    return cfg;
}

AnalysisConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), "cannot open config file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace odelay::cli
