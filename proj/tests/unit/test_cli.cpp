#include "odelay/cli/commands.hpp"
#include "odelay/cli/config.hpp"
#include "odelay/cli/report.hpp"

#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using namespace odelay;
using namespace odelay::cli;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::string kMinimal = R"({
  "comparator": {"G": 1.0, "C_eff": 1.0, "V_th": 0.5},
  "ramp": {"m1": 1.0, "command": 1.0},
  "spectrum": []
})";

std::string config_path(const std::string& name) { return std::string(ODELAY_CONFIG_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string csv(const CommandResult& r) {
    std::ostringstream out;
    write_report(r.rows, Format::Csv, out);
    return out.str();
}

const Cell& field(const ReportRow& row, const std::string& key) {
    for (const Fields* g : {&row.inputs, &row.outputs, &row.verdicts, &row.margins}) {
        for (const auto& [k, v] : *g) {
            if (k == key) {
                return v;
            }
        }
    }
    throw std::runtime_error("no field " + key);
}

double real(const ReportRow& row, const std::string& key) { return std::get<double>(field(row, key)); }

struct Run {
    int status;
    std::string out;
};

Run run_cli(const std::string& args, const std::string& tag) {
    const std::string out = std::string(ODELAY_TEST_TMP) + "/" + tag + ".out";
    const std::string cmd = std::string(ODELAY_CLI_PATH) + " " + args + " > " + out + " 2> " + out + ".err";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out)};
}

std::string write_tmp(const std::string& name, const std::string& text) {
    const std::string path = std::string(ODELAY_TEST_TMP) + "/" + name;
    std::ofstream(path) << text;
    return path;
}

} // namespace

// =============================================================================
// Config parsing
// =============================================================================

TEST_CASE("minimal config with an empty spectrum", "[cli]") {
    const AnalysisConfig cfg = parse_config_text(kMinimal);
    CHECK(amplitude_bound(cfg.spectrum) == 0.0);
    CHECK(integral_bound_B(cfg.spectrum) == 0.0);
    CHECK(cfg.seed == 0);
    CHECK(cfg.solver.quadrature.rel_tol == 1e-8);
    CHECK_FALSE(cfg.loop);
}

TEST_CASE("config errors name the field", "[cli]") {
    const std::string zero_omega = R"({
      "comparator": {"G": 1, "C_eff": 1, "V_th": 0.5}, "ramp": {"m1": 1, "command": 1},
      "spectrum": [{"omega": 5, "amplitude": 0.1}, {"omega": 0, "amplitude": 0.1}]})";
    CHECK_THROWS_WITH(parse_config_text(zero_omega), ContainsSubstring("spectrum[1].omega"));
    CHECK_THROWS_WITH(parse_config_text(R"({"ramp": {"m1": 1, "command": 1}})"), ContainsSubstring("comparator"));
    CHECK_THROWS_WITH(parse_config_text(R"({"comparator": {"G": 1, "C_eff": 1, "V_th": 0.5, "Vth": 1},
                                            "ramp": {"m1": 1, "command": 1}})"),
                      ContainsSubstring("comparator.Vth"));
    CHECK_THROWS_WITH(parse_config_text(R"({"comparator": {"G": -1, "C_eff": 1, "V_th": 0.5},
                                            "ramp": {"m1": 1, "command": 1}})"),
                      ContainsSubstring("comparator.G"));
    CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
}

TEST_CASE("duplicated omegas merge and the echo says so", "[cli]") {
    const std::string text = R"({
      "comparator": {"G": 1, "C_eff": 1, "V_th": 0.5}, "ramp": {"m1": 1, "command": 1},
      "spectrum": [{"omega": 40, "amplitude": 0.05, "phase": 0.3},
                   {"omega": 40, "amplitude": 0.04, "phase": 2.0}]})";
    const AnalysisConfig cfg = parse_config_text(text);
    CHECK(cfg.spectrum.size() == 1);
    CHECK(cfg.merged_lines == 1);
    for (double t : {0.0, 0.3, 1.7}) {
        const double direct = 0.05 * std::cos(40 * t + 0.3) + 0.04 * std::cos(40 * t + 2.0);
        CHECK_THAT(cfg.spectrum(t), Catch::Matchers::WithinAbs(direct, 1e-15));
    }
    const CommandResult r = run_subcommand("simulate", &cfg, {});
    CHECK(std::get<std::int64_t>(field(r.rows[0], "merged_lines")) == 1);
}

// =============================================================================
// Subcommands in process
// =============================================================================

TEST_CASE("bounds without interference", "[cli]") {
    const AnalysisConfig cfg = parse_config_text(kMinimal);
    const CommandResult r = run_subcommand("bounds", &cfg, {});
    REQUIRE(r.rows.size() == 1);
    CHECK_THAT(real(r.rows[0], "t_l"), Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK_THAT(real(r.rows[0], "t_u"), Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK(real(r.rows[0], "t_od_max") == 1.0);
}

TEST_CASE("aux reports y", "[cli]") {
    RunFlags flags;
    flags.x = 1.0;
    flags.mu = 8.0;
    const CommandResult r = run_subcommand("aux", nullptr, flags);
    CHECK_THAT(real(r.rows[0], "y"), Catch::Matchers::WithinAbs(-0.5, 1e-12));
    CHECK_THROWS_AS(run_subcommand("aux", nullptr, {}), ConfigError);
}

TEST_CASE("sweep of 1000 draws is fully contained", "[cli]") {
    const AnalysisConfig cfg = parse_config(config_path("one_line.json"));
    RunFlags flags;
    flags.draws = 1000;
    const CommandResult r = run_subcommand("sweep", &cfg, flags);
    REQUIRE(r.rows.size() == 1001);
    CHECK(std::get<std::int64_t>(field(r.rows.back(), "contained_count")) == 1000);
    CHECK(std::get<std::int64_t>(field(r.rows.back(), "contained_global_count")) == 1000);
}

TEST_CASE("sweep output does not depend on the worker count", "[cli]") {
    const AnalysisConfig cfg = parse_config(config_path("one_line.json"));
    RunFlags seq;
    seq.draws = 64;
    RunFlags par = seq;
    par.threads = 4;
    CHECK(csv(run_subcommand("sweep", &cfg, seq)) == csv(run_subcommand("sweep", &cfg, par)));
    RunFlags other = seq;
    other.seed = 1;
    CHECK(csv(run_subcommand("sweep", &cfg, seq)) != csv(run_subcommand("sweep", &cfg, other)));
}

TEST_CASE("loop without a loop section is a config error", "[cli]") {
    const AnalysisConfig cfg = parse_config_text(kMinimal);
    CHECK_THROWS_AS(run_subcommand("loop", &cfg, {}), ConfigError);
}

TEST_CASE("CSV layout", "[cli]") {
    ReportRow a;
    a.analysis = "x";
    a.input("p", 0.1);
    a.output("q", std::string("has,comma"));
    ReportRow b;
    b.analysis = "y";
    b.input("p", std::int64_t{3});
    b.verdict("ok", true, 0.25);
    std::ostringstream out;
    write_csv({a, b}, out);
    CHECK(out.str() ==
          "# odelay-lab v1\n"
          "analysis,p,q,ok,margin_ok\n"
          "x,0.10000000000000001,\"has,comma\",,\n"
          "y,3,,true,0.25\n");
}

TEST_CASE("non-finite reals are refused", "[cli]") {
    ReportRow a;
    a.analysis = "x";
    a.output("bad", std::numeric_limits<double>::infinity());
    std::ostringstream out;
    CHECK_THROWS_AS(write_report({a}, Format::Csv, out), std::logic_error);
}

// =============================================================================
// The executable
// =============================================================================

TEST_CASE("executable output is byte-identical across runs and worker counts", "[cli][determinism]") {
    const std::string cfg = config_path("one_line.json");
    const Run a = run_cli("sweep --config " + cfg + " --draws 200 --threads 1", "det_a");
    const Run b = run_cli("sweep --config " + cfg + " --draws 200 --threads 1", "det_b");
    const Run c = run_cli("sweep --config " + cfg + " --draws 200 --threads 4", "det_c");
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    CHECK(a.out.rfind("# odelay-lab v1\n", 0) == 0);
}

TEST_CASE("executable matches the golden files", "[cli][golden]") {
    const std::string cfg = config_path("zero_interference.json");
    for (const std::string name : {"simulate", "bounds", "loop", "continuity"}) {
        const Run r = run_cli(name + " --config " + cfg, "golden_" + name);
        INFO(name);
        CHECK(r.status == 0);
        CHECK(r.out == slurp(std::string(ODELAY_GOLDEN_DIR) + "/" + name + "_zero.csv"));
    }
    const Run aux = run_cli("aux --x 1 --mu 8", "golden_aux");
    CHECK(aux.out == slurp(std::string(ODELAY_GOLDEN_DIR) + "/aux.csv"));
}

TEST_CASE("executable exit codes", "[cli]") {
    CHECK(run_cli("simulate --config " + write_tmp("bad.json", "{\"ramp\": {}}"), "exit2").status == 2);
    CHECK(run_cli("frobnicate --config " + config_path("one_line.json"), "exit2b").status == 2);

    const std::string tight = write_tmp("tight.json", R"({
      "comparator": {"G": 1, "C_eff": 1, "V_th": 0.5}, "ramp": {"m1": 1, "command": 1},
      "spectrum": [{"omega": 50, "amplitude": 0.2, "phase": 0.4}],
      "solver": {"step": 0.3, "refine_limit": 1, "rel_tol": 1e-15}})");
    CHECK(run_cli("simulate --config " + tight, "exit3").status == 3);

    const std::string slow = write_tmp("slow.json", R"({
      "comparator": {"G": 1, "C_eff": 1, "V_th": 0.5}, "ramp": {"m1": 1, "command": 1},
      "spectrum": [{"omega": 0.5, "amplitude": 0.2}]})");
    const Run pre = run_cli("bounds --config " + slow, "exit4");
    CHECK(pre.status == 4);
    CHECK_THAT(slurp(std::string(ODELAY_TEST_TMP) + "/exit4.out.err"), ContainsSubstring("V_th*tau_c"));
}

TEST_CASE("executable JSON output", "[cli]") {
    const Run r = run_cli("bounds --format json --config " + config_path("zero_interference.json"), "json");
    REQUIRE(r.status == 0);
    CHECK_THAT(r.out, ContainsSubstring("\"analysis\": \"bounds\""));
    CHECK_THAT(r.out, ContainsSubstring("\"t_od_max\": 1.0"));
}
