#include "odelay/cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    using namespace odelay::cli;

    CLI::App app{"Comparator overdrive-delay analyses for constant off-time control loops", "odelay"};
    std::string name;
    std::string config_path;
    std::string format = "csv";
    std::string out_path;
    std::string convention = "interval";
    RunFlags flags;

    app.add_option("subcommand", name, "Analysis to run")
        ->required()
        ->check(CLI::IsMember(subcommand_names()));
    app.add_option("--config", config_path, "JSON analysis config")->check(CLI::ExistingFile);
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", out_path, "Write the report here instead of standard output");
    app.add_option("--draws", flags.draws, "Number of phase draws (sweep)");
    app.add_option("--seed", flags.seed, "Overrides the config seed");
    app.add_option("--threads", flags.threads, "Sweep workers, 0 = all cores");
    app.add_option("--x", flags.x, "Argument x (aux)");
    app.add_option("--mu", flags.mu, "Parameter mu (aux)");
    app.add_option("--b-convention", convention, "Integral bound used by the delay bounds")
        ->check(CLI::IsMember({"interval", "antiderivative", "delta"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        flags.b_convention = parse_b_convention(convention);
        std::optional<AnalysisConfig> config;
        if (!config_path.empty()) {
            config = parse_config(config_path);
        } else if (needs_config(name)) {
            throw ConfigError("--config", "required by the " + name + " subcommand");
        }

        const CommandResult result = run_subcommand(name, config ? &*config : nullptr, flags);
        const Format fmt = format == "json" ? Format::Json : Format::Csv;
        if (out_path.empty()) {
            write_report(result.rows, fmt, std::cout);
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) {
                throw ConfigError("--out", "cannot open '" + out_path + "' for writing");
            }
            write_report(result.rows, fmt, out);
        }
        if (result.failure) {
            std::cerr << "odelay: " << *result.failure << '\n';
        }
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "odelay: " << e.what() << '\n';
        return exit_code_for(e);
    }
}
