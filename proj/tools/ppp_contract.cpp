// Command-line front end: solve | sweep | simulate | check.

#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "ppp/commands.hpp"
#include "ppp/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Optimal stopping and effort for a public-private partnership contract"};
    app.require_subcommand(0, 1);

    std::optional<std::string> config_path;
    ppp::Overrides overrides;
    std::string command_name;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value configuration file");
        struct Flag {
            const char* name;
            const char* key;
            const char* help;
        };
        static const Flag flags[] = {
            {"--sigma", "sigma", "volatility of the social value"},
            {"--alpha", "alpha", "effort impact curvature"},
            {"--beta", "beta", "effort cost curvature"},
            {"--lambda", "lambda", "agent discount rate"},
            {"--delta", "delta", "principal discount rate"},
            {"--xmax", "xmax", "upper end of the state domain"},
            {"--dx", "dx", "grid spacing"},
            {"--eps", "eps", "policy iteration tolerance"},
            {"--amax", "amax", "upper end of the effort search"},
            {"--na", "na", "effort grid points"},
            {"--paths", "paths", "Monte Carlo paths"},
            {"--dt", "dt", "Monte Carlo time step"},
            {"--seed", "seed", "Monte Carlo base seed"},
            {"--x0", "x0", "initial states, comma separated"},
            {"--sweep", "sweep", "volatilities for sweep, comma separated"},
            {"--out", "out", "output directory"},
        };
        for (const Flag& f : flags) {
            sub->add_option_function<std::string>(
                f.name, [&overrides, key = std::string(f.key)](const std::string& v) { overrides.emplace_back(key, v); },
                f.help);
        }
    };

    const std::pair<const char*, const char*> commands[] = {
        {"solve", "solve for one volatility and write solution_<sigma>.csv"},
        {"sweep", "solve every volatility in the sweep and write regions.csv"},
        {"simulate", "compare the value function against Monte Carlo, write mc_report.csv"},
        {"check", "run the self-checks and print PASS/FAIL lines"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub);
        sub->callback([&command_name, name] { command_name = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ppp::exit_config;
    }

    try {
        if (!command_name.empty()) {
            overrides.insert(overrides.begin(), {"command", command_name});
        }
        ppp::RunConfig config = ppp::load_config(config_path, overrides);
        if (config.command == ppp::Command::none) {
            std::cerr << app.help();
            return ppp::exit_config;
        }
        config.validate();
        return ppp::run_command(config, std::cout, std::cerr);
    } catch (const ppp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ppp::exit_config;
    } catch (const ppp::ModelError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ppp::exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
