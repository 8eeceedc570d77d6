// fsonet: run one experiment and write its CSV table.
//
// Exit status: 0 success, 2 invalid configuration, 3 numerical
// non-convergence, 1 any other failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fsonet/experiment.hpp"

namespace ex = fsonet::experiment;

int main(int argc, char** argv) {
    CLI::App app{"Hybrid RF/FSO uplink experiments"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::vector<std::string> presets;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> mc_budget;
    std::string out_path;

    app.add_option("--preset", presets, "Named preset, applied in order before --config")
        ->check(CLI::IsMember(ex::preset_names()));
    app.add_option("--config", config_path, "INI scenario file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Base seed for Monte Carlo streams");
    app.add_option("--mc-budget", mc_budget, "Monte Carlo realizations per estimate");
    app.add_option("--out", out_path, "Output CSV path; stdout when omitted");

    for (const auto& [name, info] : ex::subcommands()) app.add_subcommand(name, info.summary);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        ex::ScenarioConfig cfg;
        for (const auto& p : presets) ex::apply_preset(cfg, p);
        if (!config_path.empty()) ex::apply_ini_file(cfg, config_path);
        ex::apply_default_sweep(cfg, sub);
        if (seed) cfg.sweep.seed = *seed;
        if (mc_budget) cfg.sweep.mc_budget = *mc_budget;
        if (!out_path.empty()) cfg.output = out_path;

        const auto table = ex::run(sub, cfg);
        if (cfg.output.empty())
            table.write(std::cout);
        else
            ex::write_atomically(table, cfg.output);
        return 0;
    } catch (const std::exception& e) {
        const int code = ex::exit_code(e);
        const char* kind = code == 2 ? "invalid configuration: " : code == 3 ? "numerical integration did not converge: " : "";
        std::fprintf(stderr, "fsonet: %s%s\n", kind, e.what());
        return code;
    }
}
