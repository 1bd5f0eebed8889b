#include <CLI11.hpp>

#include "dtrack/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"derivtrack: exposure-tracking portfolios on simulated index models"};
    app.require_subcommand(1);

    dtrack::RunOptions options;

    const struct {
        const char* name;
        const char* help;
    } subcommands[] = {
        {"simulate", "simulate index paths and export them as CSV"},
        {"track", "evolve constant-exposure tracking portfolios along simulated paths"},
        {"vxx", "run the deterministic futures roll strategy and its diagnostics"},
        {"calibrate", "fit the mean-reverting futures curve to a quote file"},
        {"verify", "run the numerical verification suite and export its reports"},
    };
    for (const auto& sc : subcommands) {
        CLI::App* sub = app.add_subcommand(sc.name, sc.help);
        sub->add_option("--config", options.config_path, "INI config file");
        sub->add_option("--out", options.out_dir, "output directory (default .)");
        sub->add_option("--paths", options.paths, "override the path count");
        sub->add_option("--seed", options.seed, "override the RNG seed");
        sub->add_option("--dt", options.dt, "override the grid step size");
    }

    CLI11_PARSE(app, argc, argv);
    options.subcommand = app.get_subcommands().front()->get_name();
    return dtrack::run_with_exit_code(options);
}
