#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "hstokes/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Half-space Stokes and Navier-Stokes solver"};
    app.require_subcommand(1);
    app.footer("Config keys and defaults:\n\n" + hstokes::reference_config_text());

    std::string config_path, out;
    int threads = 0;
    long long seed = -1;
    app.add_option("--config", config_path, "Key/value config file")->check(CLI::ExistingFile);
    app.add_option("--out", out, "Output directory (overrides run.out)");
    app.add_option("--threads", threads, "Worker threads (0: HSTOKES_THREADS or runtime default)");
    app.add_option("--seed", seed, "Seed for sampled norms and test fields (overrides run.seed)");

    const char* commands[][2] = {
        {"solve", "Solve the configured Stokes or Navier-Stokes problem"},
        {"verify", "Solve and report compatibility, trace, divergence and weak-form residuals"},
        {"norms", "Anisotropic Hoelder norms of a stored field or of the configured solution"},
        {"oracle-compare", "Compare against the finite-difference oracle"},
        {"demo", "Rayleigh ramp demo against the 1-D profile"},
    };
    for (const auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

    CLI11_PARSE(app, argc, argv);

    hstokes::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = hstokes::load_config(config_path);
    } catch (const hstokes::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return hstokes::cli::validation_failure;
    }
    if (!out.empty()) cfg.out = out;
    if (threads > 0) cfg.threads = threads;
    if (seed >= 0) cfg.seed = std::uint64_t(seed);

    const std::string command = app.get_subcommands().front()->get_name();
    return hstokes::cli::run(command, cfg);
}
