#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"

using namespace chemoproof::cli;

int main(int argc, char** argv) {
    CLI::App app{"chemoproof: candidates, certificates and bifurcation sweeps for the chemotaxis system"};
    app.require_subcommand(1);

    std::string config, input, out;
    int threads = 0;
    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config,-c", config, "run configuration (.ini)");
        if (needs_config) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--out,-o", out, "output directory (overrides CHEMOPROOF_OUT and [output] dir)");
    };
    auto* find = app.add_subcommand("find", "Newton / relaxation from the configured seed; writes candidate.geoseq");
    add_common(find, true);
    auto* cert = app.add_subcommand("certify", "run the Newton-Kantorovich check; writes certificate.json");
    add_common(cert, true);
    cert->add_option("--input,-i", input, "candidate file (default <out>/candidate.geoseq)");
    auto* sweep = app.add_subcommand("sweep", "continuation in sigma, certifying every converged state");
    add_common(sweep, true);
    sweep->add_option("--threads,-j", threads, "worker threads")->check(CLI::PositiveNumber);
    auto* render = app.add_subcommand("render", "diagram.svg and diagram.csv from a sweep index");
    add_common(render, false);
    render->add_option("--input,-i", input, "sweep index.csv (default <out>/index.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        RunConfig c;
        if (!config.empty()) c = load_config(config);
        if (const char* env = std::getenv("CHEMOPROOF_OUT"); env && *env) c.out_dir = env;
        if (!out.empty()) c.out_dir = out;
        if (threads > 0) c.threads = threads;

        if (*find) return cmd_find(c, std::cout, std::cerr);
        if (*cert) return cmd_certify(c, input, std::cout, std::cerr);
        if (*sweep) return cmd_sweep(c, std::cout, std::cerr);
        const std::string index = input.empty() ? c.out_dir + "/index.csv" : input;
        return cmd_render(index, c.out_dir, std::cout, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
