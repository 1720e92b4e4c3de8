#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "macns/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Steady compressible Navier-Stokes on MAC grids"};
    app.require_subcommand(1);
    std::string config_path, out_dir = ".";
    std::uint64_t seed = 1;
    for (const char* name : {"solve", "verify", "study"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "seed of the randomized checks");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "cannot open " << config_path << "\n";
        return 2;
    }
    std::ostringstream text;
    text << in.rdbuf();
    macns::RunConfig config;
    try {
        config = macns::parse_config(text.str());
    } catch (const macns::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return 2;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    config.command = cmd == "solve" ? macns::Command::solve : cmd == "verify" ? macns::Command::verify
                                                                               : macns::Command::study;
    config.out_dir = out_dir;
    config.seed = seed;
    return macns::run(config, std::cerr);
}
