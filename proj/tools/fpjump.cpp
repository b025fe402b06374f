#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "fpjump/commands.hpp"
#include "fpjump/config.hpp"
#include "fpjump/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Upwind Fokker-Planck schemes as jump processes"};
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::string seed;
    std::vector<std::string> overrides;
    app.add_option("command", command, "stationary | evolve | gap | mc | order | fig1 | selftest")
        ->required()
        ->check(CLI::IsMember(fpjump::command_names()));
    app.add_option("--config", config_path, "config file (key = value, [section] headers)");
    app.add_option("--out", out_dir, "output directory (output.dir)");
    app.add_option("--seed", seed, "Monte Carlo seed (mc.seed)");
    app.add_option("--set", overrides, "override one key: --set key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        fpjump::RunConfig cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const auto& kv : overrides) cfg.set_assignment(kv);
        if (!out_dir.empty()) cfg.set("output.dir", out_dir);
        if (!seed.empty()) cfg.set("mc.seed", seed);
        return fpjump::run_command(command, cfg, std::cout);
    } catch (const fpjump::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fpjump::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const fpjump::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
