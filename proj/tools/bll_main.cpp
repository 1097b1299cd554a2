#include "bll/app.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <thread>

int main(int argc, char** argv) {
    CLI::App app{"Low Mach number convection: compressible and Oberbeck-Boussinesq solvers"};
    app.set_version_flag("--version", "bll 1.0");

    bll::AppOptions opt;
    std::string out;
    opt.threads = std::max(1u, std::thread::hardware_concurrency());

    app.add_option("command", opt.command, "Subcommand")
        ->required()
        ->check(CLI::IsMember(bll::subcommands()));
    app.add_option("--config", opt.config_path, "Scenario configuration file")->required();
    app.add_option("--out", out, "Output directory (overrides [output] directory)");
    app.add_option("--threads", opt.threads, "Concurrent sweep members")
        ->envname("BLL_THREADS")
        ->check(CLI::PositiveNumber);
    app.add_flag("--quiet", opt.quiet, "Suppress progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 64;
    }
    if (!out.empty()) opt.out_dir = out;
    return bll::run_app(opt, std::cout, std::cerr);
}
