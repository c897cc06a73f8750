#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ballistic/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Dual ballistic transport solver for abstract Euler equations"};
    app.require_subcommand(1);
    std::string config;
    std::string output;
    for (const char* name : {"solve", "verify", "sweep", "consistency"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("config", config, "JSON experiment configuration")->required();
        sub->add_option("-o,--output", output, "Output directory (overrides the config)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    const std::optional<std::string> out = output.empty() ? std::nullopt : std::optional<std::string>(output);
    return ballistic::run_command(command, config, out, std::cout, std::cerr);
}
