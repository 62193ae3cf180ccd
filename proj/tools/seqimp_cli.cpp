#include "seqimp/commands.hpp"
#include "seqimp/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Sequence-impedance stability analysis of a grid-tied VSC"};
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    app.add_option("command", command, "bode | nyquist | passivity | marginal | measure | simulate | verify")
        ->required()
        ->check(CLI::IsMember(seqimp::command_names()));
    app.add_option("--config", config_path, "section.key = value file");
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_option("--set", overrides, "section.key=value override (repeatable)");
    CLI11_PARSE(app, argc, argv);

    try {
        seqimp::Config cfg = config_path.empty() ? seqimp::parse_config_text("") : seqimp::parse_config(config_path);
        for (const auto& o : overrides) seqimp::apply_override(cfg, o);
        if (!out_dir.empty()) cfg.output.dir = out_dir;

        const seqimp::CommandResult r = seqimp::run_command(command, cfg);
        for (const auto& line : r.summary) std::cout << line << '\n';
        for (const auto& f : r.files) std::cout << "wrote " << f.string() << '\n';
        return r.exit_code;
    } catch (const seqimp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
