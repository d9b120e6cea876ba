#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lyap/cli/commands.hpp"
#include "lyap/cli/config.hpp"
#include "lyap/errors.hpp"

namespace {

struct Options {
    std::string config_path;
    std::optional<int> grid;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_tie;
    std::optional<double> tol_feas;
    std::optional<int> trials;
    std::optional<std::string> model;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("config", opt.config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--grid", opt.grid, "override domain.cells_per_axis");
    cmd->add_option("--seed", opt.seed, "override the top-level seed");
    cmd->add_option("--tol-tie", opt.tol_tie, "tie margin tolerance");
    cmd->add_option("--tol-feas", opt.tol_feas, "feasibility tolerance");
    cmd->add_option("--trials", opt.trials, "probe trial count");
    cmd->add_option("--model", opt.model, "probe/field sample model");
    cmd->add_option("--out", opt.out, "report JSON path");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bang-bang decomposition of vector integrand families"};
    app.require_subcommand(1);

    Options opt;
    for (const char* name : {"decompose", "oracle", "probe", "detect", "perturb",
                             "alpha"}) {
        add_common(app.add_subcommand(name), opt);
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        lyap::cli::RunConfig cfg = lyap::cli::RunConfig::load_file(opt.config_path);
        if (opt.grid) cfg.override_grid(*opt.grid);
        if (opt.seed) cfg.override_seed(*opt.seed);
        if (opt.tol_tie) cfg.override_tie_tol(*opt.tol_tie);
        if (opt.tol_feas) cfg.override_feas_tol(*opt.tol_feas);
        if (opt.trials) cfg.override_trials(*opt.trials);
        if (opt.model) cfg.override_model(*opt.model);
        if (opt.out) cfg.override_report_path(*opt.out);

        const lyap::cli::RunOutcome outcome = lyap::cli::run_command(command, cfg);
        if (!cfg.doc.contains("output") ||
            !cfg.doc.at("output").contains("report"))
            std::cout << outcome.report.dump(2) << "\n";
        return outcome.exit_code;
    } catch (const lyap::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return lyap::cli::kExitIo;
    } catch (const lyap::EnvelopeHypothesisError& e) {
        std::cerr << "hypothesis violation: " << e.what() << "\n";
        return lyap::cli::kExitUsage;
    } catch (const lyap::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lyap::cli::kExitUsage;
    }
}
