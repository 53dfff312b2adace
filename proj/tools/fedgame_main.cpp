// Command-line front end: accuracy-table campaigns, defense-utility bounds
// and equilibrium solving, all driven by a seeded config file.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "fedgame/cli.hpp"
#include "fedgame/io.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> attack_cost;
    std::optional<double> admission_cost;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* opt = cmd->add_option("--config", args.config_path, "experiment config file");
    if (config_required) opt->required();
    cmd->add_option("--seed", args.seed, "override the master seed");
    cmd->add_option("--out", args.out_dir, "override the output directory");
    cmd->add_option("--c-a", args.attack_cost, "attacker cost per poisoned client");
    cmd->add_option("--c-d", args.admission_cost, "defender cost per admitted client");
}

// Builds the effective config: file first (when given), then flag overrides.
fedgame::cli::ExperimentConfig resolve(const CommonArgs& args) {
    fedgame::cli::ExperimentConfig config;
    if (!args.config_path.empty()) {
        config = fedgame::cli::load_config(args.config_path);
    }
    if (args.seed) {
        config.master_seed = *args.seed;
        config.channel.seed = *args.seed;
        config.fl.master_seed = *args.seed;
    }
    if (args.out_dir) config.output_dir = *args.out_dir;
    if (args.attack_cost) config.costs.attack_cost = *args.attack_cost;
    if (args.admission_cost) config.costs.admission_cost = *args.admission_cost;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated poisoning-game simulator and solver"};
    app.require_subcommand(1);

    CommonArgs table_args, bounds_args, game2_args, gamen_args;
    std::string bounds_table, game2_table, gamen_table, sweep_text;

    auto* table_cmd =
        app.add_subcommand("table", "estimate the (i, k) accuracy table by Monte Carlo");
    add_common(table_cmd, table_args, /*config_required=*/true);

    auto* bounds_cmd =
        app.add_subcommand("bounds", "best/worst defense-utility curves from a table");
    add_common(bounds_cmd, bounds_args, /*config_required=*/false);
    bounds_cmd->add_option("--table", bounds_table, "accuracy table CSV or directory")
        ->required();

    auto* game2_cmd =
        app.add_subcommand("game2", "two-client mixed-strategy equilibria");
    add_common(game2_cmd, game2_args, /*config_required=*/false);
    game2_cmd->add_option("--table", game2_table, "two-client accuracy table CSV")
        ->required();
    game2_cmd->add_option("--sweep", sweep_text,
                          "equal-cost sweep lo:hi:points (c_a = c_d = c)");

    auto* gamen_cmd =
        app.add_subcommand("gamen", "n-client pure-strategy equilibria");
    add_common(gamen_cmd, gamen_args, /*config_required=*/false);
    gamen_cmd->add_option("--table", gamen_table, "accuracy table CSV or directory")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fedgame::cli::kExitValidation;
    }

    try {
        if (table_cmd->parsed()) {
            return fedgame::cli::run_table(resolve(table_args), std::cout, std::cerr);
        }
        if (bounds_cmd->parsed()) {
            const auto config = resolve(bounds_args);
            return fedgame::cli::run_bounds(bounds_table, config.costs,
                                            config.output_dir, std::cout, std::cerr);
        }
        if (game2_cmd->parsed()) {
            const auto config = resolve(game2_args);
            std::optional<fedgame::cli::SweepSpec> sweep;
            if (!sweep_text.empty()) sweep = fedgame::cli::parse_sweep(sweep_text);
            return fedgame::cli::run_game2(game2_table, config.costs, sweep,
                                           config.output_dir, std::cout, std::cerr);
        }
        if (gamen_cmd->parsed()) {
            const auto config = resolve(gamen_args);
            return fedgame::cli::run_gamen(gamen_table, config.costs,
                                           config.output_dir, std::cout, std::cerr);
        }
    } catch (const fedgame::io::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fedgame::cli::kExitIo;
    } catch (const fedgame::io::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fedgame::cli::kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return fedgame::cli::kExitValidation;
    }
    return fedgame::cli::kExitValidation;
}
