#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fedgame/accuracy_table.hpp"
#include "fedgame/equilibrium.hpp"
#include "fedgame/game.hpp"
#include "fedgame/nn.hpp"
#include "fedgame/signal.hpp"

namespace fedgame::io {

// Content that does not parse or violates an invariant; messages name the
// offending file and line.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The file system said no.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest text that converts back to the identical double (17 significant
// digits); used for every float written to CSV so files round-trip exactly.
std::string format_double(double v);

// Dataset CSV: header `label,f0,...,f31`, one row per sample.
void write_dataset_csv(const signal::Dataset& d, const std::filesystem::path& path);
signal::Dataset read_dataset_csv(const std::filesystem::path& path,
                                 int client_id = signal::kGlobalTestSet);

// Accuracy-table CSV: header `i,k,accuracy`, rows sorted by (i, k), complete
// lower-triangular index set required on load.
void write_table_csv(const AccuracyTable& table, const std::filesystem::path& path);
AccuracyTable read_table_csv(const std::filesystem::path& path);

// Versioned text checkpoint: architecture descriptor followed by the flat
// parameter vector; round-trips bit-exactly.
void save_model(const nn::Architecture& arch, const Eigen::VectorXd& params,
                const std::filesystem::path& path);
std::pair<nn::Architecture, Eigen::VectorXd> load_model(const std::filesystem::path& path);

// Equilibrium reports.
nlohmann::json mixed_equilibrium_report(const std::vector<nash::MixedEquilibrium>& eqs,
                                        const game::GameCosts& costs);
nlohmann::json pure_equilibrium_report(const nash::PureSolution& solution, int n,
                                       const game::GameCosts& costs);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace fedgame::io
