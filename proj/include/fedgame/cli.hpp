#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "fedgame/fedlearn.hpp"
#include "fedgame/game.hpp"
#include "fedgame/signal.hpp"

namespace fedgame::cli {

// Stable exit-code contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Everything a campaign needs, loaded from a flat `key = value` config file.
// The profile picks the training scale (`fast`: 20 rounds, 200 samples per
// client; `full`: 100 rounds, 1000 samples per client); explicit keys given
// after `profile` override individual values. Unknown keys are hard errors.
struct ExperimentConfig {
    std::string profile = "fast";
    int n = 2;
    int trials = 5;
    int workers = 0;  // 0 = hardware concurrency
    game::GameCosts costs;
    signal::ChannelConfig channel;
    fed::FLConfig fl;
    std::filesystem::path output_dir = ".";
    std::uint64_t master_seed = 0;

    void validate() const;
};

// Throws io::ParseError listing unknown or malformed keys.
ExperimentConfig load_config(const std::filesystem::path& path);

struct SweepSpec {
    double lo = 0.0;
    double hi = 0.0;
    int points = 0;
};

// `lo:hi:points`, e.g. "0:0.2:21".
SweepSpec parse_sweep(const std::string& text);

// Subcommand bodies. Each writes its artifacts under the output directory,
// logs the paths to `out`, reports failures on `err` and returns an exit
// code per the contract above.
int run_table(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int run_bounds(const std::filesystem::path& table_path, const game::GameCosts& costs,
               const std::filesystem::path& out_dir, std::ostream& out,
               std::ostream& err);
int run_game2(const std::filesystem::path& table_path, const game::GameCosts& costs,
              const std::optional<SweepSpec>& sweep,
              const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);
int run_gamen(const std::filesystem::path& table_path, const game::GameCosts& costs,
              const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err);

}  // namespace fedgame::cli
