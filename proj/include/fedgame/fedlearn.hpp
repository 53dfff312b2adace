#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fedgame/accuracy_table.hpp"
#include "fedgame/nn.hpp"
#include "fedgame/signal.hpp"

namespace fedgame::fed {

struct FLConfig {
    int rounds = 100;
    int local_epochs_per_round = 1;
    int batch_size = 32;
    int samples_per_client = 1000;
    int test_samples = 1000;
    double label_balance = 0.5;
    double flip_fraction = 1.0;  // labels flipped on a poisoned client
    double learning_rate = 1e-3;
    double decay_rho = 0.9;
    double epsilon = 1e-8;
    std::uint64_t master_seed = 0;
    nn::Architecture arch;

    void validate() const;

    // Reduced scale for CI: 20 rounds, 200 samples per client, 500 test samples.
    static FLConfig fast_profile();
    // Full scale: 100 rounds, 1000 samples per client, 1000 test samples.
    static FLConfig full_profile();
};

// Which of the n clients (0-based ids) are admitted to aggregation and which
// hold poisoned training data. Both lists strictly increasing.
struct Roster {
    int n = 0;
    std::vector<int> admitted;
    std::vector<int> poisoned;

    void validate() const;
    int overlap() const;  // |admitted ∩ poisoned|
};

// Flips the labels of a uniformly random ceil(flip_fraction * N)-subset.
// Features are untouched; deterministic in `seed`.
signal::Dataset poison_labels(const signal::Dataset& d, double flip_fraction,
                              std::uint64_t seed);

// Elementwise mean of equally long parameter vectors.
Eigen::VectorXd federated_average(const std::vector<Eigen::VectorXd>& models);

struct FLResult {
    double accuracy = 0.0;
    Eigen::VectorXd params;
};

// Full federated-averaging run: every round each admitted client trains its
// local copy for local_epochs_per_round epochs (fresh optimizer state, same
// global starting point) and the server averages the results. The returned
// accuracy is measured on a clean held-out set drawn across all n clients'
// channel conditions. An empty admitted set skips training and reports
// kChanceAccuracy. Deterministic in (roster, cfg, channel).
FLResult run_fl(const Roster& roster, const FLConfig& cfg,
                const signal::ChannelConfig& channel);

// Monte Carlo estimate of the full (i, k) accuracy table: `trials`
// independent simulations per cell with client identities drawn uniformly.
// Cell streams are derived from (master_seed, i, k, trial), so the result is
// identical for any worker count. workers == 0 means hardware concurrency.
AccuracyTable estimate_table(int n, int trials, const FLConfig& cfg,
                             const signal::ChannelConfig& channel,
                             int workers = 0);

}  // namespace fedgame::fed
