#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace fedgame::signal {

inline constexpr int kSymbolsPerSample = 16;
inline constexpr int kFeatureCount = 2 * kSymbolsPerSample;  // 16 phases + 16 powers
inline constexpr int kLabelBpsk = 0;
inline constexpr int kLabelQpsk = 1;
inline constexpr int kGlobalTestSet = -1;

// Distance-dependent power-law channel with a fixed-power AWGN receiver.
// noise_power is E|n|^2 per I/Q symbol; the default puts the SNR at the
// median distance near 10 dB.
struct ChannelConfig {
    double path_loss_exponent = 2.7;
    double reference_gain = 1.0;
    double noise_power = 1e-3;
    double distance_min = 1.0;
    double distance_max = 10.0;
    std::uint64_t seed = 0;

    void validate() const;
};

using Features = Eigen::Matrix<double, kFeatureCount, 1>;

// One labeled observation: features[0..15] are phases in (-pi, pi],
// features[16..31] are linear powers >= 0. Label 0 = BPSK, 1 = QPSK.
struct SpectrumSample {
    Features features;
    int label = kLabelBpsk;
};

// Column-per-sample feature matrix plus labels. client_id is the generating
// client, or kGlobalTestSet for pooled data.
struct Dataset {
    Eigen::MatrixXd features;  // kFeatureCount x N
    Eigen::VectorXi labels;    // N
    int client_id = kGlobalTestSet;

    Eigen::Index size() const { return labels.size(); }
    SpectrumSample sample(Eigen::Index j) const;
};

// Throws std::invalid_argument when a dataset breaks the feature/label
// invariants (empty, phase out of (-pi, pi], negative power, bad label).
void validate(const Dataset& d);

// 16 complex baseband symbols -> 16 phases then 16 squared magnitudes.
Features features_from_iq(const Eigen::VectorXcd& iq);

// The fixed distance of a client, drawn once from [distance_min, distance_max].
double client_distance(const ChannelConfig& channel, int client_id);

// Synthesizes a labeled per-client dataset: random BPSK/QPSK symbol choices,
// path-loss gain for the client's distance, one uniform phase rotation per
// sample, per-symbol complex Gaussian noise. Deterministic in
// (channel.seed, client_id, stream_salt); different salts give independent
// sample streams for the same client (e.g. held-out data).
Dataset generate_client_dataset(int client_id, int num_samples,
                                const ChannelConfig& channel,
                                double label_balance = 0.5,
                                std::uint64_t stream_salt = 0);

// Column-wise concatenation preserving sample order.
Dataset concat_datasets(const std::vector<Dataset>& parts,
                        int client_id = kGlobalTestSet);

}  // namespace fedgame::signal
