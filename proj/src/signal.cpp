#include "fedgame/signal.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "fedgame/rng.hpp"

namespace fedgame::signal {

namespace {

constexpr double kPi = std::numbers::pi;

// Salt constants keep the distance stream and the sample stream separate, so
// the same client keeps its distance across differently salted datasets.
constexpr std::uint64_t kDistanceSalt = 0xD157;
constexpr std::uint64_t kSampleSalt = 0x5A17;

}  // namespace

void ChannelConfig::validate() const {
    if (!(path_loss_exponent > 0.0)) {
        throw std::invalid_argument("ChannelConfig: path_loss_exponent must be > 0");
    }
    if (!(reference_gain > 0.0)) {
        throw std::invalid_argument("ChannelConfig: reference_gain must be > 0");
    }
    if (!(noise_power >= 0.0)) {
        throw std::invalid_argument("ChannelConfig: noise_power must be >= 0");
    }
    if (!(distance_min > 0.0) || !(distance_min <= distance_max)) {
        throw std::invalid_argument("ChannelConfig: need 0 < distance_min <= distance_max");
    }
}

SpectrumSample Dataset::sample(Eigen::Index j) const {
    if (j < 0 || j >= size()) throw std::out_of_range("Dataset::sample: index out of range");
    return SpectrumSample{features.col(j), labels[j]};
}

void validate(const Dataset& d) {
    if (d.labels.size() == 0) throw std::invalid_argument("Dataset: empty");
    if (d.features.rows() != kFeatureCount || d.features.cols() != d.labels.size()) {
        throw std::invalid_argument("Dataset: feature matrix shape mismatch");
    }
    for (Eigen::Index j = 0; j < d.labels.size(); ++j) {
        if (d.labels[j] != kLabelBpsk && d.labels[j] != kLabelQpsk) {
            throw std::invalid_argument("Dataset: label must be 0 or 1");
        }
        for (int r = 0; r < kSymbolsPerSample; ++r) {
            const double phase = d.features(r, j);
            if (!(phase > -kPi && phase <= kPi)) {
                throw std::invalid_argument("Dataset: phase outside (-pi, pi]");
            }
            if (!(d.features(kSymbolsPerSample + r, j) >= 0.0)) {
                throw std::invalid_argument("Dataset: negative power feature");
            }
        }
    }
}

Features features_from_iq(const Eigen::VectorXcd& iq) {
    if (iq.size() != kSymbolsPerSample) {
        throw std::invalid_argument("features_from_iq: expected 16 complex symbols");
    }
    Features f;
    for (int j = 0; j < kSymbolsPerSample; ++j) {
        double phase = std::atan2(iq[j].imag(), iq[j].real());
        if (phase <= -kPi) phase += 2.0 * kPi;  // fold -pi onto +pi
        f[j] = phase;
        f[kSymbolsPerSample + j] = std::norm(iq[j]);
    }
    return f;
}

double client_distance(const ChannelConfig& channel, int client_id) {
    channel.validate();
    rng::Stream s(rng::derive_seed(channel.seed, kDistanceSalt,
                                   static_cast<std::uint64_t>(client_id)));
    return s.uniform(channel.distance_min, channel.distance_max);
}

Dataset generate_client_dataset(int client_id, int num_samples,
                                const ChannelConfig& channel,
                                double label_balance,
                                std::uint64_t stream_salt) {
    channel.validate();
    if (num_samples <= 0) {
        throw std::invalid_argument("generate_client_dataset: num_samples must be > 0");
    }
    if (!(label_balance >= 0.0 && label_balance <= 1.0)) {
        throw std::invalid_argument("generate_client_dataset: label_balance outside [0, 1]");
    }

    const double distance = client_distance(channel, client_id);
    const double amplitude = std::sqrt(
        channel.reference_gain * std::pow(distance, -channel.path_loss_exponent));
    const double noise_scale = std::sqrt(channel.noise_power / 2.0);

    rng::Stream s(rng::derive_seed(channel.seed, kSampleSalt,
                                   static_cast<std::uint64_t>(client_id), stream_salt));

    Dataset d;
    d.client_id = client_id;
    d.features.resize(kFeatureCount, num_samples);
    d.labels.resize(num_samples);

    Eigen::VectorXcd iq(kSymbolsPerSample);
    for (int n = 0; n < num_samples; ++n) {
        const int label = s.bernoulli(label_balance) ? kLabelQpsk : kLabelBpsk;
        const double rotation = s.uniform(0.0, 2.0 * kPi);
        for (int j = 0; j < kSymbolsPerSample; ++j) {
            const double symbol_phase =
                label == kLabelBpsk
                    ? (s.bernoulli(0.5) ? kPi : 0.0)
                    : (kPi / 4.0 + (kPi / 2.0) * static_cast<double>(s.below(4)));
            iq[j] = std::polar(amplitude, symbol_phase + rotation);
            if (channel.noise_power > 0.0) {
                const auto [g_i, g_q] = s.normal_pair();
                iq[j] += std::complex<double>(noise_scale * g_i, noise_scale * g_q);
            }
        }
        d.features.col(n) = features_from_iq(iq);
        d.labels[n] = label;
    }
    return d;
}

Dataset concat_datasets(const std::vector<Dataset>& parts, int client_id) {
    if (parts.empty()) throw std::invalid_argument("concat_datasets: no parts");
    Eigen::Index total = 0;
    for (const auto& p : parts) total += p.size();
    Dataset d;
    d.client_id = client_id;
    d.features.resize(kFeatureCount, total);
    d.labels.resize(total);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        d.features.middleCols(at, p.size()) = p.features;
        d.labels.segment(at, p.size()) = p.labels;
        at += p.size();
    }
    return d;
}

}  // namespace fedgame::signal
