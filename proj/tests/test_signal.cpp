#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "fedgame/rng.hpp"
#include "fedgame/signal.hpp"

using namespace fedgame;

namespace {

constexpr double kPi = std::numbers::pi;

// Distinct values mod 2*pi up to `tol`, by greedy clustering.
std::vector<double> distinct_phases(const Eigen::VectorXd& phases, double tol) {
    std::vector<double> reps;
    for (Eigen::Index j = 0; j < phases.size(); ++j) {
        bool found = false;
        for (double r : reps) {
            if (std::abs(std::remainder(phases[j] - r, 2.0 * kPi)) < tol) {
                found = true;
                break;
            }
        }
        if (!found) reps.push_back(phases[j]);
    }
    return reps;
}

}  // namespace

TEST_CASE("features_from_iq on unit real symbols") {
    Eigen::VectorXcd iq = Eigen::VectorXcd::Constant(16, {1.0, 0.0});
    const auto f = signal::features_from_iq(iq);
    for (int j = 0; j < 16; ++j) {
        CHECK(f[j] == doctest::Approx(0.0));
        CHECK(f[16 + j] == doctest::Approx(1.0));
    }
}

TEST_CASE("features_from_iq on pure imaginary symbols") {
    Eigen::VectorXcd iq = Eigen::VectorXcd::Constant(16, {0.0, 2.0});
    const auto f = signal::features_from_iq(iq);
    for (int j = 0; j < 16; ++j) {
        CHECK(f[j] == doctest::Approx(kPi / 2.0));
        CHECK(f[16 + j] == doctest::Approx(4.0));
    }
}

TEST_CASE("features_from_iq powers match an elementwise magnitude oracle") {
    rng::Stream s(99);
    Eigen::VectorXcd iq(16);
    for (int j = 0; j < 16; ++j) iq[j] = {s.uniform(-3, 3), s.uniform(-3, 3)};
    const auto f = signal::features_from_iq(iq);
    for (int j = 0; j < 16; ++j) {
        const double re = iq[j].real(), im = iq[j].imag();
        CHECK(f[16 + j] == doctest::Approx(re * re + im * im).epsilon(1e-12));
    }
}

TEST_CASE("features_from_iq rejects wrong input length") {
    CHECK_THROWS_AS(signal::features_from_iq(Eigen::VectorXcd::Zero(15)),
                    std::invalid_argument);
    CHECK_THROWS_AS(signal::features_from_iq(Eigen::VectorXcd::Zero(17)),
                    std::invalid_argument);
}

TEST_CASE("negative real axis folds onto +pi") {
    Eigen::VectorXcd iq = Eigen::VectorXcd::Constant(16, {-1.0, 0.0});
    iq[3] = {-1.0, -0.0};
    const auto f = signal::features_from_iq(iq);
    for (int j = 0; j < 16; ++j) {
        CHECK(f[j] > -kPi);
        CHECK(f[j] <= kPi);
        CHECK(std::abs(f[j]) == doctest::Approx(kPi));
    }
}

TEST_CASE("generate_client_dataset basic shape and label balance") {
    signal::ChannelConfig channel;
    channel.seed = 7;
    const auto d = signal::generate_client_dataset(0, 1000, channel, 0.5);
    signal::validate(d);
    CHECK(d.size() == 1000);
    const int ones = d.labels.sum();
    // Binomial(1000, 0.5): +-4 sigma around 500.
    CHECK(ones > 500 - 4 * 16);
    CHECK(ones < 500 + 4 * 16);
}

TEST_CASE("noiseless BPSK has two antipodal phase values") {
    signal::ChannelConfig channel;
    channel.noise_power = 0.0;
    channel.seed = 11;
    const auto d = signal::generate_client_dataset(2, 50, channel, /*label_balance=*/0.0);
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        REQUIRE(d.labels[j] == signal::kLabelBpsk);
        const auto reps = distinct_phases(d.features.col(j).head(16), 1e-9);
        REQUIRE(reps.size() <= 2);
        if (reps.size() == 2) {
            CHECK(std::abs(std::remainder(reps[0] - reps[1], kPi)) ==
                  doctest::Approx(0.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("noiseless QPSK phases live on a pi/2 grid") {
    signal::ChannelConfig channel;
    channel.noise_power = 0.0;
    channel.seed = 12;
    const auto d = signal::generate_client_dataset(1, 50, channel, /*label_balance=*/1.0);
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        REQUIRE(d.labels[j] == signal::kLabelQpsk);
        const auto reps = distinct_phases(d.features.col(j).head(16), 1e-9);
        REQUIRE(reps.size() <= 4);
        for (std::size_t a = 0; a < reps.size(); ++a) {
            for (std::size_t b = a + 1; b < reps.size(); ++b) {
                CHECK(std::abs(std::remainder(reps[a] - reps[b], kPi / 2.0)) <
                      1e-9);
            }
        }
    }
}

TEST_CASE("noiseless powers equal the path-loss gain") {
    signal::ChannelConfig channel;
    channel.noise_power = 0.0;
    channel.seed = 21;
    const int client = 4;
    const double d = signal::client_distance(channel, client);
    const double gain =
        channel.reference_gain * std::pow(d, -channel.path_loss_exponent);
    const auto ds = signal::generate_client_dataset(client, 20, channel);
    for (Eigen::Index j = 0; j < ds.size(); ++j) {
        for (int r = 16; r < 32; ++r) {
            CHECK(ds.features(r, j) == doctest::Approx(gain).epsilon(1e-9));
        }
    }
}

TEST_CASE("dataset generation is deterministic and salt-sensitive") {
    signal::ChannelConfig channel;
    channel.seed = 5;
    const auto a = signal::generate_client_dataset(3, 64, channel, 0.5);
    const auto b = signal::generate_client_dataset(3, 64, channel, 0.5);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);

    const auto held_out = signal::generate_client_dataset(3, 64, channel, 0.5, 1);
    CHECK(held_out.features != a.features);

    // Same client id, so the same distance and hence the same noiseless power.
    signal::ChannelConfig quiet = channel;
    quiet.noise_power = 0.0;
    const auto p0 = signal::generate_client_dataset(3, 4, quiet, 0.5, 0);
    const auto p1 = signal::generate_client_dataset(3, 4, quiet, 0.5, 9);
    CHECK(p0.features(16, 0) == doctest::Approx(p1.features(16, 0)).epsilon(1e-12));
}

TEST_CASE("phase and power invariants hold with noise") {
    signal::ChannelConfig channel;
    channel.seed = 31;
    for (int client = 0; client < 4; ++client) {
        const auto d = signal::generate_client_dataset(client, 200, channel);
        CHECK_NOTHROW(signal::validate(d));
    }
}

TEST_CASE("generate_client_dataset rejects bad arguments") {
    signal::ChannelConfig channel;
    CHECK_THROWS_AS(signal::generate_client_dataset(0, 0, channel),
                    std::invalid_argument);
    CHECK_THROWS_AS(signal::generate_client_dataset(0, 10, channel, 1.5),
                    std::invalid_argument);
    signal::ChannelConfig bad = channel;
    bad.distance_min = 5.0;
    bad.distance_max = 1.0;
    CHECK_THROWS_AS(signal::generate_client_dataset(0, 10, bad), std::invalid_argument);
}

TEST_CASE("concat_datasets preserves order and size") {
    signal::ChannelConfig channel;
    channel.seed = 40;
    const auto a = signal::generate_client_dataset(0, 10, channel);
    const auto b = signal::generate_client_dataset(1, 15, channel);
    const auto all = signal::concat_datasets({a, b});
    CHECK(all.size() == 25);
    CHECK(all.client_id == signal::kGlobalTestSet);
    CHECK(all.features.col(0) == a.features.col(0));
    CHECK(all.features.col(10) == b.features.col(0));
    CHECK(all.labels[24] == b.labels[14]);
}
