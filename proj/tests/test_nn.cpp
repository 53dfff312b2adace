#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fedgame/nn.hpp"
#include "fedgame/rng.hpp"

using namespace fedgame;

namespace {

nn::Architecture classifier_arch() { return nn::Architecture{}; }

Eigen::MatrixXd random_inputs(int rows, int cols, rng::Stream& s) {
    Eigen::MatrixXd x(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) x(r, c) = s.uniform(-2.0, 2.0);
    }
    return x;
}

Eigen::VectorXi random_labels(int cols, int classes, rng::Stream& s) {
    Eigen::VectorXi y(cols);
    for (int c = 0; c < cols; ++c) {
        y[c] = static_cast<int>(s.below(static_cast<std::uint64_t>(classes)));
    }
    return y;
}

}  // namespace

TEST_CASE("param_count") {
    CHECK(nn::param_count(classifier_arch()) == 14626);

    nn::Architecture tiny;
    tiny.input_size = 1;
    tiny.hidden_sizes = {};
    tiny.output_size = 1;
    CHECK(nn::param_count(tiny) == 2);

    nn::Architecture one_hidden;
    one_hidden.hidden_sizes = {128};
    CHECK(nn::param_count(one_hidden) == 32 * 128 + 128 + 128 * 2 + 2);
}

TEST_CASE("zero parameters give the uniform prediction") {
    const auto arch = classifier_arch();
    const Eigen::VectorXd params = Eigen::VectorXd::Zero(nn::param_count(arch));
    rng::Stream s(1);
    const Eigen::VectorXd x = random_inputs(32, 1, s).col(0);
    const Eigen::VectorXd probs = nn::forward<double>(arch, params, x, nn::Mode::kEval);
    CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax outputs are a distribution and eval mode is deterministic") {
    const auto arch = classifier_arch();
    rng::Stream init(7);
    const auto params = nn::init_params<double>(arch, init);
    rng::Stream s(8);
    const Eigen::MatrixXd x = random_inputs(32, 40, s);
    const Eigen::MatrixXd p1 = nn::forward<double>(arch, params, x, nn::Mode::kEval);
    const Eigen::MatrixXd p2 = nn::forward<double>(arch, params, x, nn::Mode::kEval);
    CHECK(p1 == p2);
    for (int c = 0; c < p1.cols(); ++c) {
        CHECK(p1.col(c).minCoeff() >= 0.0);
        CHECK(std::abs(p1.col(c).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("loss at zero parameters is ln 2") {
    const auto arch = classifier_arch();
    const Eigen::VectorXd params = Eigen::VectorXd::Zero(nn::param_count(arch));
    rng::Stream s(3);
    const Eigen::MatrixXd x = random_inputs(32, 17, s);
    const Eigen::VectorXi y = random_labels(17, 2, s);
    const auto lg = nn::loss_and_grad<double>(arch, params, x, y);
    CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("backprop matches central finite differences with dropout off") {
    const auto arch = classifier_arch();
    const int coords = 100;
    const double step = 1e-5;
    for (std::uint64_t model = 0; model < 3; ++model) {
        rng::Stream init(100 + model);
        Eigen::VectorXd params = nn::init_params<double>(arch, init);
        rng::Stream s(200 + model);
        const Eigen::MatrixXd x = random_inputs(32, 8, s);
        const Eigen::VectorXi y = random_labels(8, 2, s);
        const auto lg = nn::loss_and_grad<double>(arch, params, x, y);

        for (int c = 0; c < coords; ++c) {
            const auto j = static_cast<Eigen::Index>(
                s.below(static_cast<std::uint64_t>(params.size())));
            const double saved = params[j];
            params[j] = saved + step;
            const double up = nn::loss_and_grad<double>(arch, params, x, y).loss;
            params[j] = saved - step;
            const double down = nn::loss_and_grad<double>(arch, params, x, y).loss;
            params[j] = saved;
            const double fd = (up - down) / (2.0 * step);
            const double denom = std::max({std::abs(fd), std::abs(lg.grad[j]), 1e-4});
            CHECK(std::abs(lg.grad[j] - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("duplicated batches keep the same loss and gradient") {
    const auto arch = classifier_arch();
    rng::Stream init(5);
    const auto params = nn::init_params<double>(arch, init);
    rng::Stream s(6);
    const Eigen::MatrixXd x = random_inputs(32, 9, s);
    const Eigen::VectorXi y = random_labels(9, 2, s);

    Eigen::MatrixXd x2(32, 18);
    x2 << x, x;
    Eigen::VectorXi y2(18);
    y2 << y, y;

    const auto a = nn::loss_and_grad<double>(arch, params, x, y);
    const auto b = nn::loss_and_grad<double>(arch, params, x2, y2);
    CHECK(std::abs(a.loss - b.loss) < 1e-12);
    CHECK((a.grad - b.grad).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rmsprop zero gradient leaves parameters, decays accumulator") {
    Eigen::VectorXd params(3);
    params << 1.0, -2.0, 0.5;
    auto state = nn::RmsPropState<double>::zero(3);
    state.accumulator << 0.4, 0.1, 0.0;
    const Eigen::VectorXd before = params;
    nn::rmsprop_step<double>(params, Eigen::VectorXd::Zero(3), state);
    CHECK(params == before);
    CHECK(state.accumulator[0] == doctest::Approx(0.36).epsilon(1e-12));
    CHECK(state.accumulator[1] == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(state.accumulator[2] == 0.0);
}

TEST_CASE("rmsprop single step matches the closed form") {
    for (double g : {0.3, -1.7, 4.0}) {
        Eigen::VectorXd params = Eigen::VectorXd::Zero(1);
        auto state = nn::RmsPropState<double>::zero(1, 0.001, 0.9, 1e-8);
        Eigen::VectorXd grad(1);
        grad << g;
        nn::rmsprop_step<double>(params, grad, state);
        const double expected = -0.001 * g / std::sqrt(0.1 * g * g + 1e-8);
        CHECK(params[0] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("rmsprop is deterministic and rejects size mismatches") {
    rng::Stream s(17);
    Eigen::VectorXd a(5), grad(5);
    for (int j = 0; j < 5; ++j) {
        a[j] = s.uniform(-1, 1);
        grad[j] = s.uniform(-1, 1);
    }
    Eigen::VectorXd b = a;
    auto sa = nn::RmsPropState<double>::zero(5);
    auto sb = nn::RmsPropState<double>::zero(5);
    nn::rmsprop_step<double>(a, grad, sa);
    nn::rmsprop_step<double>(b, grad, sb);
    CHECK(a == b);
    CHECK(sa.accumulator == sb.accumulator);

    auto bad = nn::RmsPropState<double>::zero(4);
    CHECK_THROWS_AS(nn::rmsprop_step<double>(a, grad, bad), std::invalid_argument);
    CHECK_THROWS_AS(nn::rmsprop_step<double>(a, Eigen::VectorXd::Zero(4), sa),
                    std::invalid_argument);
}

TEST_CASE("inverted dropout keeps activations unbiased in expectation") {
    rng::Stream s(23);
    const int draws = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int j = 0; j < draws; ++j) {
        const auto mask = nn::dropout_mask<double>(1, 1, 0.2, s);
        sum += mask(0, 0);
        sumsq += mask(0, 0) * mask(0, 0);
    }
    const double mean = sum / draws;
    const double var = sumsq / draws - mean * mean;
    const double sem = std::sqrt(var / draws);
    CHECK(std::abs(mean - 1.0) < 3.0 * sem + 1e-12);
}

TEST_CASE("train-mode dropout actually masks and scales") {
    const auto arch = classifier_arch();
    rng::Stream init(29);
    const auto params = nn::init_params<double>(arch, init);
    rng::Stream s(30);
    const Eigen::MatrixXd x = random_inputs(32, 4, s);
    rng::Stream d1(31), d2(31), d3(32);
    const auto a = nn::forward<double>(arch, params, x, nn::Mode::kTrain, &d1);
    const auto b = nn::forward<double>(arch, params, x, nn::Mode::kTrain, &d2);
    const auto c = nn::forward<double>(arch, params, x, nn::Mode::kTrain, &d3);
    CHECK(a == b);  // same stream state, same masks
    CHECK(a != c);
    CHECK_THROWS_AS(nn::forward<double>(arch, params, x, nn::Mode::kTrain),
                    std::invalid_argument);
}

TEST_CASE("a linearly separable toy task trains to 100% within 200 steps") {
    const auto arch = classifier_arch();
    rng::Stream data_stream(41);
    const int count = 64;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(32, count);
    Eigen::VectorXi y(count);
    for (int c = 0; c < count; ++c) {
        const double a = data_stream.uniform(-1, 1);
        const double b = data_stream.uniform(-1, 1);
        x(0, c) = a;
        x(1, c) = b;
        y[c] = a + b > 0.0 ? 1 : 0;
    }

    rng::Stream init(42);
    Eigen::VectorXd params = nn::init_params<double>(arch, init);
    auto opt = nn::RmsPropState<double>::zero(params.size());
    bool solved = false;
    for (int step = 0; step < 200; ++step) {
        const auto lg = nn::loss_and_grad<double>(arch, params, x, y);
        nn::rmsprop_step<double>(params, lg.grad, opt);
        if (nn::accuracy<double>(arch, params, x, y) == 1.0) {
            solved = true;
            break;
        }
    }
    CHECK(solved);
}

TEST_CASE("contract violations throw") {
    const auto arch = classifier_arch();
    const Eigen::VectorXd params = Eigen::VectorXd::Zero(nn::param_count(arch));
    CHECK_THROWS_AS(
        nn::loss_and_grad<double>(arch, params, Eigen::MatrixXd::Zero(32, 0),
                                  Eigen::VectorXi()),
        std::invalid_argument);
    Eigen::MatrixXd bad_input = Eigen::MatrixXd::Zero(32, 1);
    bad_input(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(nn::forward<double>(arch, params, bad_input, nn::Mode::kEval),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        nn::forward<double>(arch, Eigen::VectorXd::Zero(10), bad_input, nn::Mode::kEval),
        std::invalid_argument);
}
