#include "fedgame/fedlearn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "fedgame/rng.hpp"

namespace fedgame::fed {

namespace {

// Stream salts under the FL master seed.
constexpr std::uint64_t kInitSalt = 0x11A7;
constexpr std::uint64_t kPoisonSalt = 0xF11B;
constexpr std::uint64_t kTrainSalt = 0x7EAC;
constexpr std::uint64_t kCellSalt = 0xCE11;

// Salt distinguishing held-out data from training data for the same client.
constexpr std::uint64_t kTestStreamSalt = 1;

}  // namespace

void FLConfig::validate() const {
    if (rounds < 1) throw std::invalid_argument("FLConfig: rounds must be >= 1");
    if (local_epochs_per_round < 1 || batch_size < 1 || samples_per_client < 1 ||
        test_samples < 1) {
        throw std::invalid_argument("FLConfig: all sizes must be >= 1");
    }
    if (!(flip_fraction >= 0.0 && flip_fraction <= 1.0)) {
        throw std::invalid_argument("FLConfig: flip_fraction outside [0, 1]");
    }
    if (!(label_balance >= 0.0 && label_balance <= 1.0)) {
        throw std::invalid_argument("FLConfig: label_balance outside [0, 1]");
    }
    if (!(learning_rate > 0.0) || !(epsilon > 0.0) ||
        !(decay_rho > 0.0 && decay_rho < 1.0)) {
        throw std::invalid_argument("FLConfig: bad optimizer settings");
    }
    arch.validate();
}

FLConfig FLConfig::fast_profile() {
    FLConfig cfg;
    cfg.rounds = 20;
    cfg.samples_per_client = 200;
    cfg.test_samples = 500;
    return cfg;
}

FLConfig FLConfig::full_profile() { return FLConfig{}; }

void Roster::validate() const {
    if (n < 0) throw std::invalid_argument("Roster: n must be >= 0");
    auto check = [this](const std::vector<int>& ids, const char* what) {
        for (std::size_t j = 0; j < ids.size(); ++j) {
            if (ids[j] < 0 || ids[j] >= n) {
                throw std::invalid_argument(std::string("Roster: ") + what +
                                            " id out of range");
            }
            if (j > 0 && ids[j] <= ids[j - 1]) {
                throw std::invalid_argument(std::string("Roster: ") + what +
                                            " ids must be strictly increasing");
            }
        }
    };
    check(admitted, "admitted");
    check(poisoned, "poisoned");
}

int Roster::overlap() const {
    int k = 0;
    for (int c : admitted) {
        if (std::binary_search(poisoned.begin(), poisoned.end(), c)) ++k;
    }
    return k;
}

signal::Dataset poison_labels(const signal::Dataset& d, double flip_fraction,
                              std::uint64_t seed) {
    if (!(flip_fraction >= 0.0 && flip_fraction <= 1.0)) {
        throw std::invalid_argument("poison_labels: flip_fraction outside [0, 1]");
    }
    signal::validate(d);
    const int total = static_cast<int>(d.size());
    const int count = static_cast<int>(
        std::ceil(flip_fraction * static_cast<double>(total)));
    rng::Stream s(seed);
    const std::vector<int> flip = rng::sample_indices(total, count, s);
    signal::Dataset out = d;
    for (int j : flip) out.labels[j] = 1 - out.labels[j];
    return out;
}

Eigen::VectorXd federated_average(const std::vector<Eigen::VectorXd>& models) {
    if (models.empty()) throw std::invalid_argument("federated_average: empty list");
    const Eigen::Index len = models.front().size();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(len);
    for (const auto& m : models) {
        if (m.size() != len) {
            throw std::invalid_argument("federated_average: length mismatch");
        }
        sum += m;
    }
    return sum / static_cast<double>(models.size());
}

namespace {

signal::Dataset make_test_set(int n, const FLConfig& cfg,
                              const signal::ChannelConfig& channel) {
    // Spread the held-out samples across every client's channel conditions.
    std::vector<signal::Dataset> parts;
    parts.reserve(static_cast<std::size_t>(n));
    const int base = cfg.test_samples / n;
    const int extra = cfg.test_samples % n;
    for (int c = 0; c < n; ++c) {
        const int count = base + (c < extra ? 1 : 0);
        if (count == 0) continue;
        parts.push_back(signal::generate_client_dataset(
            c, count, channel, cfg.label_balance, kTestStreamSalt));
    }
    return signal::concat_datasets(parts, signal::kGlobalTestSet);
}

void train_one_client(const FLConfig& cfg, const signal::Dataset& data,
                      Eigen::VectorXd& params, rng::Stream& stream) {
    auto opt = nn::RmsPropState<double>::zero(params.size(), cfg.learning_rate,
                                              cfg.decay_rho, cfg.epsilon);
    const int total = static_cast<int>(data.size());
    std::vector<int> order(static_cast<std::size_t>(total));
    for (int e = 0; e < cfg.local_epochs_per_round; ++e) {
        std::iota(order.begin(), order.end(), 0);
        rng::shuffle(order, stream);
        for (int start = 0; start < total; start += cfg.batch_size) {
            const int count = std::min(cfg.batch_size, total - start);
            Eigen::MatrixXd xb(signal::kFeatureCount, count);
            Eigen::VectorXi yb(count);
            for (int j = 0; j < count; ++j) {
                xb.col(j) = data.features.col(order[static_cast<std::size_t>(start + j)]);
                yb[j] = data.labels[order[static_cast<std::size_t>(start + j)]];
            }
            const auto lg = nn::loss_and_grad<double>(cfg.arch, params, xb, yb, &stream);
            nn::rmsprop_step<double>(params, lg.grad, opt);
        }
    }
}

}  // namespace

FLResult run_fl(const Roster& roster, const FLConfig& cfg,
                const signal::ChannelConfig& channel) {
    roster.validate();
    cfg.validate();
    channel.validate();

    rng::Stream init_stream(rng::derive_seed(cfg.master_seed, kInitSalt));
    Eigen::VectorXd global = nn::init_params<double>(cfg.arch, init_stream);

    if (roster.admitted.empty()) {
        return {kChanceAccuracy, std::move(global)};
    }

    std::vector<signal::Dataset> client_data;
    client_data.reserve(roster.admitted.size());
    for (int c : roster.admitted) {
        signal::Dataset d = signal::generate_client_dataset(
            c, cfg.samples_per_client, channel, cfg.label_balance);
        if (std::binary_search(roster.poisoned.begin(), roster.poisoned.end(), c)) {
            d = poison_labels(d, cfg.flip_fraction,
                              rng::derive_seed(cfg.master_seed, kPoisonSalt,
                                               static_cast<std::uint64_t>(c)));
        }
        client_data.push_back(std::move(d));
    }

    std::vector<Eigen::VectorXd> locals(roster.admitted.size());
    for (int r = 0; r < cfg.rounds; ++r) {
        for (std::size_t j = 0; j < roster.admitted.size(); ++j) {
            rng::Stream ts(rng::derive_seed(
                cfg.master_seed, kTrainSalt,
                static_cast<std::uint64_t>(roster.admitted[j]),
                static_cast<std::uint64_t>(r)));
            locals[j] = global;
            train_one_client(cfg, client_data[j], locals[j], ts);
        }
        global = federated_average(locals);
    }

    const signal::Dataset test = make_test_set(roster.n, cfg, channel);
    const double acc = nn::accuracy<double>(cfg.arch, global, test.features, test.labels);
    return {acc, std::move(global)};
}

AccuracyTable estimate_table(int n, int trials, const FLConfig& cfg,
                             const signal::ChannelConfig& channel, int workers) {
    if (n < 1) throw std::invalid_argument("estimate_table: n must be >= 1");
    if (trials < 1) throw std::invalid_argument("estimate_table: trials must be >= 1");
    cfg.validate();
    channel.validate();

    struct Cell {
        int i, k, trial;
    };
    std::vector<Cell> tasks;
    for (int i = 1; i <= n; ++i) {
        for (int k = 0; k <= i; ++k) {
            for (int t = 0; t < trials; ++t) tasks.push_back({i, k, t});
        }
    }
    std::vector<double> results(tasks.size(), 0.0);

    auto run_task = [&](const Cell& cell) {
        const std::uint64_t cell_seed = rng::derive_seed(
            cfg.master_seed, kCellSalt, static_cast<std::uint64_t>(cell.i),
            static_cast<std::uint64_t>(cell.k), static_cast<std::uint64_t>(cell.trial));
        rng::Stream pick(rng::derive_seed(cell_seed, 0));
        Roster roster;
        roster.n = n;
        roster.admitted = rng::sample_indices(n, cell.i, pick);
        // k poisoned identities among the admitted; clients outside the
        // aggregation cannot influence the model either way.
        const std::vector<int> sub =
            rng::sample_indices(cell.i, cell.k, pick);
        for (int idx : sub) {
            roster.poisoned.push_back(roster.admitted[static_cast<std::size_t>(idx)]);
        }
        std::sort(roster.poisoned.begin(), roster.poisoned.end());

        signal::ChannelConfig trial_channel = channel;
        trial_channel.seed = rng::derive_seed(cell_seed, 1);
        FLConfig trial_cfg = cfg;
        trial_cfg.master_seed = rng::derive_seed(cell_seed, 2);
        return run_fl(roster, trial_cfg, trial_channel).accuracy;
    };

    int thread_count = workers > 0
                           ? workers
                           : static_cast<int>(std::thread::hardware_concurrency());
    if (thread_count < 1) thread_count = 1;
    thread_count = std::min<int>(thread_count, static_cast<int>(tasks.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= tasks.size()) return;
            try {
                results[idx] = run_task(tasks[idx]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(thread_count));
        for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    AccuracyTable table = AccuracyTable::zeros(n);
    table.trials = trials;
    table.seed = cfg.master_seed;
    table.at(0, 0) = kChanceAccuracy;
    for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
        table.at(tasks[idx].i, tasks[idx].k) += results[idx];
    }
    for (int i = 1; i <= n; ++i) {
        for (int k = 0; k <= i; ++k) table.at(i, k) /= static_cast<double>(trials);
    }
    return table;
}

}  // namespace fedgame::fed
