#include "fedgame/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include "fedgame/equilibrium.hpp"
#include "fedgame/io.hpp"
#include "fedgame/rng.hpp"

namespace fedgame::cli {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

void apply_profile(ExperimentConfig& config, const std::string& profile,
                   const std::filesystem::path& path) {
    if (profile == "fast") {
        config.fl = fed::FLConfig::fast_profile();
    } else if (profile == "full") {
        config.fl = fed::FLConfig::full_profile();
    } else {
        throw io::ParseError(path.string() + ": unknown profile '" + profile +
                             "' (expected fast or full)");
    }
    config.profile = profile;
}

double to_double(const std::string& v, const std::filesystem::path& path,
                 std::size_t line) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw io::ParseError(path.string() + ":" + std::to_string(line) +
                             ": not a number: '" + v + "'");
    }
    return x;
}

long long to_int(const std::string& v, const std::filesystem::path& path,
                 std::size_t line) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw io::ParseError(path.string() + ":" + std::to_string(line) +
                             ": not an integer: '" + v + "'");
    }
    return x;
}

std::uint64_t to_u64(const std::string& v, const std::filesystem::path& path,
                     std::size_t line) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw io::ParseError(path.string() + ":" + std::to_string(line) +
                             ": not an unsigned integer: '" + v + "'");
    }
    return x;
}

// Runs `body`, mapping exceptions onto the exit-code contract.
int guarded(std::ostream& err, const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const io::IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const io::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io::IoError("cannot create output directory: " + dir.string());
}

// Loads one table, or every .csv in a directory sorted by ascending n.
std::vector<AccuracyTable> load_tables(const std::filesystem::path& path) {
    std::vector<AccuracyTable> tables;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) tables.push_back(io::read_table_csv(f));
        std::stable_sort(tables.begin(), tables.end(),
                         [](const AccuracyTable& a, const AccuracyTable& b) {
                             return a.n < b.n;
                         });
        if (tables.empty()) {
            throw io::ParseError("no .csv tables in directory: " + path.string());
        }
    } else {
        tables.push_back(io::read_table_csv(path));
    }
    return tables;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (profile != "fast" && profile != "full") {
        throw std::invalid_argument("config: profile must be fast or full");
    }
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (workers < 0) throw std::invalid_argument("config: workers must be >= 0");
    costs.validate();
    channel.validate();
    fl.validate();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io::IoError("cannot open config: " + path.string());

    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<std::size_t> lines;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw io::ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": expected 'key = value'");
        }
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        lines.push_back(lineno);
    }

    ExperimentConfig config;
    // The profile is applied first so explicit keys override its values no
    // matter where they appear in the file.
    for (std::size_t j = 0; j < entries.size(); ++j) {
        if (entries[j].first == "profile") apply_profile(config, entries[j].second, path);
    }

    std::vector<std::string> unknown;
    for (std::size_t j = 0; j < entries.size(); ++j) {
        const auto& [key, value] = entries[j];
        const std::size_t ln = lines[j];
        if (key == "profile") {
            continue;
        } else if (key == "n") {
            config.n = static_cast<int>(to_int(value, path, ln));
        } else if (key == "trials") {
            config.trials = static_cast<int>(to_int(value, path, ln));
        } else if (key == "workers") {
            config.workers = static_cast<int>(to_int(value, path, ln));
        } else if (key == "seed") {
            config.master_seed = to_u64(value, path, ln);
        } else if (key == "out") {
            config.output_dir = value;
        } else if (key == "c_a") {
            config.costs.attack_cost = to_double(value, path, ln);
        } else if (key == "c_d") {
            config.costs.admission_cost = to_double(value, path, ln);
        } else if (key == "path_loss_exponent") {
            config.channel.path_loss_exponent = to_double(value, path, ln);
        } else if (key == "reference_gain") {
            config.channel.reference_gain = to_double(value, path, ln);
        } else if (key == "noise_power") {
            config.channel.noise_power = to_double(value, path, ln);
        } else if (key == "distance_min") {
            config.channel.distance_min = to_double(value, path, ln);
        } else if (key == "distance_max") {
            config.channel.distance_max = to_double(value, path, ln);
        } else if (key == "rounds") {
            config.fl.rounds = static_cast<int>(to_int(value, path, ln));
        } else if (key == "local_epochs") {
            config.fl.local_epochs_per_round = static_cast<int>(to_int(value, path, ln));
        } else if (key == "batch_size") {
            config.fl.batch_size = static_cast<int>(to_int(value, path, ln));
        } else if (key == "samples_per_client") {
            config.fl.samples_per_client = static_cast<int>(to_int(value, path, ln));
        } else if (key == "test_samples") {
            config.fl.test_samples = static_cast<int>(to_int(value, path, ln));
        } else if (key == "label_balance") {
            config.fl.label_balance = to_double(value, path, ln);
        } else if (key == "flip_fraction") {
            config.fl.flip_fraction = to_double(value, path, ln);
        } else if (key == "learning_rate") {
            config.fl.learning_rate = to_double(value, path, ln);
        } else if (key == "decay_rho") {
            config.fl.decay_rho = to_double(value, path, ln);
        } else if (key == "epsilon") {
            config.fl.epsilon = to_double(value, path, ln);
        } else {
            unknown.push_back(key);
        }
    }
    if (!unknown.empty()) {
        std::string msg = path.string() + ": unknown config keys:";
        for (const auto& k : unknown) msg += " '" + k + "'";
        throw io::ParseError(msg);
    }

    config.channel.seed = config.master_seed;
    config.fl.master_seed = config.master_seed;
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw io::ParseError(path.string() + ": " + e.what());
    }
    return config;
}

SweepSpec parse_sweep(const std::string& text) {
    SweepSpec spec;
    char* end = nullptr;
    const char* s = text.c_str();
    spec.lo = std::strtod(s, &end);
    if (end == s || *end != ':') throw std::invalid_argument("sweep: expected lo:hi:points");
    s = end + 1;
    spec.hi = std::strtod(s, &end);
    if (end == s || *end != ':') throw std::invalid_argument("sweep: expected lo:hi:points");
    s = end + 1;
    spec.points = static_cast<int>(std::strtol(s, &end, 10));
    if (end == s || *end != '\0') throw std::invalid_argument("sweep: expected lo:hi:points");
    if (spec.points < 1 || spec.hi < spec.lo) {
        throw std::invalid_argument("sweep: need points >= 1 and hi >= lo");
    }
    return spec;
}

int run_table(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        config.validate();
        ensure_dir(config.output_dir);
        const AccuracyTable table = fed::estimate_table(
            config.n, config.trials, config.fl, config.channel, config.workers);
        const auto path =
            config.output_dir / ("table_n" + std::to_string(config.n) + ".csv");
        io::write_table_csv(table, path);
        out << path.string() << "\n";
    });
}

int run_bounds(const std::filesystem::path& table_path, const game::GameCosts& costs,
               const std::filesystem::path& out_dir, std::ostream& out,
               std::ostream& err) {
    return guarded(err, [&] {
        costs.validate();
        const auto tables = load_tables(table_path);
        ensure_dir(out_dir);
        const auto path = out_dir / "bounds.csv";
        std::ofstream csv(path);
        if (!csv) throw io::IoError("cannot open for writing: " + path.string());
        csv << "n,best_utility,worst_utility,best_i,worst_i\n";
        for (const auto& table : tables) {
            const auto best = game::defense_bound_utility(
                table, costs, game::DefenseAssignment::kBest);
            const auto worst = game::defense_bound_utility(
                table, costs, game::DefenseAssignment::kWorst);
            csv << table.n << ',' << io::format_double(best.utility) << ','
                << io::format_double(worst.utility) << ',' << best.admitted << ','
                << worst.admitted << "\n";
        }
        csv.flush();
        if (!csv) throw io::IoError("write failed: " + path.string());
        out << path.string() << "\n";
    });
}

int run_game2(const std::filesystem::path& table_path, const game::GameCosts& costs,
              const std::optional<SweepSpec>& sweep,
              const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        costs.validate();
        const AccuracyTable table = io::read_table_csv(table_path);
        if (table.n != 2) throw std::invalid_argument("two-client table required");
        ensure_dir(out_dir);

        const auto equilibria = nash::solve_two_client(table, costs);
        const auto json_path = out_dir / "game2.json";
        io::write_json(io::mixed_equilibrium_report(equilibria, costs), json_path);
        out << json_path.string() << "\n";

        if (sweep) {
            const auto csv_path = out_dir / "game2_sweep.csv";
            std::ofstream csv(csv_path);
            if (!csv) throw io::IoError("cannot open for writing: " + csv_path.string());
            csv << "cost,p,q,u_attacker,u_defender\n";
            for (int j = 0; j < sweep->points; ++j) {
                const double c =
                    sweep->points == 1
                        ? sweep->lo
                        : sweep->lo + (sweep->hi - sweep->lo) * j / (sweep->points - 1);
                const game::GameCosts cc{c, c};
                const auto eqs = nash::solve_two_client(table, cc);
                const nash::MixedEquilibrium* pick = nullptr;
                for (const auto& eq : eqs) {
                    if (!pick || eq.defender_utility > pick->defender_utility) {
                        pick = &eq;
                    }
                }
                csv << io::format_double(c) << ',';
                if (pick) {
                    csv << io::format_double(pick->profile.attack_prob) << ','
                        << io::format_double(pick->profile.admission_prob) << ','
                        << io::format_double(pick->attacker_utility) << ','
                        << io::format_double(pick->defender_utility) << "\n";
                } else {
                    csv << "nan,nan,nan,nan\n";
                }
            }
            csv.flush();
            if (!csv) throw io::IoError("write failed: " + csv_path.string());
            out << csv_path.string() << "\n";
        }
    });
}

int run_gamen(const std::filesystem::path& table_path, const game::GameCosts& costs,
              const std::filesystem::path& out_dir, std::ostream& out,
              std::ostream& err) {
    return guarded(err, [&] {
        costs.validate();
        const auto tables = load_tables(table_path);
        ensure_dir(out_dir);

        nlohmann::json records = nlohmann::json::array();
        for (const auto& table : tables) {
            records.push_back(io::pure_equilibrium_report(
                nash::find_pure_nash(table, costs), table.n, costs));
        }
        const auto json_path = out_dir / "gamen.json";
        io::write_json(records.size() == 1 ? records.front() : records, json_path);
        out << json_path.string() << "\n";

        if (tables.size() > 1) {
            const auto sweep = nash::equilibrium_sweep(tables, costs);
            const auto csv_path = out_dir / "gamen_sweep.csv";
            std::ofstream csv(csv_path);
            if (!csv) throw io::IoError("cannot open for writing: " + csv_path.string());
            csv << "n,i_star,m_star,u_defender,u_attacker,status\n";
            for (const auto& point : sweep) {
                if (point.has_equilibrium) {
                    csv << point.n << ',' << point.equilibrium.admitted << ','
                        << point.equilibrium.poisoned << ','
                        << io::format_double(point.equilibrium.defender_utility) << ','
                        << io::format_double(point.equilibrium.attacker_utility)
                        << ",ok\n";
                } else {
                    csv << point.n << ",,,nan,nan,no_pure_equilibrium\n";
                }
            }
            csv.flush();
            if (!csv) throw io::IoError("write failed: " + csv_path.string());
            out << csv_path.string() << "\n";
        }
    });
}

}  // namespace fedgame::cli
