#include "fedgame/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fedgame::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    return in;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

[[noreturn]] void bad_row(const std::filesystem::path& path, std::size_t line,
                          const std::string& what) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0') {
        bad_row(path, line, "not a number: '" + field + "'");
    }
    return v;
}

long parse_long(const std::string& field, const std::filesystem::path& path,
                std::size_t line) {
    char* end = nullptr;
    const long v = std::strtol(field.c_str(), &end, 10);
    if (end == field.c_str() || *end != '\0') {
        bad_row(path, line, "not an integer: '" + field + "'");
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_dataset_csv(const signal::Dataset& d, const std::filesystem::path& path) {
    signal::validate(d);
    auto out = open_out(path);
    out << "label";
    for (int f = 0; f < signal::kFeatureCount; ++f) out << ",f" << f;
    out << "\n";
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        out << d.labels[j];
        for (int f = 0; f < signal::kFeatureCount; ++f) {
            out << ',' << format_double(d.features(f, j));
        }
        out << "\n";
    }
    finish_write(out, path);
}

signal::Dataset read_dataset_csv(const std::filesystem::path& path, int client_id) {
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) bad_row(path, lineno, "missing header");
    std::string expected = "label";
    for (int f = 0; f < signal::kFeatureCount; ++f) expected += ",f" + std::to_string(f);
    if (line != expected) bad_row(path, lineno, "unexpected header");

    std::vector<int> labels;
    std::vector<signal::Features> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 1 + signal::kFeatureCount) {
            bad_row(path, lineno, "expected 33 fields");
        }
        labels.push_back(static_cast<int>(parse_long(fields[0], path, lineno)));
        signal::Features f;
        for (int j = 0; j < signal::kFeatureCount; ++j) {
            f[j] = parse_double(fields[static_cast<std::size_t>(j) + 1], path, lineno);
        }
        rows.push_back(f);
    }
    if (rows.empty()) bad_row(path, lineno, "no samples");

    signal::Dataset d;
    d.client_id = client_id;
    d.features.resize(signal::kFeatureCount, static_cast<Eigen::Index>(rows.size()));
    d.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        d.features.col(static_cast<Eigen::Index>(j)) = rows[j];
        d.labels[static_cast<Eigen::Index>(j)] = labels[j];
    }
    try {
        signal::validate(d);
    } catch (const std::invalid_argument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return d;
}

void write_table_csv(const AccuracyTable& table, const std::filesystem::path& path) {
    table.validate();
    auto out = open_out(path);
    out << "i,k,accuracy\n";
    for (int i = 0; i <= table.n; ++i) {
        for (int k = 0; k <= i; ++k) {
            out << i << ',' << k << ',' << format_double(table.at(i, k)) << "\n";
        }
    }
    finish_write(out, path);
}

AccuracyTable read_table_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) bad_row(path, lineno, "missing header");
    if (line != "i,k,accuracy") bad_row(path, lineno, "expected header 'i,k,accuracy'");

    struct Cell {
        int i, k;
        double v;
    };
    std::vector<Cell> cells;
    int n = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3) bad_row(path, lineno, "expected 3 fields");
        const int i = static_cast<int>(parse_long(fields[0], path, lineno));
        const int k = static_cast<int>(parse_long(fields[1], path, lineno));
        const double v = parse_double(fields[2], path, lineno);
        if (i < 0 || k < 0 || k > i) bad_row(path, lineno, "cell (i, k) out of range");
        if (!(v >= 0.0 && v <= 1.0)) bad_row(path, lineno, "accuracy outside [0, 1]");
        cells.push_back({i, k, v});
        n = std::max(n, i);
    }
    if (n < 0) bad_row(path, lineno, "no cells");

    AccuracyTable table = AccuracyTable::zeros(n);
    std::vector<bool> seen(AccuracyTable::cell_count(n), false);
    for (const auto& c : cells) {
        const std::size_t idx = AccuracyTable::index(c.i, c.k);
        if (seen[idx]) {
            throw ParseError(path.string() + ": duplicate cell (" +
                             std::to_string(c.i) + ", " + std::to_string(c.k) + ")");
        }
        seen[idx] = true;
        table.at(c.i, c.k) = c.v;
    }
    for (int i = 0; i <= n; ++i) {
        for (int k = 0; k <= i; ++k) {
            if (!seen[AccuracyTable::index(i, k)]) {
                throw ParseError(path.string() + ": missing cell (" + std::to_string(i) +
                                 ", " + std::to_string(k) + ")");
            }
        }
    }
    return table;
}

void save_model(const nn::Architecture& arch, const Eigen::VectorXd& params,
                const std::filesystem::path& path) {
    arch.validate();
    if (params.size() != nn::param_count(arch)) {
        throw std::invalid_argument("save_model: params length mismatch");
    }
    auto out = open_out(path);
    out << "fedgame-model v1\n";
    out << "input " << arch.input_size << "\n";
    out << "hidden";
    for (int h : arch.hidden_sizes) out << ' ' << h;
    out << "\n";
    out << "output " << arch.output_size << "\n";
    out << "dropout " << format_double(arch.dropout_rate) << "\n";
    out << "params " << params.size() << "\n";
    for (Eigen::Index j = 0; j < params.size(); ++j) {
        out << format_double(params[j]) << "\n";
    }
    finish_write(out, path);
}

std::pair<nn::Architecture, Eigen::VectorXd> load_model(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    std::size_t lineno = 0;

    auto next_line = [&]() {
        if (!std::getline(in, line)) bad_row(path, lineno + 1, "unexpected end of file");
        ++lineno;
        return line;
    };

    if (next_line() != "fedgame-model v1") bad_row(path, lineno, "bad magic/version");

    nn::Architecture arch;
    arch.hidden_sizes.clear();
    {
        std::istringstream ss(next_line());
        std::string key;
        if (!(ss >> key >> arch.input_size) || key != "input") {
            bad_row(path, lineno, "expected 'input <n>'");
        }
    }
    {
        std::istringstream ss(next_line());
        std::string key;
        if (!(ss >> key) || key != "hidden") bad_row(path, lineno, "expected 'hidden ...'");
        int h;
        while (ss >> h) arch.hidden_sizes.push_back(h);
    }
    {
        std::istringstream ss(next_line());
        std::string key;
        if (!(ss >> key >> arch.output_size) || key != "output") {
            bad_row(path, lineno, "expected 'output <n>'");
        }
    }
    {
        std::istringstream ss(next_line());
        std::string key;
        if (!(ss >> key >> arch.dropout_rate) || key != "dropout") {
            bad_row(path, lineno, "expected 'dropout <rate>'");
        }
    }
    Eigen::Index count = 0;
    {
        std::istringstream ss(next_line());
        std::string key;
        if (!(ss >> key >> count) || key != "params") {
            bad_row(path, lineno, "expected 'params <count>'");
        }
    }
    try {
        arch.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (count != nn::param_count(arch)) {
        bad_row(path, lineno, "parameter count does not match architecture");
    }
    Eigen::VectorXd params(count);
    for (Eigen::Index j = 0; j < count; ++j) {
        params[j] = parse_double(next_line(), path, lineno);
    }
    return {arch, params};
}

nlohmann::json mixed_equilibrium_report(const std::vector<nash::MixedEquilibrium>& eqs,
                                        const game::GameCosts& costs) {
    nlohmann::json report;
    report["game"] = "two_client";
    report["costs"] = {{"attack", costs.attack_cost}, {"admission", costs.admission_cost}};
    report["equilibria"] = nlohmann::json::array();
    for (const auto& eq : eqs) {
        report["equilibria"].push_back(
            {{"kind", eq.kind == nash::MixedEquilibrium::Kind::kInterior ? "interior"
                                                                         : "boundary"},
             {"p", eq.profile.attack_prob},
             {"q", eq.profile.admission_prob},
             {"u_defender", eq.defender_utility},
             {"u_attacker", eq.attacker_utility},
             {"residuals",
              {{"client", eq.client_residual}, {"attacker", eq.attacker_residual}}},
             {"verified", eq.verified}});
    }
    return report;
}

nlohmann::json pure_equilibrium_report(const nash::PureSolution& solution, int n,
                                       const game::GameCosts& costs) {
    nlohmann::json report;
    report["game"] = "n_client";
    report["n"] = n;
    report["costs"] = {{"attack", costs.attack_cost}, {"admission", costs.admission_cost}};
    report["equilibria"] = nlohmann::json::array();
    for (const auto& eq : solution.equilibria) {
        report["equilibria"].push_back({{"i_star", eq.admitted},
                                        {"m_star", eq.poisoned},
                                        {"u_defender", eq.defender_utility},
                                        {"u_attacker", eq.attacker_utility}});
    }
    if (solution.equilibria.empty()) {
        report["no_pure_equilibrium"] = true;
        nlohmann::json responses;
        responses["attacker"] = solution.responses.attacker;
        responses["defender"] = solution.responses.defender;
        report["best_response"] = responses;
    }
    return report;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << j.dump(2) << "\n";
    finish_write(out, path);
}

}  // namespace fedgame::io
