#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fedgame {

// Chance level for the binary task; also the value assigned to the empty
// federation, which has no trained model at all.
inline constexpr double kChanceAccuracy = 0.5;

// Lower-triangular map (i, k) -> mean global-model accuracy with i admitted
// clients of which k are poisoned, for 0 <= k <= i <= n.
struct AccuracyTable {
    int n = 0;
    std::vector<double> values;  // cell (i, k) at index i*(i+1)/2 + k
    int trials = 0;
    std::uint64_t seed = 0;

    static std::size_t index(int i, int k) {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(i + 1) / 2 +
               static_cast<std::size_t>(k);
    }

    static std::size_t cell_count(int n) { return index(n, n) + 1; }

    static AccuracyTable zeros(int n) {
        if (n < 0) throw std::invalid_argument("AccuracyTable: n must be >= 0");
        AccuracyTable t;
        t.n = n;
        t.values.assign(cell_count(n), 0.0);
        return t;
    }

    double& at(int i, int k) {
        check_cell(i, k);
        return values[index(i, k)];
    }

    double at(int i, int k) const {
        check_cell(i, k);
        return values[index(i, k)];
    }

    void validate() const {
        if (n < 0 || values.size() != cell_count(n)) {
            throw std::invalid_argument("AccuracyTable: storage does not match n");
        }
        for (double v : values) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("AccuracyTable: accuracy outside [0, 1]");
            }
        }
    }

private:
    void check_cell(int i, int k) const {
        if (i < 0 || i > n || k < 0 || k > i) {
            throw std::out_of_range("AccuracyTable: cell (i, k) out of range");
        }
    }
};

}  // namespace fedgame
