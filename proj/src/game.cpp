#include "fedgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fedgame::game {

namespace {

void check_prob(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " outside [0, 1]");
    }
}

void check_two_client_table(const AccuracyTable& table) {
    table.validate();
    if (table.n < 2) {
        throw std::invalid_argument("two-client utilities need a table with n >= 2");
    }
}

// Exact binomial coefficient; the largest value for n <= 64 is C(64, 32),
// which fits in 64 bits. Intermediates go through 128 bits.
std::uint64_t binomial_u64(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 r = 1;
    for (int j = 1; j <= k; ++j) {
        r = r * static_cast<unsigned>(n - k + j) / static_cast<unsigned>(j);
    }
    return static_cast<std::uint64_t>(r);
}

double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

void GameCosts::validate() const {
    if (!(attack_cost >= 0.0) || !std::isfinite(attack_cost) ||
        !(admission_cost >= 0.0) || !std::isfinite(admission_cost)) {
        throw std::invalid_argument("GameCosts: costs must be finite and >= 0");
    }
}

void MixedProfile::validate() const {
    check_prob(attack_prob, "MixedProfile: attack_prob");
    check_prob(admission_prob, "MixedProfile: admission_prob");
}

int bound_k(int n, int m, int i, DefenseAssignment assignment) {
    if (n < 0 || m < 0 || m > n || i < 0 || i > n) {
        throw std::invalid_argument("bound_k: need 0 <= m <= n and 0 <= i <= n");
    }
    return assignment == DefenseAssignment::kBest ? std::max(m - (n - i), 0)
                                                  : std::min(m, i);
}

DefenseBound defense_bound_utility(const AccuracyTable& table, const GameCosts& costs,
                                   DefenseAssignment assignment,
                                   std::optional<AttackerStance> stance) {
    table.validate();
    costs.validate();
    const AttackerStance s = stance.value_or(assignment == DefenseAssignment::kBest
                                                 ? AttackerStance::kFavorable
                                                 : AttackerStance::kAdversarial);
    DefenseBound result;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= table.n; ++i) {
        double inner = s == AttackerStance::kFavorable
                           ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
        int inner_m = 0;
        for (int m = 0; m <= table.n; ++m) {
            const double u = table.at(i, bound_k(table.n, m, i, assignment)) -
                             i * costs.admission_cost;
            const bool take = s == AttackerStance::kFavorable ? u > inner : u < inner;
            if (take) {
                inner = u;
                inner_m = m;
            }
        }
        if (inner > best) {
            best = inner;
            result = {inner, i, inner_m};
        }
    }
    return result;
}

double client_utility_participate(double q_other, double p_self, double p_other,
                                  const AccuracyTable& table, double admission_cost) {
    check_prob(q_other, "q_other");
    check_prob(p_self, "p_self");
    check_prob(p_other, "p_other");
    check_two_client_table(table);
    const double u11 = table.at(1, 1), u01 = table.at(1, 0);
    const double u22 = table.at(2, 2), u12 = table.at(2, 1), u02 = table.at(2, 0);
    const double c = admission_cost;
    return q_other * (p_self * p_other * (u22 - c) +
                      p_self * (1.0 - p_other) * (u12 - c) +
                      (1.0 - p_self) * p_other * (u12 - c) +
                      (1.0 - p_self) * (1.0 - p_other) * (u02 - c)) +
           (1.0 - q_other) * (p_self * (u11 - c) + (1.0 - p_self) * (u01 - c));
}

double client_utility_decline(double q_other, double p_other,
                              const AccuracyTable& table) {
    check_prob(q_other, "q_other");
    check_prob(p_other, "p_other");
    check_two_client_table(table);
    return q_other * (p_other * table.at(1, 1) + (1.0 - p_other) * table.at(1, 0)) +
           (1.0 - q_other) * table.at(0, 0);
}

double client_avg_utility(double q_self, double q_other, double p_self, double p_other,
                          const AccuracyTable& table, double admission_cost) {
    check_prob(q_self, "q_self");
    return q_self * client_utility_participate(q_other, p_self, p_other, table,
                                               admission_cost) +
           (1.0 - q_self) * client_utility_decline(q_other, p_other, table);
}

AttackerCaseUtilities attacker_case_utilities(double q1, double q2,
                                              const AccuracyTable& table,
                                              double attack_cost) {
    check_prob(q1, "q1");
    check_prob(q2, "q2");
    check_two_client_table(table);
    const double u00 = table.at(0, 0);
    const double u01 = table.at(1, 0), u11 = table.at(1, 1);
    const double u02 = table.at(2, 0), u12 = table.at(2, 1), u22 = table.at(2, 2);
    const double c = attack_cost;

    AttackerCaseUtilities u;
    u.both = q1 * q2 * (-u22 - 2.0 * c) +
             q1 * (1.0 - q2) * (-u11 - 2.0 * c) +
             (1.0 - q1) * q2 * (-u11 - 2.0 * c) +
             (1.0 - q1) * (1.0 - q2) * (-u00 - 2.0 * c);
    u.only_first = q1 * q2 * (-u12 - c) +
                   q1 * (1.0 - q2) * (-u11 - c) +
                   (1.0 - q1) * q2 * (-u01 - c) +
                   (1.0 - q1) * (1.0 - q2) * (-u00 - c);
    u.only_second = q1 * q2 * (-u12 - c) +
                    q1 * (1.0 - q2) * (-u01 - c) +
                    (1.0 - q1) * q2 * (-u11 - c) +
                    (1.0 - q1) * (1.0 - q2) * (-u00 - c);
    u.none = q1 * q2 * (-u02) +
             q1 * (1.0 - q2) * (-u01) +
             (1.0 - q1) * q2 * (-u01) +
             (1.0 - q1) * (1.0 - q2) * (-u00);
    return u;
}

double attacker_avg_utility(double p1, double p2, double q1, double q2,
                            const AccuracyTable& table, double attack_cost) {
    check_prob(p1, "p1");
    check_prob(p2, "p2");
    const AttackerCaseUtilities u = attacker_case_utilities(q1, q2, table, attack_cost);
    return p1 * p2 * u.both + p1 * (1.0 - p2) * u.only_first +
           (1.0 - p1) * p2 * u.only_second + (1.0 - p1) * (1.0 - p2) * u.none;
}

double hypergeom_weight(int n, int m, int i, int k) {
    if (n < 0) throw std::invalid_argument("hypergeom_weight: n must be >= 0");
    // Impossible selections carry zero probability rather than erroring, so
    // callers can sum uniformly over k = 0..min(m, i).
    if (m < 0 || m > n || i < 0 || i > n || k < 0 || k > i || k > m || m - k > n - i) {
        return 0.0;
    }
    if (n <= 64) {
        const long double num = static_cast<long double>(binomial_u64(i, k)) *
                                static_cast<long double>(binomial_u64(n - i, m - k));
        const long double den = static_cast<long double>(binomial_u64(n, m));
        return static_cast<double>(num / den);
    }
    return std::exp(log_binomial(i, k) + log_binomial(n - i, m - k) -
                    log_binomial(n, m));
}

double attack_utility_nm(int i, int m, const AccuracyTable& table, double attack_cost) {
    table.validate();
    if (i < 0 || i > table.n || m < 0 || m > table.n) {
        throw std::invalid_argument("attack_utility_nm: i or m out of range");
    }
    double expected = 0.0;
    for (int k = 0; k <= std::min(m, i); ++k) {
        expected += hypergeom_weight(table.n, m, i, k) * table.at(i, k);
    }
    return -expected - m * attack_cost;
}

double defense_utility_nm(int i, int m, const AccuracyTable& table,
                          double admission_cost) {
    table.validate();
    if (i < 0 || i > table.n || m < 0 || m > table.n) {
        throw std::invalid_argument("defense_utility_nm: i or m out of range");
    }
    double expected = 0.0;
    for (int k = 0; k <= std::min(m, i); ++k) {
        expected += hypergeom_weight(table.n, m, i, k) * table.at(i, k);
    }
    return expected - i * admission_cost;
}

}  // namespace fedgame::game
