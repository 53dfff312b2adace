#pragma once

#include <cstdint>
#include <optional>

#include "fedgame/accuracy_table.hpp"

namespace fedgame::game {

// Per-client costs, in accuracy units: what the attacker pays to poison one
// client and what the defender pays to admit one.
struct GameCosts {
    double attack_cost = 0.0;
    double admission_cost = 0.0;

    void validate() const;
};

// Symmetric two-client strategies: per-client attack probability p and
// per-client admission probability q.
struct MixedProfile {
    double attack_prob = 0.0;
    double admission_prob = 0.0;

    void validate() const;
};

// How poisoned clients land among the admitted ones when i of n are admitted
// and m of n are poisoned: the best assignment rejects poisoned clients first
// (k = max(m - (n - i), 0)), the worst admits them first (k = min(m, i)).
enum class DefenseAssignment { kBest, kWorst };

int bound_k(int n, int m, int i, DefenseAssignment assignment);

// Whether the attacker's m is chosen in the defender's favor (max over m) or
// adversarially (min over m) when computing a bound curve.
enum class AttackerStance { kFavorable, kAdversarial };

struct DefenseBound {
    double utility = 0.0;
    int admitted = 0;
    int poisoned = 0;
};

// Optimum of U_{k(assignment)|i} - i * admission_cost over the admitted count
// i, with m resolved by `stance`. Defaults: the best-assignment curve takes
// the favorable m (upper envelope), the worst-assignment curve takes the
// adversarial m (lower envelope), so the two curves bracket the defense
// utility for any table.
DefenseBound defense_bound_utility(const AccuracyTable& table, const GameCosts& costs,
                                   DefenseAssignment assignment,
                                   std::optional<AttackerStance> stance = std::nullopt);

// --- Two-client utilities (tables must cover i <= 2) ---

// Expected utility of a client that participates, given the other client's
// admission probability and both attack probabilities.
double client_utility_participate(double q_other, double p_self, double p_other,
                                  const AccuracyTable& table, double admission_cost);

// Expected utility of a client that declines; it still benefits from the
// global model trained by the other client.
double client_utility_decline(double q_other, double p_other,
                              const AccuracyTable& table);

// Mixture of the two by the client's own admission probability.
double client_avg_utility(double q_self, double q_other, double p_self, double p_other,
                          const AccuracyTable& table, double admission_cost);

// The attacker's four pure options: poison both clients, poison only the
// first, poison only the second, poison none. Each is an expectation over the
// admission outcomes, with the model accuracy negated and the poisoning cost
// charged per targeted client whether or not it is admitted.
struct AttackerCaseUtilities {
    double both = 0.0;
    double only_first = 0.0;
    double only_second = 0.0;
    double none = 0.0;
};

AttackerCaseUtilities attacker_case_utilities(double q1, double q2,
                                              const AccuracyTable& table,
                                              double attack_cost);

// Bilinear mixture of the four cases by the per-client attack probabilities.
double attacker_avg_utility(double p1, double p2, double q1, double q2,
                            const AccuracyTable& table, double attack_cost);

// --- n-client utilities ---

// Probability that exactly k of m uniformly chosen poisoned clients fall
// among the i admitted ones: C(i,k) C(n-i,m-k) / C(n,m). Infeasible
// combinations have weight 0. Exact (64-bit binomials) for n <= 64,
// log-gamma beyond.
double hypergeom_weight(int n, int m, int i, int k);

// Expected negated accuracy under uniform poisoning of m clients, minus the
// attack cost m * attack_cost.
double attack_utility_nm(int i, int m, const AccuracyTable& table, double attack_cost);

// Expected accuracy minus the admission cost i * admission_cost.
double defense_utility_nm(int i, int m, const AccuracyTable& table,
                          double admission_cost);

}  // namespace fedgame::game
