#pragma once

#include <vector>

#include "fedgame/accuracy_table.hpp"
#include "fedgame/game.hpp"

namespace fedgame::nash {

// A symmetric two-client mixed profile together with its stationarity
// residuals, payoffs and the outcome of the deviation check. Interior means
// both probabilities lie strictly inside (0, 1).
struct MixedEquilibrium {
    enum class Kind { kInterior, kBoundary };

    game::MixedProfile profile;
    Kind kind = Kind::kBoundary;
    double client_residual = 0.0;
    double attacker_residual = 0.0;
    bool verified = false;
    double defender_utility = 0.0;  // per-client
    double attacker_utility = 0.0;
};

struct PureEquilibrium {
    int admitted = 0;    // i*
    int poisoned = 0;    // m*
    double defender_utility = 0.0;
    double attacker_utility = 0.0;
};

// attacker[i] = all m maximizing the attack utility against i admitted;
// defender[m] = all i maximizing the defense utility against m poisoned.
// Ties are kept; maxima are exact.
struct BestResponseMap {
    std::vector<std::vector<int>> attacker;
    std::vector<std::vector<int>> defender;
};

// Difference between participating and declining for one client at the
// symmetric profile (p, q); zero at a client-indifferent point.
double client_indifference_residual(double p, double q, const AccuracyTable& table,
                                    double admission_cost);

// The attacker's stationarity expression at the symmetric profile (p, q);
// zero where a marginal change of either attack probability does not pay.
double attacker_indifference_residual(double p, double q, const AccuracyTable& table,
                                      double attack_cost);

struct SolveOptions {
    int grid_points = 2001;      // p-grid for the interior search
    double residual_tol = 1e-9;  // bisection stopping criterion
    double deviation_tol = 1e-6; // max tolerated unilateral improvement
    int deviation_grid = 1001;   // grid for the deviation oracle
};

// All symmetric equilibria of the two-client game: interior roots of the two
// indifference conditions (the client condition is affine in q and solved in
// closed form; the attacker condition is bisected along the resulting curve)
// plus boundary profiles (corners and one-sided indifference on edges). Every
// returned profile passed the unilateral-deviation oracle, which for the
// attacker also covers joint corner deviations of (p1, p2). Sorted by (p, q).
std::vector<MixedEquilibrium> solve_two_client(const AccuracyTable& table,
                                               const game::GameCosts& costs,
                                               const SolveOptions& options = {});

inline std::vector<MixedEquilibrium> solve_two_client(const AccuracyTable& table,
                                                      const game::GameCosts& costs,
                                                      int grid_points, double tol) {
    SolveOptions options;
    options.grid_points = grid_points;
    options.residual_tol = tol;
    return solve_two_client(table, costs, options);
}

// All m in {0..n} maximizing the attack utility against i admitted clients.
std::vector<int> best_response_attacker(int i, const AccuracyTable& table,
                                        double attack_cost);

// All i in {0..n} maximizing the defense utility against m poisoned clients.
std::vector<int> best_response_defender(int m, const AccuracyTable& table,
                                        double admission_cost);

struct PureSolution {
    std::vector<PureEquilibrium> equilibria;  // sorted by (i*, m*); may be empty
    BestResponseMap responses;                // always emitted, for diagnosis
};

// Exhaustive mutual-best-response scan over all (i, m) in {0..n}^2.
PureSolution find_pure_nash(const AccuracyTable& table, const game::GameCosts& costs);

struct SweepPoint {
    int n = 0;
    bool has_equilibrium = false;
    PureEquilibrium equilibrium;  // meaningful only when has_equilibrium
};

// find_pure_nash per table; on multiplicity keeps the equilibrium with the
// highest defender utility (then smallest (i*, m*)); emptiness is recorded as
// a gap point.
std::vector<SweepPoint> equilibrium_sweep(const std::vector<AccuracyTable>& tables,
                                          const game::GameCosts& costs);

}  // namespace fedgame::nash
