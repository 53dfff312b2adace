#include "fedgame/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fedgame::nash {

namespace {

void check_prob(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " outside [0, 1]");
    }
}

struct TwoClientTable {
    double u00, u01, u11, u02, u12, u22;

    explicit TwoClientTable(const AccuracyTable& t)
        : u00(t.at(0, 0)),
          u01(t.at(1, 0)),
          u11(t.at(1, 1)),
          u02(t.at(2, 0)),
          u12(t.at(2, 1)),
          u22(t.at(2, 2)) {
        t.validate();
        if (t.n < 2) {
            throw std::invalid_argument("two-client solver needs a table with n >= 2");
        }
    }
};

// Maximal unilateral improvement available to either side at the symmetric
// profile (p, q). Client deviations move one admission probability across the
// grid; attacker deviations move one attack probability across the grid and
// additionally jump to the four pure corners of (p1, p2) -- the attack
// utility is bilinear, so its exact optimum over the square lies on a corner.
double max_deviation_gain(double p, double q, const AccuracyTable& table,
                          const game::GameCosts& costs, int grid) {
    const double u_client = game::client_avg_utility(q, q, p, p, table,
                                                     costs.admission_cost);
    const double u_attacker = game::attacker_avg_utility(p, p, q, q, table,
                                                         costs.attack_cost);
    double gain = 0.0;
    for (int j = 0; j < grid; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(grid - 1);
        gain = std::max(gain, game::client_avg_utility(x, q, p, p, table,
                                                       costs.admission_cost) -
                                  u_client);
        gain = std::max(gain, game::attacker_avg_utility(x, p, q, q, table,
                                                         costs.attack_cost) -
                                  u_attacker);
        gain = std::max(gain, game::attacker_avg_utility(p, x, q, q, table,
                                                         costs.attack_cost) -
                                  u_attacker);
    }
    for (double a : {0.0, 1.0}) {
        for (double b : {0.0, 1.0}) {
            gain = std::max(gain, game::attacker_avg_utility(a, b, q, q, table,
                                                             costs.attack_cost) -
                                      u_attacker);
        }
    }
    return gain;
}

}  // namespace

double client_indifference_residual(double p, double q, const AccuracyTable& table,
                                    double admission_cost) {
    check_prob(p, "p");
    check_prob(q, "q");
    const TwoClientTable t(table);
    const double c = admission_cost;
    return q * (p * p * (t.u22 - 2.0 * t.u12 + t.u02) +
                p * (2.0 * t.u12 - 2.0 * t.u02 - t.u11 + t.u01) +
                t.u02 - c - t.u01) +
           (1.0 - q) * (p * (t.u11 - t.u01) + t.u01 - c - t.u00);
}

double attacker_indifference_residual(double p, double q, const AccuracyTable& table,
                                      double attack_cost) {
    check_prob(p, "p");
    check_prob(q, "q");
    const TwoClientTable t(table);
    const double q2 = q * q;
    return -p * q2 * t.u22 - q2 * t.u12 - q * t.u11 + q2 * t.u11 - q * t.u01 +
           q2 * t.u01 - attack_cost - q2 * t.u00 + 2.0 * p * q2 * t.u12 +
           q2 * t.u02 + 2.0 * q * t.u01 - 2.0 * q2 * t.u01 + q2 * t.u00 -
           p * q2 * t.u02;
}

std::vector<MixedEquilibrium> solve_two_client(const AccuracyTable& table,
                                               const game::GameCosts& costs,
                                               const SolveOptions& options) {
    costs.validate();
    const TwoClientTable t(table);
    if (options.grid_points < 101) {
        throw std::invalid_argument("solve_two_client: grid_points must be >= 101");
    }
    if (!(options.residual_tol > 0.0)) {
        throw std::invalid_argument("solve_two_client: tol must be > 0");
    }

    // Client residual as q * alpha(p) + (1 - q) * beta(p).
    const auto alpha = [&](double p) {
        return client_indifference_residual(p, 1.0, table, costs.admission_cost);
    };
    const auto beta = [&](double p) {
        return client_indifference_residual(p, 0.0, table, costs.admission_cost);
    };
    const auto attacker_residual = [&](double p, double q) {
        return attacker_indifference_residual(p, q, table, costs.attack_cost);
    };

    constexpr double kDegenerate = 1e-14;
    constexpr double kInvalid = std::numeric_limits<double>::quiet_NaN();

    // q on the client-indifference curve for this p, or NaN when none exists
    // in [0, 1].
    const auto indifferent_q = [&](double p) {
        const double a = alpha(p), b = beta(p);
        if (std::abs(b - a) < kDegenerate) return kInvalid;
        const double q = b / (b - a);
        if (q < -1e-12 || q > 1.0 + 1e-12) return kInvalid;
        return std::clamp(q, 0.0, 1.0);
    };

    std::vector<game::MixedProfile> candidates;
    const auto add_candidate = [&](double p, double q) {
        if (std::isnan(p) || std::isnan(q)) return;
        p = std::clamp(p, 0.0, 1.0);
        q = std::clamp(q, 0.0, 1.0);
        for (const auto& c : candidates) {
            if (std::abs(c.attack_prob - p) + std::abs(c.admission_prob - q) < 1e-7) {
                return;
            }
        }
        candidates.push_back({p, q});
    };

    // (a) interior search along the client-indifference curve.
    const int grid = options.grid_points;
    double prev_p = kInvalid, prev_g = kInvalid;
    for (int j = 0; j < grid; ++j) {
        const double p = static_cast<double>(j) / static_cast<double>(grid - 1);
        const double q = indifferent_q(p);
        if (std::isnan(q)) {
            // Degenerate fiber: the client residual no longer depends on q.
            // When it vanishes entirely, every q is client-indifferent and the
            // attacker condition (a quadratic in q) picks the candidates.
            if (std::abs(alpha(p) - beta(p)) < kDegenerate &&
                std::abs(beta(p)) < options.residual_tol) {
                const double qq = -p * (t.u22 - 2.0 * t.u12 + t.u02) +
                                  (t.u02 - t.u12 + t.u11 - t.u01);
                const double lin = t.u01 - t.u11;
                const double cst = -costs.attack_cost;
                if (std::abs(qq) < kDegenerate) {
                    if (std::abs(lin) > kDegenerate) add_candidate(p, -cst / lin);
                } else {
                    const double disc = lin * lin - 4.0 * qq * cst;
                    if (disc >= 0.0) {
                        const double root = std::sqrt(disc);
                        add_candidate(p, (-lin + root) / (2.0 * qq));
                        add_candidate(p, (-lin - root) / (2.0 * qq));
                    }
                }
                add_candidate(p, 0.0);
                add_candidate(p, 1.0);
            }
            prev_p = kInvalid;
            continue;
        }
        const double g = attacker_residual(p, q);
        if (std::abs(g) < options.residual_tol) {
            add_candidate(p, q);
        } else if (!std::isnan(prev_p) && prev_g * g < 0.0) {
            // Bisection on p along the curve.
            double lo = prev_p, hi = p, glo = prev_g;
            double root_p = p, root_q = q;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double qm = indifferent_q(mid);
                if (std::isnan(qm)) break;
                const double gm = attacker_residual(mid, qm);
                root_p = mid;
                root_q = qm;
                if (std::abs(gm) < options.residual_tol) break;
                if (glo * gm < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            if (!std::isnan(root_q) &&
                std::abs(attacker_residual(root_p, root_q)) < options.residual_tol) {
                add_candidate(root_p, root_q);
            }
        }
        prev_p = p;
        prev_g = g;
    }

    // (b) boundary search: corners, then one-sided indifference on each edge.
    for (double p : {0.0, 1.0}) {
        for (double q : {0.0, 1.0}) add_candidate(p, q);
    }
    for (double p : {0.0, 1.0}) {
        const double q = indifferent_q(p);
        if (!std::isnan(q)) add_candidate(p, q);
    }
    for (double q : {0.0, 1.0}) {
        // Attacker stationarity is affine in p at fixed q.
        const double qq = q * q;
        const double slope = -qq * (t.u22 - 2.0 * t.u12 + t.u02);
        const double rest = qq * (t.u02 - t.u12 + t.u11 - t.u01) +
                            q * (t.u01 - t.u11) - costs.attack_cost;
        if (std::abs(slope) > kDegenerate) {
            const double p = -rest / slope;
            if (p >= 0.0 && p <= 1.0) add_candidate(p, q);
        }
    }

    // (c) verification: keep profiles no unilateral deviation can beat.
    std::vector<MixedEquilibrium> out;
    for (const auto& profile : candidates) {
        const double gain =
            max_deviation_gain(profile.attack_prob, profile.admission_prob, table,
                               costs, options.deviation_grid);
        if (gain > options.deviation_tol) continue;
        MixedEquilibrium eq;
        eq.profile = profile;
        const bool interior = profile.attack_prob > 0.0 && profile.attack_prob < 1.0 &&
                              profile.admission_prob > 0.0 &&
                              profile.admission_prob < 1.0;
        eq.kind = interior ? MixedEquilibrium::Kind::kInterior
                           : MixedEquilibrium::Kind::kBoundary;
        eq.client_residual = client_indifference_residual(
            profile.attack_prob, profile.admission_prob, table, costs.admission_cost);
        eq.attacker_residual = attacker_indifference_residual(
            profile.attack_prob, profile.admission_prob, table, costs.attack_cost);
        eq.verified = true;
        eq.defender_utility =
            game::client_avg_utility(profile.admission_prob, profile.admission_prob,
                                     profile.attack_prob, profile.attack_prob, table,
                                     costs.admission_cost);
        eq.attacker_utility =
            game::attacker_avg_utility(profile.attack_prob, profile.attack_prob,
                                       profile.admission_prob, profile.admission_prob,
                                       table, costs.attack_cost);
        out.push_back(eq);
    }
    std::sort(out.begin(), out.end(), [](const MixedEquilibrium& a,
                                         const MixedEquilibrium& b) {
        if (a.profile.attack_prob != b.profile.attack_prob) {
            return a.profile.attack_prob < b.profile.attack_prob;
        }
        return a.profile.admission_prob < b.profile.admission_prob;
    });
    return out;
}

std::vector<int> best_response_attacker(int i, const AccuracyTable& table,
                                        double attack_cost) {
    table.validate();
    if (i < 0 || i > table.n) {
        throw std::invalid_argument("best_response_attacker: i out of range");
    }
    std::vector<double> u(static_cast<std::size_t>(table.n) + 1);
    double best = -std::numeric_limits<double>::infinity();
    for (int m = 0; m <= table.n; ++m) {
        u[static_cast<std::size_t>(m)] = game::attack_utility_nm(i, m, table, attack_cost);
        best = std::max(best, u[static_cast<std::size_t>(m)]);
    }
    std::vector<int> argmax;
    for (int m = 0; m <= table.n; ++m) {
        if (u[static_cast<std::size_t>(m)] == best) argmax.push_back(m);
    }
    return argmax;
}

std::vector<int> best_response_defender(int m, const AccuracyTable& table,
                                        double admission_cost) {
    table.validate();
    if (m < 0 || m > table.n) {
        throw std::invalid_argument("best_response_defender: m out of range");
    }
    std::vector<double> u(static_cast<std::size_t>(table.n) + 1);
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= table.n; ++i) {
        u[static_cast<std::size_t>(i)] =
            game::defense_utility_nm(i, m, table, admission_cost);
        best = std::max(best, u[static_cast<std::size_t>(i)]);
    }
    std::vector<int> argmax;
    for (int i = 0; i <= table.n; ++i) {
        if (u[static_cast<std::size_t>(i)] == best) argmax.push_back(i);
    }
    return argmax;
}

PureSolution find_pure_nash(const AccuracyTable& table, const game::GameCosts& costs) {
    table.validate();
    costs.validate();
    PureSolution solution;
    solution.responses.attacker.resize(static_cast<std::size_t>(table.n) + 1);
    solution.responses.defender.resize(static_cast<std::size_t>(table.n) + 1);
    for (int i = 0; i <= table.n; ++i) {
        solution.responses.attacker[static_cast<std::size_t>(i)] =
            best_response_attacker(i, table, costs.attack_cost);
    }
    for (int m = 0; m <= table.n; ++m) {
        solution.responses.defender[static_cast<std::size_t>(m)] =
            best_response_defender(m, table, costs.admission_cost);
    }
    for (int i = 0; i <= table.n; ++i) {
        const auto& br_a = solution.responses.attacker[static_cast<std::size_t>(i)];
        for (int m = 0; m <= table.n; ++m) {
            const auto& br_d = solution.responses.defender[static_cast<std::size_t>(m)];
            if (std::binary_search(br_a.begin(), br_a.end(), m) &&
                std::binary_search(br_d.begin(), br_d.end(), i)) {
                solution.equilibria.push_back(
                    {i, m, game::defense_utility_nm(i, m, table, costs.admission_cost),
                     game::attack_utility_nm(i, m, table, costs.attack_cost)});
            }
        }
    }
    return solution;
}

std::vector<SweepPoint> equilibrium_sweep(const std::vector<AccuracyTable>& tables,
                                          const game::GameCosts& costs) {
    std::vector<SweepPoint> curve;
    curve.reserve(tables.size());
    for (const auto& table : tables) {
        const PureSolution solution = find_pure_nash(table, costs);
        SweepPoint point;
        point.n = table.n;
        for (const auto& eq : solution.equilibria) {
            if (!point.has_equilibrium ||
                eq.defender_utility > point.equilibrium.defender_utility) {
                point.has_equilibrium = true;
                point.equilibrium = eq;
            }
        }
        curve.push_back(point);
    }
    return curve;
}

}  // namespace fedgame::nash
