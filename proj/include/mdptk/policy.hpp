/**
 * Policies and policy functionals.
 *
 * A policy is a time-indexed table of action distributions, one row per
 * (timestep, state).  Stationary priors are stored by replicating their row
 * across timesteps.  This header hosts every policy functional: trajectory
 * distribution, expected return J, success probability, occupancy measures,
 * occupancy-form trajectory KL plus its brute-force oracle, causal entropy,
 * and the total-variation policy metric.
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mdptk/logprob.hpp"
#include "mdptk/mdp.hpp"

namespace mdptk {

struct Policy {
    // rows[t][s] = distribution over actions at timestep t in state s.
    std::vector<std::vector<std::vector<double>>> rows;

    int horizon() const { return static_cast<int>(rows.size()); }

    const std::vector<double>& row(int t, int s) const { return rows[t][s]; }
    std::vector<double>& row(int t, int s) { return rows[t][s]; }
};

/// Uniform policy over all actions at every (t, s).
inline Policy uniform_policy(const Mdp& m) {
    Policy pi;
    pi.rows.assign(m.horizon,
                   std::vector<std::vector<double>>(
                       m.num_states(),
                       std::vector<double>(m.num_actions(),
                                           1.0 / m.num_actions())));
    return pi;
}

/// Stationary policy: one per-state row replicated across all timesteps.
inline Policy stationary_policy(const Mdp& m,
                                const std::vector<std::vector<double>>& rows) {
    Policy pi;
    pi.rows.assign(m.horizon, rows);
    return pi;
}

/// Invariant check mirroring validate_mdp; empty list iff valid for m.
inline std::vector<std::string> validate_policy(const Mdp& m, const Policy& pi) {
    std::vector<std::string> out;
    if (pi.horizon() != m.horizon) {
        out.push_back("policy covers " + std::to_string(pi.horizon()) +
                      " timesteps, MDP horizon is " + std::to_string(m.horizon));
        return out;
    }
    for (int t = 0; t < m.horizon; ++t) {
        if (static_cast<int>(pi.rows[t].size()) != m.num_states()) {
            out.push_back("timestep " + std::to_string(t) +
                          " has wrong state dimension");
            continue;
        }
        for (int s = 0; s < m.num_states(); ++s) {
            const auto& row = pi.rows[t][s];
            if (static_cast<int>(row.size()) != m.num_actions()) {
                out.push_back("row (t=" + std::to_string(t) + ", " +
                              m.states[s] + ") has wrong size");
                continue;
            }
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0)
                    out.push_back("negative action probability at (t=" +
                                  std::to_string(t) + ", " + m.states[s] + ")");
                sum += p;
            }
            if (std::fabs(sum - 1.0) > 1e-12)
                out.push_back("row (t=" + std::to_string(t) + ", " +
                              m.states[s] + ") sums to " + std::to_string(sum));
        }
    }
    return out;
}

/// True iff every row is a point mass.
inline bool is_deterministic_policy(const Policy& pi) {
    for (const auto& layer : pi.rows)
        for (const auto& row : layer)
            for (double p : row)
                if (p > 0.0 && p < 1.0) return false;
    return true;
}

// ===========================================================================
// Occupancy and trajectory distribution
// ===========================================================================

struct Occupancy {
    // table[t][s] = probability of being in s at timestep t, t in 0..T.
    std::vector<std::vector<double>> table;
};

/// Forward recursion from the initial distribution under pi.
inline Occupancy occupancy(const Mdp& m, const Policy& pi) {
    const int S = m.num_states();
    const int A = m.num_actions();
    Occupancy d;
    d.table.assign(m.horizon + 1, std::vector<double>(S, 0.0));
    d.table[0] = m.initial;
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < S; ++s) {
            const double ds = d.table[t][s];
            if (ds <= 0.0) continue;
            for (int a = 0; a < A; ++a) {
                const double pa = pi.rows[t][s][a];
                if (pa <= 0.0) continue;
                for (int next = 0; next < S; ++next) {
                    const double pt = m.transition[s][a][next];
                    if (pt > 0.0) d.table[t + 1][next] += ds * pa * pt;
                }
            }
        }
    return d;
}

/// Probability of one trajectory under (mu, pi, tau).
inline double trajectory_probability(const Mdp& m, const Policy& pi,
                                     const Trajectory& traj) {
    double p = m.initial[traj.states.front()];
    for (std::size_t t = 0; t < traj.actions.size(); ++t) {
        const int s = traj.states[t];
        const int a = traj.actions[t];
        p *= pi.rows[t][s][a] * m.transition[s][a][traj.states[t + 1]];
        if (p == 0.0) return 0.0;
    }
    return p;
}

/// The full trajectory distribution: every dynamics-supported trajectory with
/// its probability under pi (possibly 0 when pi avoids it).  Sums to 1.
inline std::vector<std::pair<Trajectory, double>> trajectory_distribution(
    const Mdp& m, const Policy& pi, double cap = 1e7) {
    std::vector<std::pair<Trajectory, double>> out;
    for (const auto& e : enumerate_trajectories(m, cap))
        out.emplace_back(e.trajectory, trajectory_probability(m, pi, e.trajectory));
    return out;
}

// ===========================================================================
// Return, success probability, entropy
// ===========================================================================

/// J(pi) = E over trajectories of the total log-domain reward; -inf exactly
/// when some positive-probability trajectory has -inf total reward.
inline double expected_return(const Mdp& m, const Policy& pi, double cap = 1e7) {
    double acc = 0.0;
    for (const auto& e : enumerate_trajectories(m, cap)) {
        const double p = trajectory_probability(m, pi, e.trajectory);
        if (p <= 0.0) continue;
        const double r = trajectory_reward(m, e.trajectory);
        if (is_log_zero(r)) return log_zero;
        acc += p * r;
    }
    return acc;
}

/// p(all optimality variables succeed) = E over trajectories of exp(reward).
inline double success_probability(const Mdp& m, const Policy& pi,
                                  double cap = 1e7) {
    double acc = 0.0;
    for (const auto& e : enumerate_trajectories(m, cap)) {
        const double p = trajectory_probability(m, pi, e.trajectory);
        if (p <= 0.0) continue;
        acc += p * prob_from_log(trajectory_reward(m, e.trajectory));
    }
    return acc;
}

/// Causal entropy: occupancy-weighted sum of per-row Shannon entropies (nats).
inline double causal_entropy(const Mdp& m, const Policy& pi) {
    const Occupancy d = occupancy(m, pi);
    double acc = 0.0;
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < m.num_states(); ++s)
            if (d.table[t][s] > 0.0)
                acc += d.table[t][s] * entropy(pi.rows[t][s]);
    return acc;
}

// ===========================================================================
// Trajectory KL: occupancy form and enumeration oracle
// ===========================================================================

/// KL between the trajectory distributions of pi and rho, computed in
/// occupancy form: sum_t E_{s ~ d^t_pi} KL(pi(.|s,t) || rho(.|s,t)).
/// +inf iff pi puts mass where rho has none at some positive-occupancy state.
inline double trajectory_kl(const Mdp& m, const Policy& pi, const Policy& rho) {
    const Occupancy d = occupancy(m, pi);
    double acc = 0.0;
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < m.num_states(); ++s) {
            const double w = d.table[t][s];
            if (w <= 0.0) continue;
            const double kl = kl_divergence(pi.rows[t][s], rho.rows[t][s]);
            if (kl == pos_inf) return pos_inf;
            acc += w * kl;
        }
    return acc;
}

/// Brute-force KL directly over the two trajectory distributions.  The
/// dynamics factors cancel term by term; this oracle keeps them anyway so the
/// computation shares nothing with the occupancy form it is checked against.
inline double oracle_trajectory_kl(const Mdp& m, const Policy& pi,
                                   const Policy& rho, double cap = 1e7) {
    double acc = 0.0;
    for (const auto& e : enumerate_trajectories(m, cap)) {
        const double p = trajectory_probability(m, pi, e.trajectory);
        if (p <= 0.0) continue;
        const double q = trajectory_probability(m, rho, e.trajectory);
        if (q <= 0.0) return pos_inf;
        acc += p * std::log(p / q);
    }
    return acc;
}

// ===========================================================================
// Policy metric
// ===========================================================================

/// Max over positive-occupancy (t, s) — occupancy taken under the FIRST
/// policy — of the total-variation distance between the two action rows.
inline double policy_total_variation(const Mdp& m, const Policy& a,
                                     const Policy& b) {
    const Occupancy d = occupancy(m, a);
    double worst = 0.0;
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < m.num_states(); ++s) {
            if (d.table[t][s] <= 0.0) continue;
            const double tv = total_variation(a.rows[t][s], b.rows[t][s]);
            if (tv > worst) worst = tv;
        }
    return worst;
}

}  // namespace mdptk
