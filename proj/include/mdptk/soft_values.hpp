/**
 * Soft Q/V backward recursion and its brute-force oracles.
 *
 * Q(t, s, a) = step_reward(s, a) + log E_{s' ~ tau}[exp V(t+1, s')]
 * V(t, s)    = log E_{a ~ pi(.|s,t)}[exp Q(t, s, a)]
 * with boundary V(T, s) = terminal_reward(s).  All arithmetic is max-shifted
 * log-sum-exp with -inf handled exactly, so exp Q is the probability that
 * every remaining optimality variable succeeds given (s, a) at time t.
 *
 * The recursion is parametrised by a reward table so that operators which
 * rewrite rewards (temperature scaling, posterior folding) reuse it; folded
 * rewards are time-indexed even though base rewards are stationary.
 */
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdptk/logprob.hpp"
#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"

namespace mdptk {

// Thrown when an operation's mathematical scope excludes the given input
// (e.g. a deterministic-only proposition applied to a stochastic MDP).
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Time-indexed reward tables: step[t][s][a] and terminal[s], all <= 0.
struct RewardTable {
    std::vector<std::vector<std::vector<double>>> step;
    std::vector<double> terminal;
};

/// The MDP's own rewards, replicated across timesteps.
inline RewardTable base_rewards(const Mdp& m) {
    RewardTable r;
    r.step.assign(m.horizon, m.step_reward);
    r.terminal = m.terminal_reward;
    return r;
}

/// All rewards multiplied by alpha (alpha * -inf stays -inf).
inline RewardTable scaled_rewards(const Mdp& m, double alpha) {
    RewardTable r = base_rewards(m);
    for (auto& layer : r.step)
        for (auto& row : layer)
            for (double& x : row)
                if (!is_log_zero(x)) x *= alpha;
    for (double& x : r.terminal)
        if (!is_log_zero(x)) x *= alpha;
    return r;
}

struct SoftValues {
    std::vector<std::vector<std::vector<double>>> q;  // [t][s][a], t in 0..T-1
    std::vector<std::vector<double>> v;               // [t][s],    t in 0..T
};

/// Backward recursion under an explicit reward table.
inline SoftValues soft_values(const Mdp& m, const Policy& pi,
                              const RewardTable& rewards) {
    const int S = m.num_states();
    const int A = m.num_actions();
    SoftValues sv;
    sv.q.assign(m.horizon, std::vector<std::vector<double>>(
                               S, std::vector<double>(A, log_zero)));
    sv.v.assign(m.horizon + 1, std::vector<double>(S, log_zero));
    sv.v[m.horizon] = rewards.terminal;
    for (int t = m.horizon - 1; t >= 0; --t)
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const double r = rewards.step[t][s][a];
                if (is_log_zero(r)) {
                    sv.q[t][s][a] = log_zero;
                    continue;
                }
                const double lv =
                    weighted_log_sum_exp(sv.v[t + 1], m.transition[s][a]);
                sv.q[t][s][a] = is_log_zero(lv) ? log_zero : r + lv;
            }
            sv.v[t][s] = weighted_log_sum_exp(sv.q[t][s], pi.rows[t][s]);
        }
    return sv;
}

/// Backward recursion under the MDP's own rewards.
inline SoftValues soft_values(const Mdp& m, const Policy& pi) {
    return soft_values(m, pi, base_rewards(m));
}

// ===========================================================================
// Characterization oracle
// ===========================================================================

struct QvOracleReport {
    double max_gap = 0.0;
    int worst_t = -1, worst_state = -1, worst_action = -1;
    long checked = 0;
};

namespace detail {

/// p(all optimality variables from time t on succeed | s_t = s, a_t = a),
/// by explicit linear-domain enumeration of suffix trajectories.  This shares
/// no arithmetic with the log-domain recursion it is used to check.
inline double suffix_success_probability(const Mdp& m, const Policy& pi, int t,
                                         int s, int a) {
    const int S = m.num_states();
    const int A = m.num_actions();
    double total = 0.0;
    // Depth-first over (successor, action, ...) suffixes, carrying the
    // product of dynamics, policy, and success-probability factors.
    auto walk = [&](auto&& self, int u, int state, int action, double weight)
        -> void {
        weight *= prob_from_log(m.step_reward[state][action]);
        if (weight == 0.0) return;
        for (int next = 0; next < S; ++next) {
            const double pt = m.transition[state][action][next];
            if (pt <= 0.0) continue;
            const double w = weight * pt;
            if (u + 1 == m.horizon) {
                total += w * prob_from_log(m.terminal_reward[next]);
                continue;
            }
            for (int b = 0; b < A; ++b) {
                const double pb = pi.rows[u + 1][next][b];
                if (pb > 0.0) self(self, u + 1, next, b, w * pb);
            }
        }
    };
    walk(walk, t, s, a, 1.0);
    return total;
}

}  // namespace detail

/// Compares exp Q(t, s, a) against the suffix-enumeration success probability
/// at every prior-reachable (t, s) and every action; reports the worst gap.
inline QvOracleReport oracle_check_qv(const Mdp& m, const Policy& pi,
                                      double cap = 1e7) {
    check_enumeration_cap(m, cap);
    const SoftValues sv = soft_values(m, pi);
    const Occupancy d = occupancy(m, pi);
    QvOracleReport rep;
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < m.num_states(); ++s) {
            if (d.table[t][s] <= 0.0) continue;  // conditional undefined
            for (int a = 0; a < m.num_actions(); ++a) {
                const double via_recursion = prob_from_log(sv.q[t][s][a]);
                const double via_enumeration =
                    detail::suffix_success_probability(m, pi, t, s, a);
                const double gap = std::fabs(via_recursion - via_enumeration);
                ++rep.checked;
                if (gap > rep.max_gap) {
                    rep.max_gap = gap;
                    rep.worst_t = t;
                    rep.worst_state = s;
                    rep.worst_action = a;
                }
            }
        }
    return rep;
}

// ===========================================================================
// Limit policy
// ===========================================================================

/// Uniform distribution over argmax_a Q^pi(t, s, a) with tie tolerance 1e-12;
/// -inf entries are never selected unless the whole row is -inf (then the row
/// is uniform over all actions).
inline Policy limit_policy(const Mdp& m, const Policy& pi,
                           double tie_tol = 1e-12) {
    const SoftValues sv = soft_values(m, pi);
    const int A = m.num_actions();
    Policy out;
    out.rows.assign(m.horizon,
                    std::vector<std::vector<double>>(m.num_states()));
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < m.num_states(); ++s) {
            const auto& q = sv.q[t][s];
            std::vector<double> row(A, 0.0);
            double best = log_zero;
            for (double x : q)
                if (x > best) best = x;
            if (is_log_zero(best)) {
                row.assign(A, 1.0 / A);
            } else {
                int count = 0;
                for (int a = 0; a < A; ++a)
                    if (q[a] >= best - tie_tol) ++count;
                for (int a = 0; a < A; ++a)
                    if (q[a] >= best - tie_tol) row[a] = 1.0 / count;
            }
            out.rows[t][s] = row;
        }
    return out;
}

// ===========================================================================
// Deterministic trajectory factorization
// ===========================================================================

struct FactorizationReport {
    double max_gap = 0.0;
    long trajectories = 0;
    bool degenerate = false;  // success probability 0 under the prior
};

/// For deterministic dynamics, the trajectory posterior given overall success
/// factorises into locally conditioned action choices.  Computes both sides
/// per trajectory and reports the max gap:
///   global:  p(xi | success) = p_prior(xi) exp(R(xi)) / Z
///   local:   product over t of  prior(a|s,t) exp Q(t,s,a) / exp V(t,s).
inline FactorizationReport check_deterministic_factorization(
    const Mdp& m, const Policy& prior, double cap = 1e7) {
    if (!is_deterministic(m))
        throw PreconditionError(
            "deterministic factorization requires deterministic dynamics");
    const auto trajectories = enumerate_trajectories(m, cap);
    const SoftValues sv = soft_values(m, prior);

    double z = 0.0;
    for (const auto& e : trajectories)
        z += trajectory_probability(m, prior, e.trajectory) *
             prob_from_log(trajectory_reward(m, e.trajectory));

    FactorizationReport rep;
    rep.trajectories = static_cast<long>(trajectories.size());
    if (z <= 0.0) {
        rep.degenerate = true;
        return rep;
    }
    for (const auto& e : trajectories) {
        const Trajectory& traj = e.trajectory;
        const double global =
            trajectory_probability(m, prior, traj) *
            prob_from_log(trajectory_reward(m, traj)) / z;
        double local = m.initial[traj.states.front()];
        for (std::size_t t = 0; t < traj.actions.size() && local > 0.0; ++t) {
            const int s = traj.states[t];
            const int a = traj.actions[t];
            const double num = prior.rows[t][s][a] * prob_from_log(sv.q[t][s][a]);
            const double den = prob_from_log(sv.v[t][s]);
            // A zero denominator means success is impossible from s; the
            // conditional is undefined there and the global side is 0 too.
            local = den > 0.0 ? local * (num / den) : 0.0;
        }
        const double gap = std::fabs(global - local);
        if (gap > rep.max_gap) rep.max_gap = gap;
    }
    return rep;
}

}  // namespace mdptk
