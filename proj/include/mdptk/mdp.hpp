/**
 * Tabular finite-horizon MDP data model.
 *
 * States and actions are small named index sets.  Dynamics are stationary
 * stochastic transition tables; rewards are non-positive log-domain success
 * probabilities split into a per-(state, action) step table and a per-state
 * terminal table (the backward recursion boundary).  An episode consists of
 * `horizon` decision steps, i.e. T actions and T+1 states.
 *
 * Also hosts validation, the three builtin example MDPs, and exhaustive
 * trajectory enumeration (the substrate for every brute-force oracle).
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mdptk/logprob.hpp"

namespace mdptk {

// Thrown when an exhaustive enumeration would exceed its size cap.
struct EnumerationCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Mdp {
    std::vector<std::string> states;
    std::vector<std::string> actions;
    int horizon = 0;  // number of decision steps T >= 1

    std::vector<double> initial;  // [s], sums to 1
    // transition[s][a][s'] = probability of s' given (s, a); dense, rows sum to 1.
    std::vector<std::vector<std::vector<double>>> transition;
    std::vector<std::vector<double>> step_reward;  // [s][a], in [-inf, 0]
    std::vector<double> terminal_reward;           // [s], in [-inf, 0]

    int num_states() const { return static_cast<int>(states.size()); }
    int num_actions() const { return static_cast<int>(actions.size()); }

    /// Index of a named state, or -1 when absent.
    int state_index(const std::string& name) const {
        for (int i = 0; i < num_states(); ++i)
            if (states[i] == name) return i;
        return -1;
    }

    /// Index of a named action, or -1 when absent.
    int action_index(const std::string& name) const {
        for (int i = 0; i < num_actions(); ++i)
            if (actions[i] == name) return i;
        return -1;
    }
};

struct Trajectory {
    std::vector<int> states;   // s_0 .. s_T
    std::vector<int> actions;  // a_0 .. a_{T-1}
};

// ===========================================================================
// Validation
// ===========================================================================

/// Collects every invariant violation as a human-readable description;
/// an empty list means the Mdp is valid.  Violations are data, not errors.
inline std::vector<std::string> validate_mdp(const Mdp& m) {
    std::vector<std::string> out;
    const int S = m.num_states();
    const int A = m.num_actions();
    if (S == 0) out.push_back("state set is empty");
    if (A == 0) out.push_back("action set is empty");
    if (m.horizon < 1)
        out.push_back("horizon must be >= 1, got " + std::to_string(m.horizon));
    for (int i = 0; i < S; ++i)
        for (int j = i + 1; j < S; ++j)
            if (m.states[i] == m.states[j])
                out.push_back("duplicate state name '" + m.states[i] + "'");
    for (int i = 0; i < A; ++i)
        for (int j = i + 1; j < A; ++j)
            if (m.actions[i] == m.actions[j])
                out.push_back("duplicate action name '" + m.actions[i] + "'");

    if (static_cast<int>(m.initial.size()) != S) {
        out.push_back("initial distribution has wrong size");
    } else {
        double sum = 0.0;
        for (int s = 0; s < S; ++s) {
            if (m.initial[s] < 0.0)
                out.push_back("initial probability of state '" + m.states[s] +
                              "' is negative");
            sum += m.initial[s];
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            out.push_back("initial distribution sums to " + std::to_string(sum) +
                          ", expected 1");
    }

    if (static_cast<int>(m.transition.size()) != S) {
        out.push_back("transition table has wrong state dimension");
    } else {
        for (int s = 0; s < S; ++s) {
            if (static_cast<int>(m.transition[s].size()) != A) {
                out.push_back("transition rows missing for state '" +
                              m.states[s] + "'");
                continue;
            }
            for (int a = 0; a < A; ++a) {
                const auto& row = m.transition[s][a];
                if (static_cast<int>(row.size()) != S) {
                    out.push_back("transition row (" + m.states[s] + ", " +
                                  m.actions[a] + ") has wrong size");
                    continue;
                }
                double sum = 0.0;
                for (int t = 0; t < S; ++t) {
                    if (row[t] < 0.0)
                        out.push_back("negative transition probability at (" +
                                      m.states[s] + ", " + m.actions[a] +
                                      ", " + m.states[t] + ")");
                    sum += row[t];
                }
                if (std::fabs(sum - 1.0) > 1e-12)
                    out.push_back("transition row (" + m.states[s] + ", " +
                                  m.actions[a] + ") sums to " +
                                  std::to_string(sum) + ", expected 1");
            }
        }
    }

    if (static_cast<int>(m.step_reward.size()) != S) {
        out.push_back("step reward table has wrong state dimension");
    } else {
        for (int s = 0; s < S; ++s) {
            if (static_cast<int>(m.step_reward[s].size()) != A) {
                out.push_back("step rewards missing for state '" + m.states[s] +
                              "'");
                continue;
            }
            for (int a = 0; a < A; ++a)
                if (m.step_reward[s][a] > 0.0)
                    out.push_back("positive step reward at (" + m.states[s] +
                                  ", " + m.actions[a] + "): " +
                                  std::to_string(m.step_reward[s][a]));
        }
    }
    if (static_cast<int>(m.terminal_reward.size()) != S) {
        out.push_back("terminal reward table has wrong size");
    } else {
        for (int s = 0; s < S; ++s)
            if (m.terminal_reward[s] > 0.0)
                out.push_back("positive terminal reward at state '" +
                              m.states[s] + "': " +
                              std::to_string(m.terminal_reward[s]));
    }
    return out;
}

/// True iff every transition row is a point mass.
inline bool is_deterministic(const Mdp& m) {
    for (const auto& per_state : m.transition)
        for (const auto& row : per_state)
            for (double p : row)
                if (p > 0.0 && p < 1.0) return false;
    return true;
}

// ===========================================================================
// Builtin example MDPs
// ===========================================================================

namespace detail {

/// Point-mass transition row helper.
inline std::vector<double> point_mass_row(int size, int target) {
    std::vector<double> row(size, 0.0);
    row[target] = 1.0;
    return row;
}

/// Fills self-loop rows for every (state, action) not otherwise assigned.
inline void default_self_loops(Mdp& m) {
    const int S = m.num_states();
    const int A = m.num_actions();
    m.transition.resize(S);
    for (int s = 0; s < S; ++s) {
        m.transition[s].resize(A);
        for (int a = 0; a < A; ++a)
            if (m.transition[s][a].empty())
                m.transition[s][a] = point_mass_row(S, s);
    }
}

/// Zero (log 1) step rewards everywhere; terminal rewards default to 0.
inline void default_rewards(Mdp& m) {
    m.step_reward.assign(m.num_states(),
                         std::vector<double>(m.num_actions(), 0.0));
    m.terminal_reward.assign(m.num_states(), 0.0);
}

}  // namespace detail

/// The two-step deterministic race tree: from the start state, "up" climbs to
/// the mountain (where "up" again reaches gold, success 1, and "down" falls to
/// the skull, success 0), while "down" descends to the forest (both actions
/// reach a silver chest, success 3/4).
inline Mdp make_mountain_race() {
    Mdp m;
    m.states = {"start", "mountain", "forest", "gold", "skull",
                "silver_left", "silver_right"};
    m.actions = {"up", "down"};
    m.horizon = 2;
    m.initial = {1, 0, 0, 0, 0, 0, 0};
    const int S = m.num_states();
    m.transition.assign(S, {});
    m.transition[0] = {detail::point_mass_row(S, 1), detail::point_mass_row(S, 2)};
    m.transition[1] = {detail::point_mass_row(S, 3), detail::point_mass_row(S, 4)};
    m.transition[2] = {detail::point_mass_row(S, 5), detail::point_mass_row(S, 6)};
    detail::default_self_loops(m);
    detail::default_rewards(m);
    m.terminal_reward[3] = log_from_prob(1.0);
    m.terminal_reward[4] = log_from_prob(0.0);
    m.terminal_reward[5] = log_from_prob(0.75);
    m.terminal_reward[6] = log_from_prob(0.75);
    return m;
}

/// One decision at the start state: a1 reaches s1 w.p. 3/4 and s2 w.p. 1/4,
/// a2 reaches each w.p. 1/2; terminal success 1/3 at s1 and 2/3 at s2.  The
/// stochastic node is what separates the operator families.
inline Mdp make_temperature_counter() {
    Mdp m;
    m.states = {"start", "s1", "s2"};
    m.actions = {"a1", "a2"};
    m.horizon = 1;
    m.initial = {1, 0, 0};
    m.transition.assign(3, {});
    m.transition[0] = {{0.0, 0.75, 0.25}, {0.0, 0.5, 0.5}};
    detail::default_self_loops(m);
    detail::default_rewards(m);
    m.terminal_reward[1] = log_from_prob(1.0 / 3.0);
    m.terminal_reward[2] = log_from_prob(2.0 / 3.0);
    return m;
}

/// Three-step tree for the lookahead-consistency demonstration: the upper
/// branch is forced through to a terminal with success 1/2; the lower branch
/// reaches a fork where "up" splits (2/3, 1/3) between success-1 and success-0
/// terminals while "down" reaches the success-0 terminal surely.
inline Mdp make_stability_tree() {
    Mdp m;
    m.states = {"s0", "s1", "s1b", "s2", "s2b", "s3", "s3b", "s3c"};
    m.actions = {"up", "down"};
    m.horizon = 3;
    m.initial = {1, 0, 0, 0, 0, 0, 0, 0};
    const int S = m.num_states();
    m.transition.assign(S, {});
    m.transition[0] = {detail::point_mass_row(S, 1), detail::point_mass_row(S, 2)};
    m.transition[1] = {detail::point_mass_row(S, 3), detail::point_mass_row(S, 3)};
    m.transition[2] = {detail::point_mass_row(S, 4), detail::point_mass_row(S, 4)};
    m.transition[3] = {detail::point_mass_row(S, 5), detail::point_mass_row(S, 5)};
    std::vector<double> split(S, 0.0);
    split[6] = 2.0 / 3.0;
    split[7] = 1.0 / 3.0;
    m.transition[4] = {split, detail::point_mass_row(S, 7)};
    detail::default_self_loops(m);
    detail::default_rewards(m);
    m.terminal_reward[5] = log_from_prob(0.5);
    m.terminal_reward[6] = log_from_prob(1.0);
    m.terminal_reward[7] = log_from_prob(0.0);
    return m;
}

/// Builtin registry; name in {mountain_race, temperature_counter,
/// stability_tree}.
inline Mdp builtin_example(const std::string& name) {
    if (name == "mountain_race") return make_mountain_race();
    if (name == "temperature_counter") return make_temperature_counter();
    if (name == "stability_tree") return make_stability_tree();
    throw std::invalid_argument("unknown builtin MDP '" + name + "'");
}

// ===========================================================================
// Trajectory enumeration
// ===========================================================================

/// Worst-case enumeration size |S|^(T+1) * |A|^T, computed in floating point
/// so that absurd inputs cannot overflow.
inline double enumeration_size_bound(const Mdp& m) {
    return std::pow(static_cast<double>(m.num_states()), m.horizon + 1) *
           std::pow(static_cast<double>(m.num_actions()), m.horizon);
}

inline void check_enumeration_cap(const Mdp& m, double cap = 1e7) {
    const double bound = enumeration_size_bound(m);
    if (bound > cap)
        throw EnumerationCapError(
            "trajectory enumeration bound " + std::to_string(bound) +
            " exceeds cap " + std::to_string(cap));
}

struct EnumeratedTrajectory {
    Trajectory trajectory;
    double dynamics_prob;  // product of initial and transition probabilities
};

/// All trajectories with positive dynamics probability, each exactly once,
/// paired with that probability.  The policy factor is deliberately absent:
/// oracles weight these by any policy they like.
inline std::vector<EnumeratedTrajectory> enumerate_trajectories(
    const Mdp& m, double cap = 1e7) {
    check_enumeration_cap(m, cap);
    std::vector<EnumeratedTrajectory> out;
    Trajectory cur;
    // Depth-first expansion over (action, successor) branches.
    auto expand = [&](auto&& self, int t, double prob) -> void {
        if (t == m.horizon) {
            out.push_back({cur, prob});
            return;
        }
        const int s = cur.states.back();
        for (int a = 0; a < m.num_actions(); ++a) {
            cur.actions.push_back(a);
            for (int next = 0; next < m.num_states(); ++next) {
                const double p = m.transition[s][a][next];
                if (p <= 0.0) continue;
                cur.states.push_back(next);
                self(self, t + 1, prob * p);
                cur.states.pop_back();
            }
            cur.actions.pop_back();
        }
    };
    for (int s0 = 0; s0 < m.num_states(); ++s0) {
        if (m.initial[s0] <= 0.0) continue;
        cur.states = {s0};
        cur.actions.clear();
        expand(expand, 0, m.initial[s0]);
    }
    return out;
}

/// Total log-domain reward of a trajectory: all step rewards plus the
/// terminal reward; -inf as soon as any component is -inf.
inline double trajectory_reward(const Mdp& m, const Trajectory& traj) {
    double acc = 0.0;
    for (std::size_t t = 0; t < traj.actions.size(); ++t) {
        const double r = m.step_reward[traj.states[t]][traj.actions[t]];
        if (is_log_zero(r)) return log_zero;
        acc += r;
    }
    const double rT = m.terminal_reward[traj.states.back()];
    if (is_log_zero(rT)) return log_zero;
    return acc + rT;
}

}  // namespace mdptk
