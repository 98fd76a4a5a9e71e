/**
 * n-step policy stability: are preferences over deep lookaheads consistent
 * with preferences over immediate actions?
 *
 * At a state s at time t, every first action is extended by its best n-step
 * continuation plan (best = highest success likelihood, found by exhaustive
 * search over action plans; beyond the plan window the prior rolls out).  The
 * stability requirement: whenever one first action's best-continued success
 * strictly beats another's, the immediate success likelihoods must order the
 * same way.  Ties on the lookahead side are vacuous; best-plan ties are
 * resolved universally (every maximizing plan must satisfy the implication).
 *
 * Likelihoods p(success | s_t, plan) are compared directly; under a uniform
 * prior this ordering equals the posterior action ordering.  Different n can
 * impose conflicting requirements on the same state — the builtin
 * stability_tree demonstrates the 1-step vs 2-step conflict.
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"
#include "mdptk/soft_values.hpp"

namespace mdptk {

/// Success likelihood of a state at time t under a fixed opening action plan,
/// with the prior policy beyond the plan window.  Exact linear-domain forward
/// pass: weights carry probability times accumulated success factors.
inline double success_given_plan(const Mdp& m, const Policy& prior, int t,
                                 int state, const std::vector<int>& plan) {
    const int S = m.num_states();
    const int A = m.num_actions();
    std::vector<double> w(S, 0.0);
    w[state] = 1.0;
    for (int u = t; u < m.horizon; ++u) {
        const int step = u - t;
        std::vector<double> next(S, 0.0);
        for (int s = 0; s < S; ++s) {
            if (w[s] <= 0.0) continue;
            for (int a = 0; a < A; ++a) {
                const bool planned = step < static_cast<int>(plan.size());
                if (planned && a != plan[step]) continue;
                const double pa = planned ? 1.0 : prior.rows[u][s][a];
                if (pa <= 0.0) continue;
                const double succ = prob_from_log(m.step_reward[s][a]);
                if (succ <= 0.0) continue;
                for (int sn = 0; sn < S; ++sn) {
                    const double pt = m.transition[s][a][sn];
                    if (pt > 0.0) next[sn] += w[s] * pa * succ * pt;
                }
            }
        }
        w = std::move(next);
    }
    double total = 0.0;
    for (int s = 0; s < S; ++s)
        if (w[s] > 0.0) total += w[s] * prob_from_log(m.terminal_reward[s]);
    return total;
}

struct StabilityComparison {
    int t = 0;
    int state = 0;
    int action_hi = 0, action_lo = 0;     // lookahead prefers hi over lo
    std::vector<int> plan_hi, plan_lo;    // best continuations (one maximizer each)
    double lookahead_hi = 0.0, lookahead_lo = 0.0;
    double immediate_hi = 0.0, immediate_lo = 0.0;
    bool violated = false;  // lookahead strict, immediate not strict same way
};

struct StabilityReport {
    int n = 0;
    bool stable = true;
    std::vector<StabilityComparison> comparisons;  // every strict lookahead pair
    std::vector<StabilityComparison> witnesses;    // the violated ones
    int states_checked = 0;
    int states_skipped_horizon = 0;  // too close to the end to host the lookahead
};

namespace detail {

/// All action plans of the given length (size A^length), in lexicographic
/// order so reports are deterministic.
inline std::vector<std::vector<int>> all_plans(int num_actions, int length) {
    std::vector<std::vector<int>> out{{}};
    for (int i = 0; i < length; ++i) {
        std::vector<std::vector<int>> grown;
        for (const auto& plan : out)
            for (int a = 0; a < num_actions; ++a) {
                grown.push_back(plan);
                grown.back().push_back(a);
            }
        out = std::move(grown);
    }
    return out;
}

}  // namespace detail

/// Checks n-step policy stability of the prior on m.  A state hosts the check
/// only when t + n <= horizon - 1 (the n continuation actions must exist);
/// states closer to the end are skipped and counted.  Refuses only when no
/// reachable state can host the lookahead at all — except that single-action
/// MDPs are vacuously stable at any n (no competing pairs exist).
inline StabilityReport n_policy_stable(const Mdp& m, const Policy& prior, int n,
                                       double tie_tol = 1e-12) {
    if (n < 1) throw PreconditionError("n_policy_stable requires n >= 1");
    StabilityReport rep;
    rep.n = n;
    if (m.num_actions() < 2) return rep;  // no pairs to compare, ever
    if (n > m.horizon - 1)
        throw PreconditionError(
            "lookahead depth " + std::to_string(n) +
            " exceeds remaining horizon at every state, starting from '" +
            m.states[0] + "' at t=0 (horizon " + std::to_string(m.horizon) +
            " supports depth <= " + std::to_string(m.horizon - 1) + ")");

    const Occupancy d = occupancy(m, prior);
    const auto plans = detail::all_plans(m.num_actions(), n);
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < m.num_states(); ++s) {
            if (d.table[t][s] <= 0.0) continue;
            if (t + n > m.horizon - 1) {
                ++rep.states_skipped_horizon;
                continue;
            }
            ++rep.states_checked;
            // Best continuation value and maximizer set per first action.
            const int A = m.num_actions();
            std::vector<double> best(A, 0.0);
            std::vector<std::vector<int>> maximizer_of(A);
            std::vector<double> immediate(A, 0.0);
            for (int a = 0; a < A; ++a) {
                immediate[a] = success_given_plan(m, prior, t, s, {a});
                for (const auto& cont : plans) {
                    std::vector<int> plan{a};
                    plan.insert(plan.end(), cont.begin(), cont.end());
                    const double v = success_given_plan(m, prior, t, s, plan);
                    if (maximizer_of[a].empty() || v > best[a] + tie_tol) {
                        best[a] = v;
                        maximizer_of[a] = cont;
                    } else if (v > best[a]) {
                        best[a] = v;  // tighten within the tie band
                    }
                }
            }
            for (int hi = 0; hi < A; ++hi)
                for (int lo = 0; lo < A; ++lo) {
                    if (hi == lo) continue;
                    if (best[hi] <= best[lo] + tie_tol) continue;  // tie: vacuous
                    StabilityComparison c;
                    c.t = t;
                    c.state = s;
                    c.action_hi = hi;
                    c.action_lo = lo;
                    c.plan_hi = maximizer_of[hi];
                    c.plan_lo = maximizer_of[lo];
                    c.lookahead_hi = best[hi];
                    c.lookahead_lo = best[lo];
                    c.immediate_hi = immediate[hi];
                    c.immediate_lo = immediate[lo];
                    c.violated = !(immediate[hi] > immediate[lo] + tie_tol);
                    if (c.violated) {
                        rep.witnesses.push_back(c);
                        rep.stable = false;
                    }
                    rep.comparisons.push_back(c);
                }
        }
    return rep;
}

// ===========================================================================
// Conflict demonstration
// ===========================================================================

struct StabilityConflictReport {
    StabilityReport depth1;
    StabilityReport depth2;
    bool conflict = false;
    std::string summary;
};

namespace detail {

/// Root-ordering demand of a report: for each strict root comparison, the
/// immediate ordering it requires.  Returns +1 when action 0 must strictly
/// beat action 1 at the root, -1 for the opposite, 0 when unconstrained.
inline int root_demand(const StabilityReport& rep) {
    for (const auto& c : rep.comparisons) {
        if (c.t != 0) continue;
        if (c.action_hi == 0 && c.action_lo == 1) return +1;
        if (c.action_hi == 1 && c.action_lo == 0) return -1;
    }
    return 0;
}

}  // namespace detail

/// Runs the 1-step and 2-step checks on the builtin stability tree and
/// reports whether their root-ordering requirements conflict (they do: the
/// shallow check demands the upper action, the deep check the lower one).
inline StabilityConflictReport stability_conflict_demo() {
    const Mdp m = make_stability_tree();
    const Policy prior = uniform_policy(m);
    StabilityConflictReport rep;
    rep.depth1 = n_policy_stable(m, prior, 1);
    rep.depth2 = n_policy_stable(m, prior, 2);
    const int demand1 = detail::root_demand(rep.depth1);
    const int demand2 = detail::root_demand(rep.depth2);
    rep.conflict = demand1 != 0 && demand2 != 0 && demand1 != demand2;
    rep.summary = rep.conflict
                      ? "conflict: depth-1 and depth-2 root orderings disagree"
                      : "no conflict";
    return rep;
}

}  // namespace mdptk
