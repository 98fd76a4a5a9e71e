/**
 * Incoherence: how far a policy is from the policy a selector would induce
 * from its own soft Q values.
 *
 * kappa_f(pi) is the trajectory KL between pi and its f-soft policy — in
 * occupancy form, the occupancy-weighted per-state KL between pi's row and
 * f(Q^pi row).  kappa_delta is the softmax(delta) instance.  Iterating
 * "replace pi by its f-soft policy" reaches a fixpoint in at most T steps
 * (layer T-1 is policy-independent and freezes first; each sweep freezes one
 * more layer backward).
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"
#include "mdptk/selectors.hpp"
#include "mdptk/soft_values.hpp"
#include "mdptk/trace.hpp"

namespace mdptk {

/// Applies the selector to every soft Q row of pi.
inline Policy f_soft_policy(const Mdp& m, const Policy& pi, const Selector& f) {
    const SoftValues sv = soft_values(m, pi);
    Policy out;
    out.rows.assign(m.horizon, std::vector<std::vector<double>>(m.num_states()));
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < m.num_states(); ++s)
            out.rows[t][s] = f(sv.q[t][s]);
    return out;
}

/// kappa_f(pi): trajectory KL from pi to its own f-soft policy.
inline double incoherence(const Mdp& m, const Policy& pi, const Selector& f) {
    return trajectory_kl(m, pi, f_soft_policy(m, pi, f));
}

/// kappa_delta(pi): the Boltzmann instance.
inline double boltzmann_incoherence(const Mdp& m, const Policy& pi,
                                    double delta) {
    return incoherence(m, pi, softmax_selector(delta));
}

// ===========================================================================
// Trace assembly (shared by every operator sequence)
// ===========================================================================

/// Builds the full per-step record for a policy sequence: J, success
/// probability, kappa_delta, TV to the previous step, and TV to the limit
/// policy of the final iterate.
inline IterationTrace make_iteration_trace(const Mdp& m,
                                           const std::vector<Policy>& sequence,
                                           const std::string& operator_tag,
                                           const std::string& schedule_tag,
                                           double delta) {
    IterationTrace trace;
    trace.operator_tag = operator_tag;
    trace.schedule_tag = schedule_tag;
    trace.delta = delta;
    if (sequence.empty()) return trace;
    const Policy limit = limit_policy(m, sequence.back());
    for (std::size_t k = 0; k < sequence.size(); ++k) {
        TraceEntry e;
        e.k = static_cast<int>(k);
        e.policy = sequence[k];
        e.j = expected_return(m, sequence[k]);
        e.success_prob = success_probability(m, sequence[k]);
        e.kappa_delta = boltzmann_incoherence(m, sequence[k], delta);
        e.tv_step =
            k == 0 ? 0.0
                   : policy_total_variation(m, sequence[k], sequence[k - 1]);
        e.tv_to_limit = policy_total_variation(m, sequence[k], limit);
        trace.entries.push_back(std::move(e));
    }
    return trace;
}

// ===========================================================================
// Iterated f-coherence
// ===========================================================================

/// pi_{i+1} = f_soft_policy(m, pi_i, f), for `steps` steps; the trace's kappa
/// column tracks kappa_f (not kappa_delta) so the fixpoint is visible as
/// kappa -> 0 for any selector.
inline IterationTrace iterate_coherence(const Mdp& m, const Policy& pi0,
                                        const Selector& f, int steps) {
    std::vector<Policy> seq{pi0};
    for (int i = 0; i < steps; ++i)
        seq.push_back(f_soft_policy(m, seq.back(), f));
    IterationTrace trace = make_iteration_trace(m, seq, "coherence", "-", 1.0);
    for (std::size_t k = 0; k < seq.size(); ++k)
        trace.entries[k].kappa_delta = incoherence(m, seq[k], f);
    return trace;
}

/// Index of the first entry whose policy all later entries equal within tol
/// (in max-over-reachable-states TV); sequence length if never settled.
inline int fixpoint_index(const Mdp& m, const IterationTrace& trace,
                          double tol = 1e-12) {
    const int n = static_cast<int>(trace.entries.size());
    for (int k = 0; k < n; ++k) {
        bool settled = true;
        for (int j = k + 1; j < n && settled; ++j)
            settled = policy_total_variation(m, trace.entries[k].policy,
                                             trace.entries[j].policy) <= tol;
        if (settled) return k;
    }
    return n;
}

// ===========================================================================
// Optimality probe and greedy coherence
// ===========================================================================

struct KappaProbeEntry {
    double delta;
    double kappa;
};

struct KappaProbeReport {
    std::vector<KappaProbeEntry> values;
    bool diverging = false;   // exceeded the ceiling (or +inf) somewhere
    double ceiling = 1e6;
    double tail_gap = 0.0;    // |kappa(last) - kappa(previous)|
};

/// Evaluates kappa_delta along a decreasing delta schedule.  A policy can only
/// be optimal if kappa_delta stays bounded as delta -> 0; mass on any
/// Q-suboptimal action makes the KL blow up like gap/delta.
inline KappaProbeReport kappa_optimality_probe(const Mdp& m, const Policy& pi,
                                               const std::vector<double>& deltas,
                                               double ceiling = 1e6) {
    KappaProbeReport rep;
    rep.ceiling = ceiling;
    for (double delta : deltas) {
        const double kappa = boltzmann_incoherence(m, pi, delta);
        rep.values.push_back({delta, kappa});
        if (!(kappa <= ceiling)) rep.diverging = true;  // catches +inf and NaN
    }
    const std::size_t n = rep.values.size();
    if (n >= 2)
        rep.tail_gap =
            std::fabs(rep.values[n - 1].kappa - rep.values[n - 2].kappa);
    return rep;
}

/// Default schedule: delta = 2^0, 2^-1, ..., 2^-30.
inline std::vector<double> default_delta_schedule() {
    std::vector<double> out;
    for (int i = 0; i <= 30; ++i) out.push_back(std::ldexp(1.0, -i));
    return out;
}

/// For deterministic dynamics and a deterministic policy: true iff at every
/// positive-occupancy (t, s) the chosen action attains max_a Q^pi(t, s, a)
/// within 1e-12.
inline bool check_greedy_coherence(const Mdp& m, const Policy& pi) {
    if (!is_deterministic(m))
        throw PreconditionError(
            "greedy-coherence check requires deterministic dynamics");
    if (!is_deterministic_policy(pi))
        throw PreconditionError(
            "greedy-coherence check requires a deterministic policy");
    const SoftValues sv = soft_values(m, pi);
    const Occupancy d = occupancy(m, pi);
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < m.num_states(); ++s) {
            if (d.table[t][s] <= 0.0) continue;
            int chosen = 0;
            for (int a = 0; a < m.num_actions(); ++a)
                if (pi.rows[t][s][a] > 0.5) chosen = a;
            double best = log_zero;
            for (double x : sv.q[t][s])
                if (x > best) best = x;
            if (is_log_zero(best)) continue;  // nothing succeeds from here
            if (sv.q[t][s][chosen] < best - 1e-12) return false;
        }
    return true;
}

}  // namespace mdptk
