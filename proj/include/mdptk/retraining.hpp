/**
 * The three incoherence-removal operator families and their executable
 * verdicts.
 *
 *  - Re-conditioning: replace the policy by its posterior given overall
 *    success (computed from its own soft values), and iterate.
 *  - Temperature family: the posterior of the *original* prior under rewards
 *    scaled by alpha.
 *  - Folded sequences: add the log of the current posterior into the reward
 *    table and re-condition the original prior.  The plain fold F rebuilds
 *    from the base reward each step (r_k = r_0 + log pi^F_k); the cumulative
 *    fold H accumulates (r_{k+1} = r_k + log posterior under r_k).
 *
 * On deterministic dynamics the families coincide: H_k = temperature 2^k =
 * re-conditioning 2^k, and F_k = temperature k; on stochastic dynamics only
 * F_k = re-conditioning_k survives.  check_equivalence turns those identities
 * into numeric verdicts; improvement_audit, convergence_probe and rate_check
 * do the same for the monotone-improvement, convergence and improvement-rate
 * statements.
 *
 * Folded rewards are stored time-indexed (posteriors are time-indexed) and
 * need no normalization shift: log posteriors are already <= 0, and adding a
 * nonzero per-state constant to a folded reward row would change the
 * posterior at ancestor states, destroying the equivalences above.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mdptk/coherence.hpp"
#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"
#include "mdptk/soft_values.hpp"
#include "mdptk/trace.hpp"

namespace mdptk {

// ===========================================================================
// Goal conditioning
// ===========================================================================

/// A conditioned policy plus the states where the posterior was 0/0.
struct ConditionedPolicy {
    Policy policy;
    // (t, s) pairs where success is impossible under the prior; the prior row
    // is kept there and every downstream report surfaces the flag.
    std::vector<std::pair<int, int>> zero_posterior_states;
};

/// Posterior over actions given overall success, under an explicit reward
/// table: pi(a|s,t) proportional to prior(a|s,t) * exp Q^prior(t,s,a),
/// entirely in log domain.  Zero-posterior states keep the prior row.
inline ConditionedPolicy goal_condition(const Mdp& m, const Policy& prior,
                                        const RewardTable& rewards) {
    const SoftValues sv = soft_values(m, prior, rewards);
    const int A = m.num_actions();
    ConditionedPolicy out;
    out.policy.rows.assign(m.horizon,
                           std::vector<std::vector<double>>(m.num_states()));
    for (int t = 0; t < m.horizon; ++t)
        for (int s = 0; s < m.num_states(); ++s) {
            std::vector<double> logw(A, log_zero);
            for (int a = 0; a < A; ++a) {
                const double p = prior.rows[t][s][a];
                if (p > 0.0 && !is_log_zero(sv.q[t][s][a]))
                    logw[a] = std::log(p) + sv.q[t][s][a];
            }
            const double z = log_sum_exp(logw);
            if (is_log_zero(z)) {
                out.policy.rows[t][s] = prior.rows[t][s];
                out.zero_posterior_states.emplace_back(t, s);
                continue;
            }
            std::vector<double> row(A, 0.0);
            for (int a = 0; a < A; ++a)
                if (!is_log_zero(logw[a])) row[a] = std::exp(logw[a] - z);
            out.policy.rows[t][s] = std::move(row);
        }
    return out;
}

/// Posterior under the MDP's own rewards.
inline ConditionedPolicy goal_condition(const Mdp& m, const Policy& prior) {
    return goal_condition(m, prior, base_rewards(m));
}

/// The temperature family: posterior of the prior under rewards scaled by
/// alpha.  alpha = 1 is plain goal conditioning.
inline Policy temperature_policy(const Mdp& m, const Policy& prior,
                                 double alpha) {
    if (!(alpha > 0.0))
        throw PreconditionError("temperature_policy requires alpha > 0");
    return goal_condition(m, prior, scaled_rewards(m, alpha)).policy;
}

// ===========================================================================
// Operator sequences
// ===========================================================================

/// pi_0 = prior, pi_{i+1} = posterior of pi_i under the base rewards.
inline std::vector<Policy> reconditioning_sequence(const Mdp& m,
                                                   const Policy& prior,
                                                   int steps) {
    std::vector<Policy> seq{prior};
    for (int i = 0; i < steps; ++i)
        seq.push_back(goal_condition(m, seq.back()).policy);
    return seq;
}

/// Trace of the re-conditioning iteration (per-step J, success, kappa, TV).
/// J along this sequence is nondecreasing on deterministic dynamics; on
/// stochastic dynamics it can drop while success probability still rises, so
/// the trace records rather than asserts — improvement_audit holds the
/// verdict logic.
inline IterationTrace iterate_goal_conditioning(const Mdp& m,
                                                const Policy& prior, int steps,
                                                double delta = 1.0) {
    return make_iteration_trace(m, reconditioning_sequence(m, prior, steps),
                                "G", "-", delta);
}

/// Reward/policy snapshot per fold step.
struct FoldedState {
    RewardTable rewards;
    Policy policy;
};

struct FoldedSequence {
    std::vector<Policy> policies;  // index k = 0..steps, policies[0] = prior
    std::vector<FoldedState> snapshots;  // one per k >= 1
    std::vector<std::pair<int, int>> zero_posterior_states;  // union over steps
};

namespace detail {

/// rewards += log pi, elementwise over the step tables (pi = 0 -> -inf).
inline void fold_log_policy(RewardTable& rewards, const Policy& pi) {
    for (std::size_t t = 0; t < rewards.step.size(); ++t)
        for (std::size_t s = 0; s < rewards.step[t].size(); ++s)
            for (std::size_t a = 0; a < rewards.step[t][s].size(); ++a) {
                const double p = pi.rows[t][s][a];
                if (p <= 0.0 || is_log_zero(rewards.step[t][s][a]))
                    rewards.step[t][s][a] = log_zero;
                else
                    rewards.step[t][s][a] += std::log(p);
            }
}

inline void merge_flags(std::vector<std::pair<int, int>>& into,
                        const std::vector<std::pair<int, int>>& from) {
    for (const auto& f : from)
        if (std::find(into.begin(), into.end(), f) == into.end())
            into.push_back(f);
}

}  // namespace detail

/// Plain fold: pi^F_{k+1} is the posterior of the ORIGINAL prior under r_k,
/// and r_{k+1} = r_0 + log pi^F_{k+1} (time-indexed step rewards; terminal
/// rewards never change).
inline FoldedSequence folded_sequence(const Mdp& m, const Policy& prior,
                                      int steps) {
    FoldedSequence out;
    out.policies.push_back(prior);
    RewardTable r = base_rewards(m);
    for (int k = 1; k <= steps; ++k) {
        ConditionedPolicy cp = goal_condition(m, prior, r);
        detail::merge_flags(out.zero_posterior_states, cp.zero_posterior_states);
        r = base_rewards(m);
        detail::fold_log_policy(r, cp.policy);
        out.snapshots.push_back({r, cp.policy});
        out.policies.push_back(std::move(cp.policy));
    }
    return out;
}

/// Cumulative fold: r_{k+1} = r_k + log(posterior of the prior under r_k),
/// and pi^H_{k+1} is the posterior of the prior under the UPDATED reward.
/// Note the posterior under r_k is exactly the policy emitted at step k, so
/// each step folds the previous emission and conditions once.
inline FoldedSequence cumulative_folded_sequence(const Mdp& m,
                                                 const Policy& prior,
                                                 int steps) {
    FoldedSequence out;
    out.policies.push_back(prior);
    RewardTable r = base_rewards(m);
    for (int k = 1; k <= steps; ++k) {
        ConditionedPolicy posterior_under_r = goal_condition(m, prior, r);
        detail::merge_flags(out.zero_posterior_states,
                            posterior_under_r.zero_posterior_states);
        detail::fold_log_policy(r, posterior_under_r.policy);
        ConditionedPolicy cp = goal_condition(m, prior, r);
        detail::merge_flags(out.zero_posterior_states, cp.zero_posterior_states);
        out.snapshots.push_back({r, cp.policy});
        out.policies.push_back(std::move(cp.policy));
    }
    return out;
}

/// Trace wrapper for the folds ("F" or "H").
inline IterationTrace folded_trace(const Mdp& m, const Policy& prior, int steps,
                                   bool cumulative, double delta = 1.0) {
    const FoldedSequence seq = cumulative
                                   ? cumulative_folded_sequence(m, prior, steps)
                                   : folded_sequence(m, prior, steps);
    return make_iteration_trace(m, seq.policies, cumulative ? "H" : "F", "-",
                                delta);
}

// ===========================================================================
// Equivalence verdicts
// ===========================================================================

struct EquivalenceRow {
    int k = 0;
    double alpha = 0.0;
    double tv_four_way = 0.0;  // max pairwise TV of {temp 2^k, G 2^k, F 2^k, H k}
    double tv_f_vs_g = 0.0;    // TV(F_k, G_k)
    double tv_f_vs_alpha = 0.0;  // TV(F_k, temperature k)
};

struct EquivalenceReport {
    bool deterministic = false;
    std::vector<EquivalenceRow> rows;
    double max_asserted_tv = 0.0;  // worst TV among the asserted identities
    double max_measured_f_vs_alpha = 0.0;  // stochastic: measured, not asserted
    bool pass = false;
    double tolerance = 1e-8;
    std::vector<std::pair<int, int>> zero_posterior_states;
};

/// Turns the operator-equivalence statements into a numeric verdict.
/// Deterministic dynamics: asserts the four-way identity at alpha = 2^k for
/// k = 1..k_max plus the auxiliary F_k = temperature(k); stochastic dynamics:
/// asserts only F_k = G_k and measures the F-vs-temperature gap.
inline EquivalenceReport check_equivalence(const Mdp& m, const Policy& prior,
                                           int k_max, double tolerance = 1e-8) {
    if (k_max < 1) throw PreconditionError("check_equivalence requires k_max >= 1");
    EquivalenceReport rep;
    rep.deterministic = is_deterministic(m);
    rep.tolerance = tolerance;

    const int deep = rep.deterministic ? (1 << k_max) : k_max;
    const auto g_seq = reconditioning_sequence(m, prior, deep);
    const auto f_seq = folded_sequence(m, prior, deep);
    rep.zero_posterior_states = f_seq.zero_posterior_states;

    if (rep.deterministic) {
        const auto h_seq = cumulative_folded_sequence(m, prior, k_max);
        for (int k = 1; k <= k_max; ++k) {
            EquivalenceRow row;
            row.k = k;
            row.alpha = std::ldexp(1.0, k);  // 2^k
            const Policy& temp = temperature_policy(m, prior, row.alpha);
            const Policy& g = g_seq[1 << k];
            const Policy& f = f_seq.policies[1 << k];
            const Policy& h = h_seq.policies[k];
            const Policy* family[4] = {&temp, &g, &f, &h};
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j)
                    row.tv_four_way =
                        std::max(row.tv_four_way,
                                 policy_total_variation(m, *family[i], *family[j]));
            row.tv_f_vs_g = policy_total_variation(m, f_seq.policies[k], g_seq[k]);
            row.tv_f_vs_alpha = policy_total_variation(
                m, f_seq.policies[k], temperature_policy(m, prior, double(k)));
            rep.max_asserted_tv =
                std::max({rep.max_asserted_tv, row.tv_four_way, row.tv_f_vs_g,
                          row.tv_f_vs_alpha});
            rep.rows.push_back(row);
        }
    } else {
        for (int k = 1; k <= k_max; ++k) {
            EquivalenceRow row;
            row.k = k;
            row.alpha = double(k);
            row.tv_f_vs_g = policy_total_variation(m, f_seq.policies[k], g_seq[k]);
            row.tv_f_vs_alpha = policy_total_variation(
                m, f_seq.policies[k], temperature_policy(m, prior, double(k)));
            rep.max_asserted_tv = std::max(rep.max_asserted_tv, row.tv_f_vs_g);
            rep.max_measured_f_vs_alpha =
                std::max(rep.max_measured_f_vs_alpha, row.tv_f_vs_alpha);
            rep.rows.push_back(row);
        }
    }
    rep.pass = rep.max_asserted_tv <= tolerance;
    return rep;
}

// ===========================================================================
// Improvement audit
// ===========================================================================

struct ImprovementReport {
    std::vector<double> j;             // J(pi_0) .. J(pi_k)
    std::vector<double> success;       // success probabilities
    int j_violations = 0;              // steps where J dropped beyond slack
    int success_violations = 0;
    double worst_j_drop = 0.0;         // most negative J step (0 when monotone)
    bool pass = false;
    double slack = 1e-10;
};

/// Runs the re-conditioning iteration and checks both monotonicity claims:
/// J nondecreasing (within slack) and success probability nondecreasing.
inline ImprovementReport improvement_audit(const Mdp& m, const Policy& prior,
                                           int steps, double slack = 1e-10) {
    if (steps < 1) throw PreconditionError("improvement_audit requires k >= 1");
    const auto seq = reconditioning_sequence(m, prior, steps);
    ImprovementReport rep;
    rep.slack = slack;
    for (const auto& pi : seq) {
        rep.j.push_back(expected_return(m, pi));
        rep.success.push_back(success_probability(m, pi));
    }
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const double ja = rep.j[i], jb = rep.j[i + 1];
        // -inf to -inf steps are flat, and any step out of -inf is a rise.
        const bool j_drop = is_log_zero(ja) ? false : (jb < ja - slack);
        if (j_drop) {
            ++rep.j_violations;
            rep.worst_j_drop = std::min(rep.worst_j_drop, jb - ja);
        }
        if (rep.success[i + 1] < rep.success[i] - 1e-12) ++rep.success_violations;
    }
    rep.pass = rep.j_violations == 0 && rep.success_violations == 0;
    return rep;
}

// ===========================================================================
// Convergence probe
// ===========================================================================

struct ConvergenceReport {
    int steps = 0;
    double tv_to_limit = 0.0;   // TV(pi_k, limit_policy(m, pi_k))
    double kappa = 0.0;         // kappa_delta(pi_k)
    double delta = 1.0 / 32.0;
    double tv_threshold = 1e-3;
    double kappa_threshold = 1e-2;
    bool full_support = true;   // prior support precondition
    bool tv_pass = false;
    bool kappa_pass = false;
    bool pass = false;
};

/// After k re-conditioning steps, how close is the iterate to the greedy
/// limit of its own values, and how incoherent is it at a sharp temperature?
inline ConvergenceReport convergence_probe(const Mdp& m, const Policy& prior,
                                           int steps, double delta = 1.0 / 32.0,
                                           double tv_threshold = 1e-3,
                                           double kappa_threshold = 1e-2) {
    ConvergenceReport rep;
    rep.steps = steps;
    rep.delta = delta;
    rep.tv_threshold = tv_threshold;
    rep.kappa_threshold = kappa_threshold;
    const Occupancy d = occupancy(m, prior);
    for (int t = 0; t < m.horizon && rep.full_support; ++t)
        for (int s = 0; s < m.num_states() && rep.full_support; ++s) {
            if (d.table[t][s] <= 0.0) continue;
            for (int a = 0; a < m.num_actions(); ++a)
                if (prior.rows[t][s][a] <= 0.0) rep.full_support = false;
        }
    const auto seq = reconditioning_sequence(m, prior, steps);
    const Policy& last = seq.back();
    rep.tv_to_limit = policy_total_variation(m, last, limit_policy(m, last));
    rep.kappa = boltzmann_incoherence(m, last, delta);
    rep.tv_pass = rep.tv_to_limit < tv_threshold;
    rep.kappa_pass = rep.kappa < kappa_threshold;
    rep.pass = rep.full_support && rep.tv_pass && rep.kappa_pass;
    return rep;
}

// ===========================================================================
// Improvement-rate verdict
// ===========================================================================

struct RateRow {
    int k = 0;
    double actual = 0.0;     // J(pi^G_k) - J(pi^G_{k-1})
    double predicted = 0.0;  // leading-order expression at alpha = k
    double ratio = 0.0;
};

struct RateReport {
    std::vector<RateRow> rows;      // k = 4 .. k_max
    bool derivative_stable = true;  // h vs h/2 second differences consistent
    double worst_inconsistency = 0.0;
    bool band_pass = false;   // ratio in [0.5, 2.0] for all k in [8, k_max]
    bool trend_pass = false;  // |ratio - 1| at k_max below its value at k=4
    bool pass = false;
    double h = 1e-3;
};

/// Checks the leading-order improvement-rate prediction
///   deltaJ_k ~ (1 / (k (k-1))) * J'(k) * H'(k) / (J''(k) + H''(k) / k)
/// where J(alpha), H(alpha) are return and causal entropy along the
/// temperature family and derivatives are central finite differences.
/// The band is the assertion; the "approach 1" claim is asymptotic, so the
/// trend check compares |ratio - 1| at k_max against the early-k value.
inline RateReport rate_check(const Mdp& m, const Policy& prior, int k_max,
                             double h = 1e-3) {
    if (!is_deterministic(m))
        throw PreconditionError("rate_check requires deterministic dynamics");
    if (k_max < 4) throw PreconditionError("rate_check requires k >= 4");
    RateReport rep;
    rep.h = h;

    auto j_of = [&](double alpha) {
        return expected_return(m, temperature_policy(m, prior, alpha));
    };
    auto h_of = [&](double alpha) {
        return causal_entropy(m, temperature_policy(m, prior, alpha));
    };
    // Central first/second differences at x with step hh.
    auto d1 = [](auto&& f, double x, double hh) {
        return (f(x + hh) - f(x - hh)) / (2.0 * hh);
    };
    auto d2 = [](auto&& f, double x, double hh) {
        return (f(x + hh) - 2.0 * f(x) + f(x - hh)) / (hh * hh);
    };

    std::vector<double> j_along;  // J(pi^G_0) .. J(pi^G_{k_max})
    for (const auto& pi : reconditioning_sequence(m, prior, k_max))
        j_along.push_back(expected_return(m, pi));

    double ratio_at_4 = 0.0;
    for (int k = 4; k <= k_max; ++k) {
        const double x = double(k);
        const double j2 = d2(j_of, x, h), j2_fine = d2(j_of, x, h / 2);
        const double h2 = d2(h_of, x, h), h2_fine = d2(h_of, x, h / 2);
        const double denom_scale =
            std::max({std::fabs(j2_fine), std::fabs(h2_fine), 1e-12});
        const double inconsistency =
            std::max(std::fabs(j2 - j2_fine), std::fabs(h2 - h2_fine)) /
            denom_scale;
        rep.worst_inconsistency = std::max(rep.worst_inconsistency, inconsistency);
        if (inconsistency > 0.01) rep.derivative_stable = false;

        RateRow row;
        row.k = k;
        row.actual = j_along[k] - j_along[k - 1];
        const double denom = j2_fine + h2_fine / x;
        row.predicted = (1.0 / (x * (x - 1.0))) *
                        d1(j_of, x, h / 2) * d1(h_of, x, h / 2) / denom;
        row.ratio = row.actual / row.predicted;
        if (k == 4) ratio_at_4 = row.ratio;
        rep.rows.push_back(row);
    }

    rep.band_pass = true;
    for (const auto& row : rep.rows)
        if (row.k >= 8 && (row.ratio < 0.5 || row.ratio > 2.0))
            rep.band_pass = false;
    const double tail = std::fabs(rep.rows.back().ratio - 1.0);
    rep.trend_pass = tail < std::fabs(ratio_at_4 - 1.0);
    rep.pass = rep.derivative_stable && rep.band_pass && rep.trend_pass;
    return rep;
}

}  // namespace mdptk
