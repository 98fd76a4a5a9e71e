/**
 * Programmatic entry points behind the command-line tool.
 *
 * Each run_* function mirrors one subcommand, writes reports to the given
 * stream, and returns the process exit code: 0 pass, 1 assertion failure,
 * 2 usage/config error, 3 enumeration-cap overflow.  Keeping them as library
 * functions makes the CLI surface testable without spawning processes.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mdptk/coherence.hpp"
#include "mdptk/json_io.hpp"
#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"
#include "mdptk/random_mdp.hpp"
#include "mdptk/retraining.hpp"
#include "mdptk/soft_values.hpp"
#include "mdptk/stability.hpp"
#include "mdptk/trace.hpp"

namespace mdptk {

// Usage / configuration problems; mapped to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string mdp_file;  // mutually exclusive with builtin
    std::string builtin;
    std::string op = "G";  // G | F | H | temp | coherence
    int steps = 8;
    bool steps_set = false;  // whether --steps was given explicitly
    double delta = 1.0;
    std::string alpha_schedule = "pow2";  // pow2 | linear | explicit
    std::vector<double> alpha_list;
    double tol_equivalence = 1e-8;
    double tol_tv = 1e-3;
    double tol_kappa = 1e-2;
    double tol_oracle = 1e-9;
    std::string output_path;  // CSV destination; empty = stdout
    std::uint64_t seed = 1;
    bool corrupt_builtin = false;  // negative-control fixture for `examples`
};

namespace detail {

inline Mdp resolve_mdp(const RunConfig& cfg) {
    if (!cfg.mdp_file.empty() && !cfg.builtin.empty())
        throw ConfigError("give either an MDP file or a builtin name, not both");
    if (!cfg.mdp_file.empty()) return load_mdp(cfg.mdp_file);
    if (!cfg.builtin.empty()) return builtin_example(cfg.builtin);
    throw ConfigError("an MDP source is required (--mdp FILE or --builtin NAME)");
}

inline std::string fmt(double x) { return format_csv_value(x); }

/// One assertion line; accumulates overall failure.
struct Verdict {
    std::ostream& out;
    bool ok = true;

    void check(const std::string& what, double measured, double tolerance) {
        const bool pass = measured <= tolerance;
        ok = ok && pass;
        out << "  " << (pass ? "PASS" : "FAIL") << "  " << what
            << "  measured=" << fmt(measured) << " tolerance=" << fmt(tolerance)
            << "\n";
    }
    void expect(const std::string& what, bool pass, const std::string& detail) {
        ok = ok && pass;
        out << "  " << (pass ? "PASS" : "FAIL") << "  " << what;
        if (!detail.empty()) out << "  " << detail;
        out << "\n";
    }
};

}  // namespace detail

// ===========================================================================
// validate
// ===========================================================================

inline int run_validate(const RunConfig& cfg, std::ostream& out,
                        std::ostream& err) {
    Mdp m;
    try {
        m = detail::resolve_mdp(cfg);
    } catch (const SchemaError& e) {
        // A malformed document is exactly what this subcommand reports on.
        err << "invalid: " << e.what() << "\n";
        return 1;
    }
    const auto violations = validate_mdp(m);
    if (violations.empty()) {
        out << "valid: " << m.num_states() << " states, " << m.num_actions()
            << " actions, horizon " << m.horizon
            << (is_deterministic(m) ? ", deterministic" : ", stochastic")
            << "\n";
        return 0;
    }
    for (const auto& v : violations) out << "violation: " << v << "\n";
    return 1;
}

// ===========================================================================
// iterate
// ===========================================================================

namespace detail {

inline double schedule_alpha(const RunConfig& cfg, int k) {
    if (cfg.alpha_schedule == "pow2") return std::ldexp(1.0, k);  // 2^k
    if (cfg.alpha_schedule == "linear") return double(k);
    if (cfg.alpha_schedule == "explicit") {
        if (static_cast<int>(cfg.alpha_list.size()) < k)
            throw ConfigError("explicit alpha schedule has " +
                              std::to_string(cfg.alpha_list.size()) +
                              " entries, need " + std::to_string(k));
        return cfg.alpha_list[k - 1];
    }
    throw ConfigError("unknown alpha schedule '" + cfg.alpha_schedule +
                      "' (pow2 | linear | explicit)");
}

inline IterationTrace build_trace(const Mdp& m, const RunConfig& cfg) {
    const Policy prior = uniform_policy(m);
    if (cfg.op == "G")
        return make_iteration_trace(
            m, reconditioning_sequence(m, prior, cfg.steps), "G", "-",
            cfg.delta);
    if (cfg.op == "F" || cfg.op == "H")
        return folded_trace(m, prior, cfg.steps, cfg.op == "H", cfg.delta);
    if (cfg.op == "temp") {
        std::vector<Policy> seq{prior};
        for (int k = 1; k <= cfg.steps; ++k) {
            const double alpha = schedule_alpha(cfg, k);
            if (!(alpha > 0.0))
                throw ConfigError("alpha schedule produced non-positive alpha " +
                                  std::to_string(alpha));
            seq.push_back(temperature_policy(m, prior, alpha));
        }
        return make_iteration_trace(m, seq, "temp", cfg.alpha_schedule,
                                    cfg.delta);
    }
    if (cfg.op == "coherence")
        return iterate_coherence(m, prior, softmax_selector(cfg.delta),
                                 cfg.steps);
    throw ConfigError("unknown operator '" + cfg.op +
                      "' (G | F | H | temp | coherence)");
}

}  // namespace detail

inline int run_iterate(const RunConfig& cfg, std::ostream& out,
                       std::ostream& err) {
    if (cfg.steps < 0) throw ConfigError("steps must be >= 0");
    if (!(cfg.delta > 0.0)) throw ConfigError("delta must be > 0");
    const Mdp m = detail::resolve_mdp(cfg);
    const IterationTrace trace = detail::build_trace(m, cfg);
    if (cfg.output_path.empty()) {
        write_trace_csv(out, trace);
    } else {
        std::ofstream file(cfg.output_path);
        if (!file) throw ConfigError("cannot open output file '" +
                                     cfg.output_path + "'");
        write_trace_csv(file, trace);
        err << "wrote " << trace.entries.size() << " rows to "
            << cfg.output_path << "\n";
    }
    return 0;
}

// ===========================================================================
// verify
// ===========================================================================

namespace detail {

inline std::optional<Mdp> optional_mdp(const RunConfig& cfg) {
    if (cfg.mdp_file.empty() && cfg.builtin.empty()) return std::nullopt;
    return resolve_mdp(cfg);
}

inline int verify_equivalence(const RunConfig& cfg, bool strict_temp,
                              std::ostream& out) {
    detail::Verdict v{out};
    auto run_one = [&](const Mdp& m, const std::string& label) {
        const int k_max = cfg.steps_set ? cfg.steps
                                        : (is_deterministic(m) ? 3 : 8);
        const auto rep =
            check_equivalence(m, uniform_policy(m), k_max, cfg.tol_equivalence);
        if (rep.deterministic) {
            v.check(label + ": four-way identity + linear-schedule identity, "
                            "max TV over k<=" + std::to_string(k_max),
                    rep.max_asserted_tv, rep.tolerance);
        } else {
            v.check(label + ": fold-vs-reconditioning identity, max TV over k<=" +
                        std::to_string(k_max),
                    rep.max_asserted_tv, rep.tolerance);
            out << "  info  measured fold-vs-temperature gap (not asserted): "
                << fmt(rep.max_measured_f_vs_alpha) << "\n";
            for (const auto& row : rep.rows)
                out << "    k=" << row.k << " TV(fold_k, temperature_" << row.k
                    << ") = " << fmt(row.tv_f_vs_alpha) << "\n";
            if (strict_temp)
                v.check(label + ": strict fold-vs-temperature identity",
                        rep.max_measured_f_vs_alpha, cfg.tol_equivalence);
        }
        for (const auto& [t, s] : rep.zero_posterior_states)
            out << "  note  zero-posterior state kept prior row: (t=" << t
                << ", " << m.states[s] << ")\n";
    };
    if (auto m = optional_mdp(cfg)) {
        run_one(*m, "given MDP");
    } else if (strict_temp) {
        run_one(builtin_example("temperature_counter"), "temperature_counter");
    } else {
        run_one(builtin_example("mountain_race"), "mountain_race");
        run_one(builtin_example("temperature_counter"), "temperature_counter");
    }
    return v.ok ? 0 : 1;
}

inline int verify_improvement(const RunConfig& cfg, std::ostream& out) {
    detail::Verdict v{out};
    auto audit_one = [&](const Mdp& m, const std::string& label) {
        const auto rep = improvement_audit(m, uniform_policy(m), cfg.steps);
        v.expect(label + ": J and success nondecreasing over " +
                     std::to_string(cfg.steps) + " steps",
                 rep.pass,
                 "J drops=" + std::to_string(rep.j_violations) +
                     " success drops=" + std::to_string(rep.success_violations) +
                     " worst J step=" + fmt(rep.worst_j_drop));
    };
    if (auto m = optional_mdp(cfg)) {
        audit_one(*m, "given MDP");
    } else {
        for (int i = 0; i < 100; ++i) {
            RandomMdpConfig rc;
            rc.seed = cfg.seed + i;
            rc.deterministic = false;
            const Mdp m = random_layered_mdp(rc);
            const auto rep = improvement_audit(m, uniform_policy(m), 8);
            if (!rep.pass)
                v.expect("random MDP seed " + std::to_string(rc.seed), false,
                         "J drops=" + std::to_string(rep.j_violations) +
                             " success drops=" +
                             std::to_string(rep.success_violations) +
                             " worst J step=" + fmt(rep.worst_j_drop));
        }
        v.expect("100 random stochastic MDPs, 8 steps each", v.ok, "");
    }
    return v.ok ? 0 : 1;
}

inline int verify_qv(const RunConfig& cfg, std::ostream& out) {
    detail::Verdict v{out};
    auto check_one = [&](const Mdp& m, const Policy& pi,
                         const std::string& label) {
        const auto rep = oracle_check_qv(m, pi);
        v.check(label + ": exp Q vs suffix-enumeration success probability",
                rep.max_gap, cfg.tol_oracle);
    };
    if (auto m = optional_mdp(cfg)) {
        check_one(*m, uniform_policy(*m), "given MDP, uniform policy");
        check_one(*m, random_policy(*m, cfg.seed), "given MDP, random policy");
    } else {
        check_one(builtin_example("mountain_race"),
                  uniform_policy(builtin_example("mountain_race")),
                  "mountain_race");
        check_one(builtin_example("temperature_counter"),
                  uniform_policy(builtin_example("temperature_counter")),
                  "temperature_counter");
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            RandomMdpConfig rc;
            rc.seed = cfg.seed + i;
            rc.deterministic = (i % 2 == 0);
            rc.allow_zero_success = true;
            const Mdp m = random_layered_mdp(rc);
            worst = std::max(
                worst, oracle_check_qv(m, random_policy(m, rc.seed + 7)).max_gap);
        }
        v.check("200 random MDPs, random policies: worst gap", worst,
                cfg.tol_oracle);
    }
    return v.ok ? 0 : 1;
}

inline int verify_kl(const RunConfig& cfg, std::ostream& out) {
    detail::Verdict v{out};
    auto gap_of = [](const Mdp& m, const Policy& a, const Policy& b) {
        const double occupancy_form = trajectory_kl(m, a, b);
        const double enumerated = oracle_trajectory_kl(m, a, b);
        if (occupancy_form == pos_inf || enumerated == pos_inf)
            return occupancy_form == enumerated ? 0.0 : pos_inf;
        return std::fabs(occupancy_form - enumerated);
    };
    if (auto m = optional_mdp(cfg)) {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i)
            worst = std::max(worst,
                             gap_of(*m, random_policy(*m, cfg.seed + 2 * i),
                                    random_policy(*m, cfg.seed + 2 * i + 1)));
        v.check("given MDP: occupancy-form KL vs enumerated KL, 20 pairs",
                worst, cfg.tol_oracle);
    } else {
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            RandomMdpConfig rc;
            rc.seed = cfg.seed + i;
            rc.deterministic = (i % 2 == 0);
            rc.allow_zero_success = true;
            const Mdp m = random_layered_mdp(rc);
            worst = std::max(worst, gap_of(m, random_policy(m, rc.seed + 11),
                                           random_policy(m, rc.seed + 13)));
        }
        v.check("200 random MDP/policy pairs: occupancy-form vs enumerated KL",
                worst, cfg.tol_oracle);
    }
    return v.ok ? 0 : 1;
}

inline int verify_factorization(const RunConfig& cfg, std::ostream& out) {
    detail::Verdict v{out};
    if (auto m = optional_mdp(cfg)) {
        const auto rep = check_deterministic_factorization(*m, uniform_policy(*m));
        v.check("given MDP: global vs local success-conditioned factorization",
                rep.max_gap, cfg.tol_oracle);
    } else {
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            RandomMdpConfig rc;
            rc.seed = cfg.seed + i;
            rc.deterministic = true;
            const Mdp m = random_layered_mdp(rc);
            worst = std::max(worst,
                             check_deterministic_factorization(
                                 m, random_policy(m, rc.seed + 3))
                                 .max_gap);
        }
        v.check("100 random deterministic MDPs: factorization gap", worst,
                cfg.tol_oracle);
    }
    return v.ok ? 0 : 1;
}

inline int verify_rate(const RunConfig& cfg, std::ostream& out) {
    Mdp m = optional_mdp(cfg).value_or(builtin_example("mountain_race"));
    const int k_max = cfg.steps_set ? std::max(cfg.steps, 8) : 16;
    const auto rep = rate_check(m, uniform_policy(m), k_max);
    detail::Verdict v{out};
    for (const auto& row : rep.rows)
        out << "  k=" << row.k << " actual=" << fmt(row.actual)
            << " predicted=" << fmt(row.predicted)
            << " ratio=" << fmt(row.ratio) << "\n";
    v.expect("finite-difference second derivatives consistent (h vs h/2)",
             rep.derivative_stable,
             "worst relative inconsistency=" + fmt(rep.worst_inconsistency));
    v.expect("actual/predicted ratio within [0.5, 2.0] for k >= 8",
             rep.band_pass, "");
    v.expect("ratio closer to 1 at the tail than at k=4", rep.trend_pass, "");
    return v.ok ? 0 : 1;
}

inline int verify_convergence(const RunConfig& cfg, std::ostream& out) {
    detail::Verdict v{out};
    auto probe_one = [&](const Mdp& m, const std::string& label) {
        const int steps = cfg.steps_set ? cfg.steps : 32;
        const auto rep = convergence_probe(m, uniform_policy(m), steps,
                                           1.0 / 32.0, cfg.tol_tv,
                                           cfg.tol_kappa);
        v.expect(label + ": prior has full support", rep.full_support, "");
        v.check(label + ": TV(iterate_" + std::to_string(steps) +
                    ", limit policy)",
                rep.tv_to_limit, rep.tv_threshold);
        v.check(label + ": kappa at delta=1/32", rep.kappa, rep.kappa_threshold);
    };
    if (auto m = optional_mdp(cfg)) {
        probe_one(*m, "given MDP");
    } else {
        probe_one(builtin_example("mountain_race"), "mountain_race");
        probe_one(builtin_example("temperature_counter"), "temperature_counter");
    }
    return v.ok ? 0 : 1;
}

inline int verify_stability(std::ostream& out) {
    const auto rep = stability_conflict_demo();
    detail::Verdict v{out};
    auto show = [&](const StabilityReport& r) {
        const Mdp m = make_stability_tree();
        out << "  depth " << r.n << ": "
            << (r.stable ? "stable" : "unstable") << " ("
            << r.comparisons.size() << " strict comparisons, "
            << r.witnesses.size() << " violations)\n";
        for (const auto& c : r.comparisons)
            out << "    t=" << c.t << " " << m.states[c.state] << ": lookahead "
                << m.actions[c.action_hi] << "=" << fmt(c.lookahead_hi) << " > "
                << m.actions[c.action_lo] << "=" << fmt(c.lookahead_lo)
                << "; immediate " << fmt(c.immediate_hi) << " vs "
                << fmt(c.immediate_lo) << (c.violated ? "  VIOLATED" : "")
                << "\n";
    };
    show(rep.depth1);
    show(rep.depth2);
    v.expect("depth-1 and depth-2 root-ordering requirements conflict",
             rep.conflict, rep.summary);
    return v.ok ? 0 : 1;
}

}  // namespace detail

inline int run_verify(const RunConfig& cfg, const std::string& check,
                      std::ostream& out, std::ostream& err) {
    (void)err;
    out << "verify " << check << "\n";
    int code;
    if (check == "equivalence")
        code = detail::verify_equivalence(cfg, false, out);
    else if (check == "equivalence-strict-temp")
        code = detail::verify_equivalence(cfg, true, out);
    else if (check == "improvement")
        code = detail::verify_improvement(cfg, out);
    else if (check == "qv")
        code = detail::verify_qv(cfg, out);
    else if (check == "kl")
        code = detail::verify_kl(cfg, out);
    else if (check == "factorization")
        code = detail::verify_factorization(cfg, out);
    else if (check == "rate")
        code = detail::verify_rate(cfg, out);
    else if (check == "convergence")
        code = detail::verify_convergence(cfg, out);
    else if (check == "stability")
        code = detail::verify_stability(out);
    else
        throw ConfigError(
            "unknown check '" + check +
            "' (equivalence | equivalence-strict-temp | improvement | qv | kl "
            "| factorization | rate | convergence | stability)");
    out << (code == 0 ? "OK" : "FAILED") << "\n";
    return code;
}

// ===========================================================================
// examples
// ===========================================================================

namespace detail {

/// Recomputes every figure-level golden value and compares at 1e-9.
inline bool examples_report(std::ostream& out, bool corrupt) {
    bool ok = true;
    auto expect = [&](const std::string& what, double measured,
                      double expected) {
        const bool pass = std::fabs(measured - expected) <= 1e-9;
        ok = ok && pass;
        out << "  " << (pass ? "PASS" : "FAIL") << "  " << what
            << "  measured=" << fmt(measured) << " expected=" << fmt(expected)
            << "\n";
    };

    Mdp race = make_mountain_race();
    if (corrupt)  // negative-control fixture: nudge one terminal success
        race.terminal_reward[race.state_index("silver_left")] =
            log_from_prob(0.76);
    const Mdp counter = make_temperature_counter();
    const Mdp tree = make_stability_tree();
    const Policy u_race = uniform_policy(race);
    const Policy u_counter = uniform_policy(counter);

    out << "builtin structure\n";
    expect("mountain_race: silver success probability",
           prob_from_log(race.terminal_reward[race.state_index("silver_left")]),
           0.75);
    expect("temperature_counter: p(s1 | start, a1)",
           counter.transition[0][0][counter.state_index("s1")], 0.75);
    expect("temperature_counter: p(s2 | start, a1)",
           counter.transition[0][0][counter.state_index("s2")], 0.25);
    expect("stability_tree: stochastic split",
           tree.transition[tree.state_index("s2b")][0][tree.state_index("s3b")],
           2.0 / 3.0);

    out << "soft values at the race root (uniform policy)\n";
    const SoftValues sv = soft_values(race, u_race);
    expect("exp Q(start, up)", prob_from_log(sv.q[0][0][0]), 0.5);
    expect("exp Q(start, down)", prob_from_log(sv.q[0][0][1]), 0.75);

    out << "iterated coherence (softmax delta=1)\n";
    const auto coh = iterate_coherence(race, u_race, softmax_selector(1.0), 2);
    const Policy& step1 = coh.entries[1].policy;
    const Policy& fix = coh.entries[2].policy;
    expect("step 1 root: weight(up)", step1.rows[0][0][0], 2.0 / 5.0);
    expect("step 1 root: weight(down)", step1.rows[0][0][1], 3.0 / 5.0);
    expect("fixpoint root: weight(up)", fix.rows[0][0][0], 4.0 / 7.0);
    expect("fixpoint root: weight(down)", fix.rows[0][0][1], 3.0 / 7.0);
    expect("fixpoint mountain: weight(up)", fix.rows[1][1][0], 1.0);
    expect("fixpoint forest: weight(up)", fix.rows[1][2][0], 0.5);
    expect("fixpoint incoherence", coh.entries[2].kappa_delta, 0.0);

    out << "trajectory functionals under the fixpoint policy\n";
    Trajectory gold_path{{0, 1, 3}, {0, 0}};
    expect("gold-path probability",
           trajectory_probability(race, fix, gold_path), 4.0 / 7.0);
    expect("occupancy d^1(mountain)", occupancy(race, fix).table[1][1],
           4.0 / 7.0);

    out << "goal conditioning\n";
    const Policy g_race = goal_condition(race, u_race).policy;
    expect("race posterior root: weight(up)", g_race.rows[0][0][0], 2.0 / 5.0);
    expect("race posterior root: weight(down)", g_race.rows[0][0][1], 3.0 / 5.0);
    const Policy g1 = goal_condition(counter, u_counter).policy;
    expect("counter posterior: weight(a1)", g1.rows[0][0][0], 5.0 / 11.0);
    expect("counter posterior: weight(a2)", g1.rows[0][0][1], 6.0 / 11.0);

    out << "operator sequences on the counter\n";
    const auto g_seq = reconditioning_sequence(counter, u_counter, 2);
    expect("re-conditioning twice: weight(a1)", g_seq[2].rows[0][0][0],
           25.0 / 61.0);
    expect("re-conditioning twice: weight(a2)", g_seq[2].rows[0][0][1],
           36.0 / 61.0);
    const auto f_seq = folded_sequence(counter, u_counter, 2);
    expect("fold step 1: weight(a1)", f_seq.policies[1].rows[0][0][0],
           5.0 / 11.0);
    expect("fold step 2: weight(a1)", f_seq.policies[2].rows[0][0][0],
           25.0 / 61.0);
    const Policy alpha2 = temperature_policy(counter, u_counter, 2.0);
    expect("temperature alpha=2: weight(a1)", alpha2.rows[0][0][0], 7.0 / 17.0);
    expect("temperature alpha=2: weight(a2)", alpha2.rows[0][0][1], 10.0 / 17.0);
    return ok;
}

}  // namespace detail

inline int run_examples(const RunConfig& cfg, std::ostream& out,
                        std::ostream& err) {
    (void)err;
    const bool ok = detail::examples_report(out, cfg.corrupt_builtin);
    out << (ok ? "OK" : "FAILED") << "\n";
    return ok ? 0 : 1;
}

// ===========================================================================
// stability
// ===========================================================================

inline int run_stability(const RunConfig& cfg, std::ostream& out,
                         std::ostream& err) {
    (void)err;
    Mdp m = cfg.mdp_file.empty() && cfg.builtin.empty()
                ? make_stability_tree()
                : detail::resolve_mdp(cfg);
    if (!cfg.steps_set) {
        // Default run: the two-depth conflict demonstration.
        return detail::verify_stability(out);
    }
    const auto rep = n_policy_stable(m, uniform_policy(m), cfg.steps);
    out << "depth " << rep.n << ": " << (rep.stable ? "stable" : "unstable")
        << "\n";
    out << "states checked: " << rep.states_checked
        << ", skipped (no room for lookahead): " << rep.states_skipped_horizon
        << "\n";
    for (const auto& c : rep.comparisons) {
        out << "  t=" << c.t << " " << m.states[c.state] << ": lookahead "
            << m.actions[c.action_hi] << "=" << detail::fmt(c.lookahead_hi)
            << " > " << m.actions[c.action_lo] << "="
            << detail::fmt(c.lookahead_lo) << "; immediate "
            << detail::fmt(c.immediate_hi) << " vs "
            << detail::fmt(c.immediate_lo) << (c.violated ? "  VIOLATED" : "")
            << "\n";
    }
    return 0;
}

}  // namespace mdptk
