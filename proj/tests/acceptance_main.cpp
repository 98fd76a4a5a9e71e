// ===========================================================================
// Acceptance gate: one pass/fail line per criterion, with the measured
// values, the pinned tolerance, and the wall-clock budget printed inline.
//
// Exit code: 0 iff every criterion passes.  Two criteria are expected to
// fail on this exact-arithmetic implementation and say so in their detail
// lines; see the README's "Known measurement shortfalls" section.
// ===========================================================================
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mdptk/coherence.hpp"
#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"
#include "mdptk/random_mdp.hpp"
#include "mdptk/retraining.hpp"
#include "mdptk/soft_values.hpp"
#include "mdptk/stability.hpp"

using namespace mdptk;

namespace {

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<bool(std::string&)> body;  // fills a detail string
};

double max_dev(std::initializer_list<std::pair<double, double>> pairs) {
    double worst = 0.0;
    for (const auto& [measured, expected] : pairs)
        worst = std::max(worst, std::fabs(measured - expected));
    return worst;
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// --------------------------------------------------------------------- 1
bool golden_fixpoint(std::string& detail) {
    const Mdp m = make_mountain_race();
    const auto trace =
        iterate_coherence(m, uniform_policy(m), softmax_selector(1.0), 2);
    const Policy& s1 = trace.entries[1].policy;
    const Policy& fix = trace.entries[2].policy;
    const int mountain = m.state_index("mountain");
    const int forest = m.state_index("forest");
    const double dev = max_dev({{s1.rows[0][0][0], 2.0 / 5.0},
                                {s1.rows[0][0][1], 3.0 / 5.0},
                                {fix.rows[0][0][0], 4.0 / 7.0},
                                {fix.rows[0][0][1], 3.0 / 7.0},
                                {fix.rows[1][mountain][0], 1.0},
                                {fix.rows[1][mountain][1], 0.0},
                                {fix.rows[1][forest][0], 0.5},
                                {fix.rows[1][forest][1], 0.5}});
    detail = "max |deviation| = " + num(dev) + " (tol 1e-9)";
    return dev <= 1e-9;
}

// --------------------------------------------------------------------- 2
bool golden_counterexample(std::string& detail) {
    const Mdp m = make_temperature_counter();
    const Policy u = uniform_policy(m);
    const auto fold = folded_sequence(m, u, 2);
    const Policy t2 = temperature_policy(m, u, 2.0);
    const double dev =
        max_dev({{fold.policies[1].rows[0][0][0], 5.0 / 11.0},
                 {fold.policies[1].rows[0][0][1], 6.0 / 11.0},
                 {fold.policies[2].rows[0][0][0], 25.0 / 61.0},
                 {fold.policies[2].rows[0][0][1], 36.0 / 61.0},
                 {t2.rows[0][0][0], 7.0 / 17.0},
                 {t2.rows[0][0][1], 10.0 / 17.0}});
    const double gap =
        std::fabs(fold.policies[2].rows[0][0][0] - t2.rows[0][0][0]);
    detail = "max |deviation| = " + num(dev) +
             " (tol 1e-9); fold-vs-temperature gap = " + num(gap) +
             " (a real inequality, exact value |25/61 - 7/17|)";
    return dev <= 1e-9 && gap > 1e-6;
}

// --------------------------------------------------------------------- 3
bool oracle_qv(std::string& detail) {
    double worst = 0.0;
    for (const char* name :
         {"mountain_race", "temperature_counter", "stability_tree"}) {
        const Mdp m = builtin_example(name);
        worst = std::max(worst, oracle_check_qv(m, uniform_policy(m)).max_gap);
    }
    for (int i = 0; i < 200; ++i) {
        RandomMdpConfig rc;
        rc.seed = 1 + i;
        rc.deterministic = (i % 2 == 0);
        rc.allow_zero_success = true;
        const Mdp m = random_layered_mdp(rc);
        worst = std::max(
            worst, oracle_check_qv(m, random_policy(m, rc.seed + 7)).max_gap);
    }
    detail = "worst recursion-vs-enumeration gap = " + num(worst) +
             " over builtins + 200 random models (tol 1e-9)";
    return worst <= 1e-9;
}

// --------------------------------------------------------------------- 4
bool occupancy_kl(std::string& detail) {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        RandomMdpConfig rc;
        rc.seed = 1 + i;
        rc.deterministic = (i % 2 == 0);
        rc.allow_zero_success = true;
        const Mdp m = random_layered_mdp(rc);
        const Policy a = random_policy(m, rc.seed + 11);
        const Policy b = random_policy(m, rc.seed + 13);
        const double lhs = trajectory_kl(m, a, b);
        const double rhs = oracle_trajectory_kl(m, a, b);
        if (lhs == pos_inf || rhs == pos_inf) {
            if (lhs != rhs) worst = pos_inf;
            continue;
        }
        worst = std::max(worst, std::fabs(lhs - rhs));
    }
    detail = "worst occupancy-form vs enumerated gap = " + num(worst) +
             " over 200 random pairs (tol 1e-9)";
    return worst <= 1e-9;
}

// --------------------------------------------------------------------- 5
bool det_factorization(std::string& detail) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        RandomMdpConfig rc;
        rc.seed = 1 + i;
        rc.deterministic = true;
        rc.allow_zero_success = true;
        const Mdp m = random_layered_mdp(rc);
        worst = std::max(worst, check_deterministic_factorization(
                                    m, random_policy(m, rc.seed + 3))
                                    .max_gap);
    }
    detail = "worst global-vs-local factorization gap = " + num(worst) +
             " over 100 random deterministic models (tol 1e-9)";
    return worst <= 1e-9;
}

// --------------------------------------------------------------------- 6
bool improvement(std::string& detail) {
    int failing_mdps = 0, j_drops = 0, success_drops = 0;
    double worst_drop = 0.0;
    std::uint64_t first_bad = 0;
    for (int i = 0; i < 100; ++i) {
        RandomMdpConfig rc;
        rc.seed = 1 + i;
        rc.deterministic = false;
        const Mdp m = random_layered_mdp(rc);
        const auto rep = improvement_audit(m, uniform_policy(m), 8);
        if (!rep.pass) {
            if (failing_mdps == 0) first_bad = rc.seed;
            ++failing_mdps;
            j_drops += rep.j_violations;
            success_drops += rep.success_violations;
            worst_drop = std::min(worst_drop, rep.worst_j_drop);
        }
    }
    if (failing_mdps == 0) {
        detail = "J and success nondecreasing (slack 1e-10) on all 100 random "
                 "stochastic models, 8 steps each";
        return true;
    }
    detail = std::to_string(failing_mdps) +
             "/100 models violate J-monotonicity (first: seed " +
             std::to_string(first_bad) + ", worst step " + num(worst_drop) +
             "); success-probability drops: " + std::to_string(success_drops) +
             ".  Expected shortfall: with stochastic transitions the "
             "expected log-success can dip while the success chance rises; "
             "see the pinned counterexample in the unit tests.";
    return false;
}

// --------------------------------------------------------------------- 7
bool equivalence(std::string& detail) {
    double worst_det = 0.0, worst_sto = 0.0;
    for (int i = 0; i < 100; ++i) {
        RandomMdpConfig rc;
        rc.seed = 1 + i;
        rc.deterministic = true;
        const Mdp m = random_layered_mdp(rc);
        const auto rep = check_equivalence(m, uniform_policy(m), 8);
        worst_det = std::max(worst_det, rep.max_asserted_tv);
    }
    for (int i = 0; i < 100; ++i) {
        RandomMdpConfig rc;
        rc.seed = 1 + i;
        rc.deterministic = false;
        const Mdp m = random_layered_mdp(rc);
        const auto rep = check_equivalence(m, uniform_policy(m), 8);
        worst_sto = std::max(worst_sto, rep.max_asserted_tv);
    }
    detail = "deterministic four-family max TV = " + num(worst_det) +
             "; stochastic fold-vs-recondition max TV = " + num(worst_sto) +
             " (tol 1e-8, 100 models each)";
    return worst_det <= 1e-8 && worst_sto <= 1e-8;
}

// --------------------------------------------------------------------- 8
bool convergence(std::string& detail) {
    const auto race = convergence_probe(make_mountain_race(),
                                        uniform_policy(make_mountain_race()),
                                        32);
    const auto counter =
        convergence_probe(make_temperature_counter(),
                          uniform_policy(make_temperature_counter()), 32);
    detail = "race: TV = " + num(race.tv_to_limit) + ", kappa = " +
             num(race.kappa) + "; counter: TV = " + num(counter.tv_to_limit) +
             ", kappa = " + num(counter.kappa) +
             " (thresholds 1e-3 / 1e-2 at 32 steps)";
    if (!counter.tv_pass)
        detail += ".  Expected shortfall: the counter's residual odds shrink "
                  "by 5/6 per step, so 32 steps leave TV = 2.917e-3 > 1e-3 "
                  "(38 steps would be needed); the kappa clause and both "
                  "race clauses do pass.";
    return race.pass && counter.pass;
}

// --------------------------------------------------------------------- 9
bool rate(std::string& detail) {
    const Mdp m = make_mountain_race();
    const auto rep = rate_check(m, uniform_policy(m), 16);
    double r8 = 0.0, r16 = 0.0;
    for (const auto& row : rep.rows) {
        if (row.k == 8) r8 = row.ratio;
        if (row.k == 16) r16 = row.ratio;
    }
    detail = "actual/predicted ratios: " + num(r8) + " at k=8 ... " + num(r16) +
             " at k=16 (band [0.5, 2.0]); trend toward 1: " +
             (rep.trend_pass ? "yes" : "no") +
             "; derivative consistency " + num(rep.worst_inconsistency);
    return rep.pass;
}

// --------------------------------------------------------------------- 10
bool stability_conflict(std::string& detail) {
    const auto rep = stability_conflict_demo();
    double dev = 1.0;
    if (!rep.depth1.comparisons.empty() && !rep.depth2.witnesses.empty()) {
        const auto& c1 = rep.depth1.comparisons.front();
        const auto& c2 = rep.depth2.witnesses.front();
        dev = max_dev({{c1.lookahead_hi, 0.5},
                       {c1.lookahead_lo, 1.0 / 3.0},
                       {c2.lookahead_hi, 2.0 / 3.0},
                       {c2.lookahead_lo, 0.5},
                       {c2.immediate_hi, 1.0 / 3.0},
                       {c2.immediate_lo, 0.5}});
    }
    detail = "depth-1 wants the 1/2-action, depth-2 wants the 2/3-action; "
             "witness-mass max |deviation| = " +
             num(dev) + " (tol 1e-12)";
    return rep.conflict && dev <= 1e-12;
}

// --------------------------------------------------------------------- 11
bool fixpoint_bound(std::string& detail) {
    int worst_excess = 0;
    double worst_kappa = 0.0;
    for (int i = 0; i < 100; ++i) {
        RandomMdpConfig rc;
        rc.seed = 1 + i;
        rc.deterministic = (i % 2 == 0);
        const Mdp m = random_layered_mdp(rc);
        const auto trace = iterate_coherence(m, random_policy(m, rc.seed + 5),
                                             softmax_selector(1.0),
                                             m.horizon + 1);
        worst_excess =
            std::max(worst_excess, fixpoint_index(m, trace) - m.horizon);
        worst_kappa =
            std::max(worst_kappa, trace.entries.back().kappa_delta);
    }
    detail = "fixpoint reached within the horizon on all 100 random models "
             "(worst excess " +
             std::to_string(worst_excess) + " steps); residual incoherence " +
             num(worst_kappa);
    return worst_excess <= 0 && worst_kappa <= 1e-12;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "golden fixpoint of iterated soft self-consistency", 1.0,
         golden_fixpoint},
        {2, "golden counterexample: folding is not temperature scaling", 1.0,
         golden_counterexample},
        {3, "soft values match the suffix enumeration oracle", 30.0,
         oracle_qv},
        {4, "occupancy-form KL matches the enumerated KL", 30.0, occupancy_kl},
        {5, "deterministic trajectory factorization", 30.0, det_factorization},
        {6, "return improvement under repeated re-conditioning", 60.0,
         improvement},
        {7, "equivalence of the retraining operator families", 120.0,
         equivalence},
        {8, "convergence and vanishing incoherence at 32 steps", 5.0,
         convergence},
        {9, "improvement-rate prediction on the race", 10.0, rate},
        {10, "depth-1 vs depth-2 stability conflict", 1.0, stability_conflict},
        {11, "coherence fixpoint reached within the horizon", 30.0,
         fixpoint_bound},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count();
        const bool in_budget = secs <= c.budget_seconds;
        const bool pass = ok && in_budget;
        if (!pass) ++failures;
        std::printf("[%2d] %s  %-55s  %6.2f s / %g s\n", c.id,
                    pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                    c.budget_seconds);
        std::printf("     %s%s\n", detail.c_str(),
                    !in_budget ? "  [OVER TIME BUDGET]" : "");
    }
    std::printf("RESULT: %d/11 criteria passed\n",
                11 - failures);
    return failures == 0 ? 0 : 1;
}
