/**
 * Iteration traces: the per-step record every operator sequence produces
 * (policy snapshot, return, success probability, incoherence at the
 * configured delta, step-to-step total variation, and total variation to the
 * limit policy of the final iterate), plus the CSV emission used by the CLI.
 *
 * CSV columns are exactly: k, operator, J, success_prob, kappa_delta,
 * tv_step, tv_to_limit.  Numbers are printed with 12 significant digits and
 * -inf as the literal token `-inf`, so reruns are byte-stable.
 */
#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "mdptk/policy.hpp"

namespace mdptk {

struct TraceEntry {
    int k = 0;
    Policy policy;
    double j = 0.0;             // expected return, possibly -inf
    double success_prob = 0.0;
    double kappa_delta = 0.0;   // incoherence at the trace's delta
    double tv_step = 0.0;       // TV distance to the previous entry's policy
    double tv_to_limit = 0.0;   // TV distance to limit_policy of the final entry
};

struct IterationTrace {
    std::string operator_tag;   // e.g. "G", "F", "H", "temp", "coherence"
    std::string schedule_tag;   // e.g. "pow2", "linear", "-"
    double delta = 1.0;         // delta used for the kappa column
    std::vector<TraceEntry> entries;
};

/// 12-significant-digit rendering; infinities as "inf"/"-inf" (glibc's %g
/// prints them that way already, but the formatting is pinned here).
inline std::string format_csv_value(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
    out << "k,operator,J,success_prob,kappa_delta,tv_step,tv_to_limit\n";
    for (const auto& e : trace.entries)
        out << e.k << ',' << trace.operator_tag << ','
            << format_csv_value(e.j) << ','
            << format_csv_value(e.success_prob) << ','
            << format_csv_value(e.kappa_delta) << ','
            << format_csv_value(e.tv_step) << ','
            << format_csv_value(e.tv_to_limit) << '\n';
}

}  // namespace mdptk
