/**
 * Log-domain probability arithmetic.
 *
 * Probabilities live in log space as extended reals in [-inf, 0]; -inf encodes
 * probability exactly 0.  All aggregation goes through max-shifted log-sum-exp
 * so that products over many steps neither underflow nor lose the exact-zero
 * case.  Also hosts the small distribution metrics (KL, entropy, total
 * variation) shared across the library.
 */
#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdptk {

// Log of probability zero.
inline constexpr double log_zero = -std::numeric_limits<double>::infinity();

inline constexpr double pos_inf = std::numeric_limits<double>::infinity();

inline bool is_log_zero(double x) { return std::isinf(x) && x < 0; }

/// log p for p in [0, 1]; p = 0 maps to -inf.  Tiny positive slack tolerated
/// so that round-tripped probabilities (e.g. 1 + 1e-16) do not throw.
inline double log_from_prob(double p) {
    if (!(p >= 0.0) || p > 1.0 + 1e-12)
        throw std::domain_error("log_from_prob: probability out of [0, 1]: " +
                                std::to_string(p));
    if (p <= 0.0) return log_zero;
    if (p >= 1.0) return 0.0;
    return std::log(p);
}

/// exp for extended log values; exp(-inf) = 0 exactly.
inline double prob_from_log(double x) {
    if (is_log_zero(x)) return 0.0;
    return std::exp(x);
}

/// log sum_i exp(x_i) with max-shift stabilization; empty or all -inf -> -inf.
inline double log_sum_exp(const std::vector<double>& xs) {
    double m = log_zero;
    for (double x : xs)
        if (x > m) m = x;
    if (is_log_zero(m)) return log_zero;
    double acc = 0.0;
    for (double x : xs)
        if (!is_log_zero(x)) acc += std::exp(x - m);
    return m + std::log(acc);
}

/// log sum_i w_i exp(x_i) for linear-domain weights w_i >= 0.
/// Terms with w_i = 0 contribute nothing even when x_i = -inf.
inline double weighted_log_sum_exp(const std::vector<double>& xs,
                                   const std::vector<double>& ws) {
    assert(xs.size() == ws.size());
    double m = log_zero;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (ws[i] > 0.0 && xs[i] > m) m = xs[i];
    if (is_log_zero(m)) return log_zero;
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (ws[i] > 0.0 && !is_log_zero(xs[i]))
            acc += ws[i] * std::exp(xs[i] - m);
    return m + std::log(acc);
}

// ===========================================================================
// Distribution metrics (linear-domain rows)
// ===========================================================================

/// KL(p || q) in nats with the measure-theoretic conventions:
/// 0 * log(0/q) = 0, and p > 0 with q = 0 gives +inf.
inline double kl_divergence(const std::vector<double>& p,
                            const std::vector<double>& q) {
    assert(p.size() == q.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return pos_inf;
        acc += p[i] * std::log(p[i] / q[i]);
    }
    return acc;
}

/// Shannon entropy in nats; 0 * log 0 = 0.
inline double entropy(const std::vector<double>& p) {
    double acc = 0.0;
    for (double x : p)
        if (x > 0.0) acc -= x * std::log(x);
    return acc;
}

/// Total variation distance: half the L1 distance between two rows.
inline double total_variation(const std::vector<double>& p,
                              const std::vector<double>& q) {
    assert(p.size() == q.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::fabs(p[i] - q[i]);
    return 0.5 * acc;
}

}  // namespace mdptk
