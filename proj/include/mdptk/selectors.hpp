/**
 * Order-respecting selectors: maps from score vectors (extended reals) to
 * action distributions.  A selector is order-respecting when its output is
 * nondecreasing in a coordinate's own score, nonincreasing in every other
 * coordinate's score, and order-preserving between coordinates.
 *
 * Two families are provided: softmax with temperature delta (weights
 * proportional to exp(score/delta); smaller delta is sharper) and the
 * uniform-over-argmax selector (the delta -> 0 limit).  Rows whose scores are
 * all -inf yield the uniform distribution — such states have zero success
 * probability and the choice is immaterial to every metric, but selectors
 * must be total.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mdptk/logprob.hpp"

namespace mdptk {

struct Selector {
    std::string name;
    // Raw rule; callers go through operator() which handles all--inf rows.
    std::function<std::vector<double>(const std::vector<double>&)> rule;

    std::vector<double> operator()(const std::vector<double>& scores) const {
        bool any_finite = false;
        for (double x : scores)
            if (!is_log_zero(x)) any_finite = true;
        if (!any_finite)
            return std::vector<double>(scores.size(), 1.0 / scores.size());
        return rule(scores);
    }
};

/// Softmax with temperature delta: weights proportional to exp(score/delta),
/// computed with max-shift so arbitrarily sharp temperatures stay stable;
/// -inf scores get weight exactly 0.  Shift-invariant in the scores.
inline Selector softmax_selector(double delta) {
    std::ostringstream name;
    name << "softmax(delta=" << delta << ")";
    return {name.str(), [delta](const std::vector<double>& scores) {
                double best = log_zero;
                for (double x : scores)
                    if (x > best) best = x;
                std::vector<double> out(scores.size(), 0.0);
                double sum = 0.0;
                for (std::size_t i = 0; i < scores.size(); ++i) {
                    if (is_log_zero(scores[i])) continue;
                    out[i] = std::exp((scores[i] - best) / delta);
                    sum += out[i];
                }
                for (double& x : out) x /= sum;
                return out;
            }};
}

/// Uniform distribution over the argmax set (tie tolerance on the scores);
/// -inf is never a maximizer of a row that has any finite entry.
inline Selector argmax_uniform_selector(double tie_tol = 1e-12) {
    return {"argmax_uniform", [tie_tol](const std::vector<double>& scores) {
                double best = log_zero;
                for (double x : scores)
                    if (x > best) best = x;
                int count = 0;
                for (double x : scores)
                    if (x >= best - tie_tol) ++count;
                std::vector<double> out(scores.size(), 0.0);
                for (std::size_t i = 0; i < scores.size(); ++i)
                    if (scores[i] >= best - tie_tol) out[i] = 1.0 / count;
                return out;
            }};
}

/// Negative-control fixture: applies the inner selector to negated scores,
/// deliberately violating every order-respecting clause.
inline Selector reversed_selector(Selector inner) {
    return {"reversed(" + inner.name + ")",
            [inner](const std::vector<double>& scores) {
                std::vector<double> neg(scores.size());
                for (std::size_t i = 0; i < scores.size(); ++i)
                    neg[i] = is_log_zero(scores[i]) ? 0.0 : -scores[i];
                return inner(neg);
            }};
}

// ===========================================================================
// Order-respecting property check
// ===========================================================================

struct OrderRespectReport {
    long trials = 0;
    long violations = 0;
    std::vector<std::string> examples;  // first few violating cases
};

/// Samples score vectors and single-coordinate increases, asserting the three
/// clauses: own-coordinate output nondecreasing, other coordinates
/// nonincreasing, and x_i >= x_j implies f_i >= f_j.  Numerical slack 1e-12.
inline OrderRespectReport check_order_respecting(const Selector& f, int trials,
                                                 int dim,
                                                 std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> score(-5.0, 0.0);
    std::uniform_real_distribution<double> bump(1e-3, 1.0);
    std::uniform_int_distribution<int> coord(0, dim - 1);
    const double slack = 1e-12;
    OrderRespectReport rep;
    auto record = [&rep](const std::string& what) {
        ++rep.violations;
        if (rep.examples.size() < 5) rep.examples.push_back(what);
    };
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<double> x(dim);
        for (double& v : x) v = score(rng);
        const auto fx = f(x);
        // Order preservation on the base point.
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (x[i] >= x[j] && fx[i] < fx[j] - slack)
                    record("order violated: x_i >= x_j but f_i < f_j");
        // Monotonicity under a single-coordinate increase.
        const int i = coord(rng);
        std::vector<double> y = x;
        y[i] += bump(rng);
        const auto fy = f(y);
        if (fy[i] < fx[i] - slack)
            record("own-score increase lowered own probability");
        for (int j = 0; j < dim; ++j)
            if (j != i && fy[j] > fx[j] + slack)
                record("other-score increase raised another probability");
        ++rep.trials;
    }
    return rep;
}

}  // namespace mdptk
