/**
 * Seeded random layered MDPs for the property suites.
 *
 * States are arranged in horizon+1 layers and transitions only flow from
 * layer t to layer t+1, so enumeration stays exact and stationary dynamics
 * lose nothing (a state is only ever visited at its own layer's time).
 * Sizes stay at desk scale: |S| <= 6, |A| in {2, 3}, T <= 4.  Success
 * probabilities are bounded away from 0 unless zeros are explicitly allowed
 * (some propositions are only about everywhere-possible success).
 */
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"

namespace mdptk {

struct RandomMdpConfig {
    std::uint64_t seed = 1;
    bool deterministic = false;
    bool allow_zero_success = false;  // lets terminal/step successes be 0
    int max_states = 6;
    int max_horizon = 4;
};

/// Layered random MDP; every structural draw comes from the seeded engine so
/// a config reproduces its MDP exactly.
inline Mdp random_layered_mdp(const RandomMdpConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int horizon = 1 + static_cast<int>(rng() % cfg.max_horizon);
    std::vector<int> layer_size(horizon + 1, 1);
    int spare = cfg.max_states - (horizon + 1);
    for (int i = 0; i < spare; ++i)
        if (unit(rng) < 0.7)
            ++layer_size[static_cast<int>(rng() % (horizon + 1))];
    const int num_actions = 2 + static_cast<int>(rng() % 2);

    Mdp m;
    m.horizon = horizon;
    std::vector<std::vector<int>> layers(horizon + 1);
    for (int t = 0; t <= horizon; ++t)
        for (int i = 0; i < layer_size[t]; ++i) {
            layers[t].push_back(m.num_states());
            m.states.push_back("t" + std::to_string(t) + "_s" +
                               std::to_string(i));
        }
    for (int a = 0; a < num_actions; ++a)
        m.actions.push_back("a" + std::to_string(a));

    const int S = m.num_states();
    m.initial.assign(S, 0.0);
    m.initial[layers[0][0]] = 1.0;

    m.transition.assign(S, std::vector<std::vector<double>>(
                               num_actions, std::vector<double>(S, 0.0)));
    for (int t = 0; t < horizon; ++t)
        for (int s : layers[t])
            for (int a = 0; a < num_actions; ++a) {
                auto& row = m.transition[s][a];
                if (cfg.deterministic) {
                    row[layers[t + 1][rng() % layers[t + 1].size()]] = 1.0;
                } else {
                    double sum = 0.0;
                    for (int target : layers[t + 1]) {
                        row[target] = unit(rng) + 1e-3;  // keep full support
                        sum += row[target];
                    }
                    for (int target : layers[t + 1]) row[target] /= sum;
                }
            }
    for (int s : layers[horizon])
        for (int a = 0; a < num_actions; ++a) m.transition[s][a][s] = 1.0;

    auto success_draw = [&](double zero_chance) {
        if (cfg.allow_zero_success && unit(rng) < zero_chance) return log_zero;
        return log_from_prob(0.05 + 0.95 * unit(rng));
    };
    m.step_reward.assign(S, std::vector<double>(num_actions, 0.0));
    for (int t = 0; t < horizon; ++t)
        for (int s : layers[t])
            for (int a = 0; a < num_actions; ++a)
                if (unit(rng) >= 0.5) m.step_reward[s][a] = success_draw(0.05);
    m.terminal_reward.assign(S, 0.0);
    for (int s : layers[horizon]) m.terminal_reward[s] = success_draw(0.1);
    return m;
}

/// Random full-support policy for m: rows drawn from [0.1, 1] and normalized,
/// independently per (t, s).
inline Policy random_policy(const Mdp& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mass(0.1, 1.0);
    Policy pi;
    pi.rows.assign(m.horizon, std::vector<std::vector<double>>(
                                  m.num_states(),
                                  std::vector<double>(m.num_actions(), 0.0)));
    for (auto& layer : pi.rows)
        for (auto& row : layer) {
            double sum = 0.0;
            for (double& p : row) {
                p = mass(rng);
                sum += p;
            }
            for (double& p : row) p /= sum;
        }
    return pi;
}

}  // namespace mdptk
