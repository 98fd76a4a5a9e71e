// ===========================================================================
// Unit tests: seeded random layered model generator
// ===========================================================================
#include <catch2/catch_amalgamated.hpp>

#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"
#include "mdptk/random_mdp.hpp"

using Catch::Approx;
using namespace mdptk;

TEST_CASE("generated models satisfy every invariant", "[random]") {
    int branching_models = 0;
    for (int i = 0; i < 50; ++i) {
        RandomMdpConfig rc;
        rc.seed = 4000 + i;
        rc.deterministic = (i % 2 == 0);
        rc.allow_zero_success = (i % 3 == 0);
        const Mdp m = random_layered_mdp(rc);
        INFO("seed " << rc.seed);
        REQUIRE(validate_mdp(m).empty());
        REQUIRE(m.horizon >= 1);
        REQUIRE(m.horizon <= 4);
        REQUIRE(m.num_states() <= 6);
        REQUIRE(m.num_actions() >= 2);
        REQUIRE(m.num_actions() <= 3);
        if (rc.deterministic) REQUIRE(is_deterministic(m));
        // A stochastic draw can still be degenerate when a layer holds a
        // single state, so only require that branching happens somewhere.
        if (!rc.deterministic && !is_deterministic(m)) ++branching_models;
        REQUIRE(enumeration_size_bound(m) <= 1e7);
    }
    REQUIRE(branching_models >= 10);
}

TEST_CASE("generation is reproducible and seed-sensitive", "[random]") {
    RandomMdpConfig rc;
    rc.seed = 77;
    const Mdp a = random_layered_mdp(rc);
    const Mdp b = random_layered_mdp(rc);
    REQUIRE(a.states == b.states);
    REQUIRE(a.horizon == b.horizon);
    REQUIRE(a.transition == b.transition);
    REQUIRE(a.step_reward == b.step_reward);
    REQUIRE(a.terminal_reward == b.terminal_reward);

    rc.seed = 78;
    const Mdp c = random_layered_mdp(rc);
    const bool differs = a.states != c.states || a.horizon != c.horizon ||
                         a.transition != c.transition ||
                         a.terminal_reward != c.terminal_reward;
    REQUIRE(differs);
}

TEST_CASE("random policies are valid and reproducible", "[random]") {
    RandomMdpConfig rc;
    rc.seed = 99;
    const Mdp m = random_layered_mdp(rc);
    const Policy p = random_policy(m, 5);
    REQUIRE(validate_policy(m, p).empty());
    for (const auto& per_state : p.rows)
        for (const auto& row : per_state)
            for (double w : row) REQUIRE(w > 0.0);
    const Policy q = random_policy(m, 5);
    REQUIRE(p.rows == q.rows);
    const Policy r = random_policy(m, 6);
    REQUIRE(p.rows != r.rows);
}
