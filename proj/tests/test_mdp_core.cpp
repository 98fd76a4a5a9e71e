// ===========================================================================
// Unit tests: MDP model, builtin examples, JSON loading, enumeration
// ===========================================================================
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "mdptk/json_io.hpp"
#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"

using Catch::Approx;
using namespace mdptk;

#ifndef MDPTK_TEST_DATA_DIR
#define MDPTK_TEST_DATA_DIR "tests/data"
#endif

static std::string data_file(const std::string& name) {
    return std::string(MDPTK_TEST_DATA_DIR) + "/" + name;
}

TEST_CASE("builtin examples are well-formed", "[mdp]") {
    for (const char* name :
         {"mountain_race", "temperature_counter", "stability_tree"}) {
        const Mdp m = builtin_example(name);
        INFO(name);
        REQUIRE(validate_mdp(m).empty());
    }
    REQUIRE_THROWS_AS(builtin_example("no_such_example"), std::invalid_argument);
}

TEST_CASE("mountain_race structure", "[mdp]") {
    const Mdp m = make_mountain_race();
    REQUIRE(m.num_states() == 7);
    REQUIRE(m.num_actions() == 2);
    REQUIRE(m.horizon == 2);
    REQUIRE(is_deterministic(m));
    REQUIRE(m.initial[m.state_index("start")] == 1.0);
    REQUIRE(m.terminal_reward[m.state_index("gold")] == 0.0);
    REQUIRE(is_log_zero(m.terminal_reward[m.state_index("skull")]));
    REQUIRE(m.terminal_reward[m.state_index("silver_left")] ==
            Approx(std::log(0.75)).margin(1e-15));
    REQUIRE(m.terminal_reward[m.state_index("silver_right")] ==
            Approx(std::log(0.75)).margin(1e-15));
    // start --up--> mountain --up--> gold; --down--> skull
    REQUIRE(m.transition[m.state_index("start")][0][m.state_index("mountain")] ==
            1.0);
    REQUIRE(m.transition[m.state_index("mountain")][1][m.state_index("skull")] ==
            1.0);
}

TEST_CASE("temperature_counter structure", "[mdp]") {
    const Mdp m = make_temperature_counter();
    REQUIRE(m.num_states() == 3);
    REQUIRE(m.num_actions() == 2);
    REQUIRE(m.horizon == 1);
    REQUIRE_FALSE(is_deterministic(m));
    const int s1 = m.state_index("s1"), s2 = m.state_index("s2");
    REQUIRE(m.transition[0][0][s1] == Approx(0.75));
    REQUIRE(m.transition[0][0][s2] == Approx(0.25));
    REQUIRE(m.transition[0][1][s1] == Approx(0.5));
    REQUIRE(m.transition[0][1][s2] == Approx(0.5));
    REQUIRE(m.terminal_reward[s1] == Approx(std::log(1.0 / 3.0)).margin(1e-15));
    REQUIRE(m.terminal_reward[s2] == Approx(std::log(2.0 / 3.0)).margin(1e-15));
}

TEST_CASE("stability_tree structure", "[mdp]") {
    const Mdp m = make_stability_tree();
    REQUIRE(m.horizon == 3);
    REQUIRE_FALSE(is_deterministic(m));
    const int s2b = m.state_index("s2b");
    REQUIRE(m.transition[s2b][0][m.state_index("s3b")] == Approx(2.0 / 3.0));
    REQUIRE(m.transition[s2b][0][m.state_index("s3c")] == Approx(1.0 / 3.0));
    REQUIRE(m.transition[s2b][1][m.state_index("s3c")] == Approx(1.0));
    REQUIRE(m.terminal_reward[m.state_index("s3")] ==
            Approx(std::log(0.5)).margin(1e-15));
    REQUIRE(m.terminal_reward[m.state_index("s3b")] == 0.0);
    REQUIRE(is_log_zero(m.terminal_reward[m.state_index("s3c")]));
}

TEST_CASE("validate_mdp catches malformed models", "[mdp]") {
    Mdp m = make_mountain_race();
    SECTION("transition row not summing to one") {
        m.transition[0][0][1] = 0.9;
        REQUIRE_FALSE(validate_mdp(m).empty());
    }
    SECTION("negative probability") {
        m.transition[0][0][1] = 1.2;
        m.transition[0][0][2] = -0.2;
        REQUIRE_FALSE(validate_mdp(m).empty());
    }
    SECTION("positive log-reward") {
        m.terminal_reward[3] = 0.5;
        REQUIRE_FALSE(validate_mdp(m).empty());
    }
    SECTION("zero horizon") {
        m.horizon = 0;
        REQUIRE_FALSE(validate_mdp(m).empty());
    }
    SECTION("duplicate state names") {
        m.states[1] = "start";
        REQUIRE_FALSE(validate_mdp(m).empty());
    }
    SECTION("initial distribution not summing to one") {
        m.initial[0] = 0.5;
        REQUIRE_FALSE(validate_mdp(m).empty());
    }
}

TEST_CASE("JSON loader handles fractions and defaults", "[mdp][io]") {
    const Mdp m = load_mdp(data_file("race_fractions.json"));
    REQUIRE(validate_mdp(m).empty());
    REQUIRE(m.num_states() == 7);
    REQUIRE(m.horizon == 2);
    // fraction strings
    const int forest = m.state_index("forest");
    REQUIRE(m.transition[forest][0][m.state_index("silver_left")] ==
            Approx(0.5));
    REQUIRE(m.terminal_reward[m.state_index("silver_left")] ==
            Approx(std::log(0.75)).margin(1e-15));
    // rows omitted from the document default to self-loops
    const int gold = m.state_index("gold");
    REQUIRE(m.transition[gold][0][gold] == 1.0);
    REQUIRE(m.transition[gold][1][gold] == 1.0);
    // step_success omitted entirely -> all step rewards are log 1 = 0
    REQUIRE(m.step_reward[0][0] == 0.0);
    // whole-model sanity: uniform policy success chance is 5/8 as in the
    // builtin (the silver rewards are symmetric, so the stochastic forest
    // row does not change it)
    REQUIRE(success_probability(m, uniform_policy(m)) ==
            Approx(5.0 / 8.0).margin(1e-12));
}

TEST_CASE("JSON loader rejects malformed documents", "[mdp][io]") {
    REQUIRE_THROWS_AS(load_mdp(data_file("bad_transition_sum.json")),
                      SchemaError);
    REQUIRE_THROWS_AS(load_mdp(data_file("no_such_file.json")), SchemaError);
    SECTION("missing required field") {
        REQUIRE_THROWS_AS(
            load_mdp_from_string(R"({"states": ["a"], "actions": ["x"]})"),
            SchemaError);
    }
    SECTION("unknown state in a transition row") {
        REQUIRE_THROWS_AS(load_mdp_from_string(R"({
            "states": ["a"], "actions": ["x"], "horizon": 1,
            "initial": {"a": 1},
            "transitions": {"a/x": {"zzz": 1}}})"),
                          SchemaError);
    }
    SECTION("malformed fraction string") {
        REQUIRE_THROWS_AS(load_mdp_from_string(R"({
            "states": ["a"], "actions": ["x"], "horizon": 1,
            "initial": {"a": 1},
            "transitions": {"a/x": {"a": "three/4"}}})"),
                          SchemaError);
    }
    SECTION("success probability above one") {
        REQUIRE_THROWS_AS(load_mdp_from_string(R"({
            "states": ["a"], "actions": ["x"], "horizon": 1,
            "initial": {"a": 1},
            "transitions": {"a/x": {"a": 1}},
            "terminal_success": {"a": 1.5}})"),
                          SchemaError);
    }
}

TEST_CASE("trajectory enumeration", "[mdp]") {
    SECTION("mountain_race: four dynamics-positive trajectories") {
        const auto trajs = enumerate_trajectories(make_mountain_race());
        REQUIRE(trajs.size() == 4);
        double mass = 0.0;
        for (const auto& et : trajs) {
            REQUIRE(et.trajectory.states.size() == 3);
            REQUIRE(et.trajectory.actions.size() == 2);
            mass += et.dynamics_prob;
        }
        // deterministic dynamics: each action sequence has dynamics weight 1
        REQUIRE(mass == Approx(4.0));
    }
    SECTION("temperature_counter: branching transition masses") {
        const Mdp m = make_temperature_counter();
        const auto trajs = enumerate_trajectories(m);
        REQUIRE(trajs.size() == 4);
        double mass_a1 = 0.0, mass_a2 = 0.0;
        for (const auto& et : trajs)
            (et.trajectory.actions[0] == 0 ? mass_a1 : mass_a2) +=
                et.dynamics_prob;
        REQUIRE(mass_a1 == Approx(1.0));
        REQUIRE(mass_a2 == Approx(1.0));
    }
    SECTION("trajectory rewards") {
        const Mdp m = make_mountain_race();
        const Trajectory gold{{0, 1, 3}, {0, 0}};
        const Trajectory skull{{0, 1, 4}, {0, 1}};
        REQUIRE(trajectory_reward(m, gold) == 0.0);
        REQUIRE(is_log_zero(trajectory_reward(m, skull)));
    }
}

TEST_CASE("enumeration size cap", "[mdp]") {
    Mdp m;
    m.states.assign(12, "");
    for (int i = 0; i < 12; ++i) m.states[i] = "s" + std::to_string(i);
    m.actions = {"a", "b", "c", "d"};
    m.horizon = 12;
    REQUIRE(enumeration_size_bound(m) > 1e7);
    REQUIRE_THROWS_AS(check_enumeration_cap(m), EnumerationCapError);
    REQUIRE_NOTHROW(check_enumeration_cap(make_mountain_race()));
}
