// ===========================================================================
// Unit tests: soft Q/V recursion, enumeration oracle, limit policy,
// deterministic trajectory factorization
// ===========================================================================
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mdptk/mdp.hpp"
#include "mdptk/policy.hpp"
#include "mdptk/random_mdp.hpp"
#include "mdptk/soft_values.hpp"

using Catch::Approx;
using namespace mdptk;

TEST_CASE("soft values on the race (uniform policy)", "[soft]") {
    const Mdp m = make_mountain_race();
    const SoftValues sv = soft_values(m, uniform_policy(m));
    const int start = m.state_index("start");
    const int mountain = m.state_index("mountain");
    const int forest = m.state_index("forest");
    // exp Q is the chance the goal is reached from (t, s, a)
    REQUIRE(prob_from_log(sv.q[0][start][0]) == Approx(0.5).margin(1e-12));
    REQUIRE(prob_from_log(sv.q[0][start][1]) == Approx(0.75).margin(1e-12));
    REQUIRE(prob_from_log(sv.v[0][start]) == Approx(5.0 / 8.0).margin(1e-12));
    REQUIRE(prob_from_log(sv.v[1][mountain]) == Approx(0.5).margin(1e-12));
    REQUIRE(prob_from_log(sv.q[1][mountain][0]) == Approx(1.0).margin(1e-12));
    REQUIRE(is_log_zero(sv.q[1][mountain][1]));  // skull
    REQUIRE(prob_from_log(sv.v[1][forest]) == Approx(0.75).margin(1e-12));
    // boundary: V at the horizon is the terminal reward
    REQUIRE(sv.v[2][m.state_index("gold")] == 0.0);
    REQUIRE(is_log_zero(sv.v[2][m.state_index("skull")]));
}

TEST_CASE("soft values on the counter (uniform policy)", "[soft]") {
    const Mdp m = make_temperature_counter();
    const SoftValues sv = soft_values(m, uniform_policy(m));
    REQUIRE(prob_from_log(sv.q[0][0][0]) == Approx(5.0 / 12.0).margin(1e-12));
    REQUIRE(prob_from_log(sv.q[0][0][1]) == Approx(0.5).margin(1e-12));
    REQUIRE(prob_from_log(sv.v[0][0]) == Approx(11.0 / 24.0).margin(1e-12));
}

TEST_CASE("reward tables scale in the log domain", "[soft]") {
    const Mdp m = make_mountain_race();
    const RewardTable r2 = scaled_rewards(m, 2.0);
    const int silver = m.state_index("silver_left");
    REQUIRE(r2.terminal[silver] == Approx(2.0 * std::log(0.75)).margin(1e-15));
    REQUIRE(is_log_zero(r2.terminal[m.state_index("skull")]));  // 2 * -inf
    REQUIRE(r2.terminal[m.state_index("gold")] == 0.0);
}

TEST_CASE("recursion matches the suffix enumeration oracle", "[soft][oracle]") {
    SECTION("builtins under the uniform policy") {
        for (const char* name :
             {"mountain_race", "temperature_counter", "stability_tree"}) {
            const Mdp m = builtin_example(name);
            const auto rep = oracle_check_qv(m, uniform_policy(m));
            INFO(name << " worst at t=" << rep.worst_t);
            REQUIRE(rep.checked > 0);
            REQUIRE(rep.max_gap <= 1e-12);
        }
    }
    SECTION("random models under random policies") {
        for (int i = 0; i < 30; ++i) {
            RandomMdpConfig rc;
            rc.seed = 300 + i;
            rc.deterministic = (i % 2 == 0);
            rc.allow_zero_success = true;
            const Mdp m = random_layered_mdp(rc);
            const auto rep = oracle_check_qv(m, random_policy(m, 400 + i));
            INFO("seed " << rc.seed);
            REQUIRE(rep.max_gap <= 1e-9);
        }
    }
}

TEST_CASE("limit policy is the greedy collapse of the soft values", "[soft]") {
    const Mdp m = make_mountain_race();
    SECTION("unique maximizer becomes a point mass") {
        const Policy lim = limit_policy(m, uniform_policy(m));
        // down (3/4) beats up (1/2) at the root under the uniform policy
        REQUIRE(lim.rows[0][0][0] == 0.0);
        REQUIRE(lim.rows[0][0][1] == 1.0);
        // at the mountain, up (gold) beats down (skull)
        REQUIRE(lim.rows[1][m.state_index("mountain")][0] == 1.0);
    }
    SECTION("ties share mass uniformly") {
        // at the forest both silvers pay 3/4
        const Policy lim = limit_policy(m, uniform_policy(m));
        REQUIRE(lim.rows[1][m.state_index("forest")][0] == Approx(0.5));
        REQUIRE(lim.rows[1][m.state_index("forest")][1] == Approx(0.5));
    }
    SECTION("rows with no achievable goal stay uniform") {
        const Policy lim = limit_policy(m, uniform_policy(m));
        const int skull = m.state_index("skull");
        REQUIRE(lim.rows[1][skull][0] == Approx(0.5));
        REQUIRE(lim.rows[1][skull][1] == Approx(0.5));
    }
}

TEST_CASE("deterministic trajectory factorization", "[soft]") {
    SECTION("holds on the race") {
        const Mdp m = make_mountain_race();
        const auto rep =
            check_deterministic_factorization(m, uniform_policy(m));
        REQUIRE_FALSE(rep.degenerate);
        REQUIRE(rep.trajectories > 0);
        REQUIRE(rep.max_gap <= 1e-12);
    }
    SECTION("holds under a skewed policy") {
        const Mdp m = make_mountain_race();
        const auto rep =
            check_deterministic_factorization(m, random_policy(m, 5));
        REQUIRE(rep.max_gap <= 1e-12);
    }
    SECTION("refuses stochastic dynamics") {
        const Mdp m = make_temperature_counter();
        REQUIRE_THROWS_AS(
            check_deterministic_factorization(m, uniform_policy(m)),
            PreconditionError);
    }
    SECTION("random deterministic models") {
        for (int i = 0; i < 25; ++i) {
            RandomMdpConfig rc;
            rc.seed = 500 + i;
            rc.deterministic = true;
            rc.allow_zero_success = true;
            const Mdp m = random_layered_mdp(rc);
            const auto rep =
                check_deterministic_factorization(m, random_policy(m, 600 + i));
            INFO("seed " << rc.seed);
            REQUIRE(rep.max_gap <= 1e-9);
        }
    }
}
