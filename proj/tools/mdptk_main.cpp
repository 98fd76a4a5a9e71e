/**
 * Command-line front end for the MDP toolkit.
 *
 * Subcommands:
 *   validate   check an MDP document against the model invariants
 *   iterate    run a retraining operator and emit a CSV trace
 *   verify     run one numerical verification suite
 *   examples   recompute the worked example values and compare
 *   stability  evaluate depth-n plan stability (or the conflict demo)
 *
 * Exit codes: 0 pass, 1 assertion/validation failure, 2 usage error,
 * 3 enumeration cap exceeded.
 */
#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "mdptk/run.hpp"

namespace {

void add_mdp_source(CLI::App* cmd, mdptk::RunConfig& cfg) {
    cmd->add_option("--mdp", cfg.mdp_file, "path to an MDP JSON document");
    cmd->add_option("--builtin", cfg.builtin,
                    "builtin example name (mountain_race | temperature_counter "
                    "| stability_tree)");
}

void add_steps(CLI::App* cmd, mdptk::RunConfig& cfg) {
    auto* opt = cmd->add_option("--steps", cfg.steps,
                                "number of operator applications");
    cmd->parse_complete_callback(
        [&cfg, opt] { cfg.steps_set = opt->count() > 0; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabular MDP toolkit: goal conditioning, incoherence, "
                 "retraining operators"};
    app.require_subcommand(1);
    mdptk::RunConfig cfg;
    std::string verify_check;

    auto* validate = app.add_subcommand(
        "validate", "check an MDP document against the model invariants");
    add_mdp_source(validate, cfg);

    auto* iterate = app.add_subcommand(
        "iterate", "apply a retraining operator repeatedly, write a CSV trace");
    add_mdp_source(iterate, cfg);
    add_steps(iterate, cfg);
    iterate->add_option("--operator", cfg.op,
                        "operator: G (re-condition) | F (fold) | H (cumulative "
                        "fold) | temp (temperature family) | coherence "
                        "(soft self-consistency)");
    iterate->add_option("--delta", cfg.delta,
                        "softmax sharpness for the incoherence column");
    iterate->add_option("--alpha-schedule", cfg.alpha_schedule,
                        "temperature schedule: pow2 | linear | explicit");
    iterate->add_option("--alpha-list", cfg.alpha_list,
                        "temperatures for the explicit schedule");
    iterate->add_option("--out", cfg.output_path,
                        "CSV output path (default: stdout)");

    auto* verify = app.add_subcommand(
        "verify", "run one numerical verification suite");
    verify->add_option("check", verify_check,
                       "equivalence | equivalence-strict-temp | improvement | "
                       "qv | kl | factorization | rate | convergence | "
                       "stability")
        ->required();
    add_mdp_source(verify, cfg);
    add_steps(verify, cfg);
    verify->add_option("--seed", cfg.seed, "seed for randomized suites");
    verify->add_option("--tol-equivalence", cfg.tol_equivalence,
                       "tolerance for policy-identity checks");
    verify->add_option("--tol-tv", cfg.tol_tv,
                       "threshold for distance-to-limit checks");
    verify->add_option("--tol-kappa", cfg.tol_kappa,
                       "threshold for incoherence-at-limit checks");
    verify->add_option("--tol-oracle", cfg.tol_oracle,
                       "tolerance for recursion-vs-enumeration checks");

    auto* examples = app.add_subcommand(
        "examples", "recompute the worked example values and compare");
    examples->add_flag("--corrupt", cfg.corrupt_builtin,
                       "perturb a builtin value first (negative control)")
        ->group("");  // hidden: test fixture only

    auto* stability = app.add_subcommand(
        "stability", "evaluate depth-n plan stability of the builtin tree "
                     "(default: run the depth-1 vs depth-2 conflict demo)");
    add_mdp_source(stability, cfg);
    add_steps(stability, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version land here with success codes.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed())
            return mdptk::run_validate(cfg, std::cout, std::cerr);
        if (iterate->parsed())
            return mdptk::run_iterate(cfg, std::cout, std::cerr);
        if (verify->parsed())
            return mdptk::run_verify(cfg, verify_check, std::cout, std::cerr);
        if (examples->parsed())
            return mdptk::run_examples(cfg, std::cout, std::cerr);
        if (stability->parsed())
            return mdptk::run_stability(cfg, std::cout, std::cerr);
    } catch (const mdptk::EnumerationCapError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mdptk::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mdptk::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mdptk::PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
