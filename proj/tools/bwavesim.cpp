// bwavesim: command-line front end for the B-wave simulator.

#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "bwave/cli.hpp"

int main(int argc, char **argv) {
    using namespace bwave::cli;

    CLI::App app{"Preferred-frame B-wave simulator and signaling harness"};
    app.require_subcommand(1);
    const std::size_t default_workers = std::max(1U, std::thread::hardware_concurrency());

    ValidateArgs validate;
    auto *validate_cmd = app.add_subcommand("validate", "Check a scenario's geometry and timing conditions");
    validate_cmd->add_option("scenario", validate.path, "Scenario file (JSON)")->required();

    RunArgs run;
    run.workers = default_workers;
    std::uint64_t run_trials = 0;
    std::uint64_t run_seed = 0;
    std::string run_trigger;
    std::string per_trial_out;
    std::string run_json;
    auto *run_cmd = app.add_subcommand("run", "Run a batch of trials and emit counts and estimates as CSV");
    run_cmd->add_option("scenario", run.path, "Scenario file (JSON)")->required();
    auto *trials_opt = run_cmd->add_option("--trials", run_trials, "Override run.trials");
    auto *seed_opt = run_cmd->add_option("--seed", run_seed, "Override run.seed");
    auto *trigger_opt =
        run_cmd->add_option("--trigger", run_trigger, "Override trigger rule")->check(CLI::IsMember({"on", "off",
                                                                                                      "d1prime"}));
    auto *per_trial_opt = run_cmd->add_option("--per-trial-out", per_trial_out, "Write per-trial CSV here");
    auto *json_opt = run_cmd->add_option("--json-out", run_json, "Write the results document here");
    run_cmd->add_flag("--allow-infeasible", run.allow_infeasible, "Run even if validation fails");
    run_cmd->add_option("--workers", run.workers, "Worker threads")->check(CLI::PositiveNumber);

    SweepArgs sweep;
    sweep.workers = default_workers;
    std::uint64_t sweep_trials = 0;
    std::uint64_t sweep_seed = 0;
    auto *sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter and emit p2 against the model");
    sweep_cmd->add_option("scenario", sweep.path, "Scenario file (JSON)")->required();
    sweep_cmd->add_option("--param", sweep.param, "b_deg | pc.theta_deg | v_b | y")->required();
    sweep_cmd->add_option("--from", sweep.from, "First value")->required();
    sweep_cmd->add_option("--to", sweep.to, "Last value")->required();
    sweep_cmd->add_option("--steps", sweep.steps, "Number of points")->required();
    auto *sweep_trials_opt = sweep_cmd->add_option("--trials", sweep_trials, "Trials per point");
    auto *sweep_seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "Seed for every point");
    sweep_cmd->add_option("--workers", sweep.workers, "Worker threads")->check(CLI::PositiveNumber);

    GhzArgs ghz;
    ghz.workers = default_workers;
    std::string ghz_json;
    auto *ghz_cmd = app.add_subcommand("ghz", "Three-party GHZ signaling run");
    ghz_cmd->add_option("--alice", ghz.alice, "Whether Alice measures (on|off)")
        ->check(CLI::IsMember({"on", "off"}));
    ghz_cmd->add_option("--trials", ghz.trials, "Trials");
    ghz_cmd->add_option("--seed", ghz.seed, "Seed");
    ghz_cmd->add_option("-l", ghz.l, "Distance from Alice to Bob and Charlie (m)");
    ghz_cmd->add_option("--ta", ghz.t_a, "Alice's measurement instant (s)");
    ghz_cmd->add_option("--tl", ghz.t_l, "Bob and Charlie's measurement instant (s)");
    ghz_cmd->add_option("-v", ghz.v, "Influence speed (m/s)");
    ghz_cmd->add_option("--c", ghz.c, "Speed of light (m/s)");
    auto *ghz_json_opt = ghz_cmd->add_option("--json-out", ghz_json, "Write the results document here");
    ghz_cmd->add_option("--workers", ghz.workers, "Worker threads")->check(CLI::PositiveNumber);

    DecodeArgs decode;
    decode.workers = default_workers;
    auto *decode_cmd = app.add_subcommand("decode", "Send a random bitstring through the trigger channel");
    decode_cmd->add_option("scenario", decode.path, "Scenario file (JSON)")->required();
    decode_cmd->add_option("--bits", decode.bits, "Message length; one block per bit");
    decode_cmd->add_option("--blocks", decode.block_trials, "Trials per block");
    decode_cmd->add_option("--threshold", decode.threshold, "Decision threshold on p2");
    decode_cmd->add_option("--seed", decode.seed, "Seed for the message and the blocks");
    decode_cmd->add_option("--workers", decode.workers, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*validate_cmd) {
        return cmd_validate(validate, std::cout, std::cerr);
    }
    if (*run_cmd) {
        if (*trials_opt) run.trials = run_trials;
        if (*seed_opt) run.seed = run_seed;
        if (*trigger_opt) run.trigger = run_trigger;
        if (*per_trial_opt) run.per_trial_out = per_trial_out;
        if (*json_opt) run.json_out = run_json;
        return cmd_run(run, std::cout, std::cerr);
    }
    if (*sweep_cmd) {
        if (*sweep_trials_opt) sweep.trials = sweep_trials;
        if (*sweep_seed_opt) sweep.seed = sweep_seed;
        return cmd_sweep(sweep, std::cout, std::cerr);
    }
    if (*ghz_cmd) {
        if (*ghz_json_opt) ghz.json_out = ghz_json;
        return cmd_ghz(ghz, std::cout, std::cerr);
    }
    if (*decode_cmd) {
        return cmd_decode(decode, std::cout, std::cerr);
    }
    return kExitUsage;
}
