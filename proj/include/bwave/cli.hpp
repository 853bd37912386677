#pragma once

// Subcommands behind the bwavesim executable. Each returns the process exit
// code and writes results to `out` and diagnostics to `err`.
//
// Exit codes: 0 success, 1 usage or parse error, 2 infeasible scenario,
// 3 runtime failure.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "bwave/geometry.hpp"

namespace bwave::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitRuntime = 3;

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

struct ValidateArgs {
    std::string path;
};
int cmd_validate(const ValidateArgs &args, std::ostream &out, std::ostream &err);

struct RunArgs {
    std::string path;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    /// "on" (any detection), "off" (never) or "d1prime".
    std::optional<std::string> trigger;
    std::optional<std::string> per_trial_out;
    std::optional<std::string> json_out;
    bool allow_infeasible = false;
    std::size_t workers = 1;
};
int cmd_run(const RunArgs &args, std::ostream &out, std::ostream &err);

struct SweepArgs {
    std::string path;
    std::string param;  // b_deg | pc.theta_deg | v_b | y
    double from = 0.0;
    double to = 0.0;
    std::int64_t steps = 0;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
};
int cmd_sweep(const SweepArgs &args, std::ostream &out, std::ostream &err);

struct GhzArgs {
    std::string alice = "on";  // on | off
    std::uint64_t trials = 10'000;
    std::uint64_t seed = 1;
    double l = 6e5;
    double t_a = 0.0;
    double t_l = 1e-3;
    double v = 3.0 * kSpeedOfLight;
    double c = kSpeedOfLight;
    std::optional<std::string> json_out;
    std::size_t workers = 1;
};
int cmd_ghz(const GhzArgs &args, std::ostream &out, std::ostream &err);

struct DecodeArgs {
    std::string path;
    std::uint64_t bits = 32;
    /// Trials per block; one block carries one bit.
    std::uint64_t block_trials = 10'000;
    double threshold = 0.375;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
};
int cmd_decode(const DecodeArgs &args, std::ostream &out, std::ostream &err);

}  // namespace bwave::cli
