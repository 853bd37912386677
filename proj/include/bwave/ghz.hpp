#pragma once

// Three-party finite-speed signaling with a GHZ state. Alice (qubit 0) may
// measure at t_a; Bob and Charlie (qubits 1 and 2) both measure at t_l_meas,
// a distance l away. Alice's influence travels at speed v, so it reaches them
// only if v > l / (t_l_meas - t_a). Bob and Charlie measure at the same
// instant and never influence each other.

#include <array>
#include <cstdint>
#include <optional>

#include "bwave/geometry.hpp"
#include "bwave/random.hpp"

namespace bwave {

struct GhzConfig {
    double l = 0.0;
    double t_a = 0.0;
    double t_l_meas = 0.0;
    double v = 0.0;
    double c = kSpeedOfLight;
    bool alice_measures = true;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless l > 0, t_l_meas > t_a, v > 0 and c > 0.
    void check_invariants() const;
};

struct GhzTrialRecord {
    std::optional<int> a_outcome;
    int b_outcome = 0;
    int c_outcome = 0;
    bool influence_reached = false;
};

/// Strict v > l / (t_l_meas - t_a) > c.
bool validate_ghz_timing(const GhzConfig &cfg);

/// Alice's influence departs at t_a and arrives strictly before t_l_meas.
bool influence_arrives(const GhzConfig &cfg);

GhzTrialRecord ghz_trial(const GhzConfig &cfg, TrialRng &rng);

struct GhzResult {
    double p_same = 0.0;
    double stderr_same = 0.0;
    std::uint64_t n = 0;
    std::uint64_t same = 0;
    /// Joint counts indexed [b][c].
    std::array<std::array<std::uint64_t, 2>, 2> table{};
    std::uint64_t influence_reached = 0;
};

/// Runs cfg.trials trials with per-trial substreams of cfg.seed. Throws
/// std::invalid_argument when cfg.trials is zero.
GhzResult ghz_experiment(const GhzConfig &cfg, std::size_t workers = 1);

}  // namespace bwave
