#pragma once

// Monte Carlo orchestration and inference over trial batches.
//
// Channel labels follow the detectors: "1" is D1 (transmission of photon 1),
// "1p" is D1' (reflection), likewise "2" and "2p" for photon 2.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bwave/engine.hpp"
#include "bwave/geometry.hpp"

namespace bwave {

struct CountsTable {
    std::uint64_t n = 0;
    std::uint64_t c_12 = 0;    // (T, T)
    std::uint64_t c_12p = 0;   // (T, R)
    std::uint64_t c_1p2 = 0;   // (R, T)
    std::uint64_t c_1p2p = 0;  // (R, R)
    std::uint64_t c_bwave_missed = 0;
    std::uint64_t c_pc_activated = 0;

    void add(const TrialRecord &rec);
    CountsTable &operator+=(const CountsTable &rhs);
    bool operator==(const CountsTable &) const = default;
};

struct RunOptions {
    std::size_t workers = 1;
    /// Run scenarios that fail validation (negative tests, sweeps).
    bool allow_infeasible = false;
    /// When set, receives one record per trial in trial order.
    std::vector<TrialRecord> *records = nullptr;
};

/// Runs `n` trials of `cfg`, trial i drawing from substream (seed, i).
/// Counts do not depend on the worker count. Throws InfeasibleScenarioError
/// for an infeasible scenario unless overridden.
CountsTable run_experiment(const ScenarioConfig &cfg, std::uint64_t n, std::uint64_t seed,
                           const RunOptions &options = {});

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

struct ProbabilityEstimates {
    Estimate p12, p12p, p1p2, p1p2p;
    Estimate p1, p1p, p2, p2p;
};

/// Count ratios with binomial standard errors. Throws std::invalid_argument
/// for an empty table.
ProbabilityEstimates estimate_probabilities(const CountsTable &counts);

struct JointProbabilities {
    double p12 = 0.0;
    double p12p = 0.0;
    double p1p2 = 0.0;
    double p1p2p = 0.0;
};

struct Marginals {
    double p1 = 0.0;
    double p1p = 0.0;
    double p2 = 0.0;
    double p2p = 0.0;
};

/// Joint detection probabilities when photon 2 meets analyzer b after a D1
/// detection and the effective analyzer b' after a D1' detection:
/// p12 = sin^2(b - a)/2, p12' = cos^2(b - a)/2, p1'2 = cos^2(b' - a)/2,
/// p1'2' = sin^2(b' - a)/2.
JointProbabilities closed_form_joint(double a, double b, double b_prime);

/// Marginals of closed_form_joint.
Marginals closed_form_marginals(double a, double b, double b_prime);

/// Effective analyzer orientation seen after a B-wave crossed an active
/// Pockels rotator of angle theta. The backward leg applies R(-theta) to the
/// carried state, which is equivalent to turning the analyzer to b + theta.
double effective_b_prime(double b, double pc_rotation);

/// Joint channel probabilities predicted for `cfg` without sampling: each
/// D1 branch's partner state is propagated through the arm unitaries the
/// B-wave would meet, with the Pockels cell active on the branches that
/// trigger it and whose race is won. A missed interception gives 1/4 each.
JointProbabilities model_prediction(const ScenarioConfig &cfg);

class DegenerateTestError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

struct SignalTestResult {
    double z_statistic = 0.0;
    double p_value = 1.0;
    bool reject_null = false;
    double effect = 0.0;  // |p2(on) - p2(off)|
};

/// Pooled two-proportion z-test of p2 between the two tables (two-sided).
/// Throws std::invalid_argument for an empty table and DegenerateTestError
/// when the pooled variance vanishes.
SignalTestResult signaling_test(const CountsTable &counts_on, const CountsTable &counts_off,
                                double significance = 1e-6);

/// Same test on raw successes/trials.
SignalTestResult two_proportion_z_test(std::uint64_t successes_1, std::uint64_t n_1, std::uint64_t successes_2,
                                       std::uint64_t n_2, double significance);

struct DecodeResult {
    std::vector<int> bits;
    std::optional<double> ber;
};

/// bit_i = 1 iff p2-hat of block i is below `threshold` (a triggered block
/// lowers p2). Throws std::invalid_argument for no blocks, an empty block, a
/// threshold outside (0, 1), or a truth vector of the wrong length.
DecodeResult decode_message(const std::vector<CountsTable> &blocks, double threshold,
                            const std::optional<std::vector<int>> &truth = std::nullopt);

inline constexpr std::uint64_t kMaxRequiredTrials = 1'000'000'000ULL;

/// Per-condition sample size for a two-sided pooled two-proportion test:
/// n = [z_{1-alpha/2} sqrt(2 pbar qbar) + z_power sqrt(p1 q1 + p2 q2)]^2 / (p1 - p2)^2,
/// rounded up. Throws std::invalid_argument for degenerate inputs or when
/// the result exceeds kMaxRequiredTrials.
std::uint64_t required_trials(double p_on, double p_off, double alpha, double power);

/// Pearson chi-square independence test on a 2x2 table (1 dof); returns the
/// p-value.
double chi_square_independence_2x2(const std::array<std::array<std::uint64_t, 2>, 2> &table);

}  // namespace bwave
