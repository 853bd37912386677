#pragma once

// Preferred-frame layout of the two-photon experiment and its timing algebra.
//
// Arm 1 runs from the source S through the Pockels cell, a detour of height
// y (adding 2y of path), to the analyzer with detectors D1 (transmission) and
// D1' (reflection). Its path length is x_a + 2y. The Pockels cell sits x + 2y
// of path before D1, so its path coordinate from S is x_a - x. The trigger
// signal from D1' to the cell runs the straight distance x at speed c.
// Arm 2 runs from S to the analyzer b with detectors D2 and D2' at distance
// x_b.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwave/polarization.hpp"

namespace bwave {

inline constexpr double kSpeedOfLight = 299792458.0;

class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

enum class TriggerRule : std::uint8_t { OnReflectionD1Prime, Never, Always };

enum class BWaveMode : std::uint8_t { Finite, Instantaneous, None };

enum class Arm : std::uint8_t { First = 1, Second = 2 };

/// Static optical element at a path coordinate (m, measured from S).
struct PlacedElement {
    Arm arm = Arm::First;
    double position = 0.0;
    JonesOperator op;
};

struct ScenarioConfig {
    double x_a = 0.0;
    double y = 0.0;
    double x_b = 0.0;
    double x = 0.0;
    double c = kSpeedOfLight;
    double v_b = 0.0;
    BWaveMode bwave_mode = BWaveMode::Finite;
    AnalyzerOrientation a;
    AnalyzerOrientation b;
    /// Pockels-cell action while active; the idle cell is the identity.
    JonesOperator pc;
    TriggerRule trigger_rule = TriggerRule::OnReflectionD1Prime;
    std::vector<PlacedElement> elements;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;

    double arm1_length() const { return x_a + 2.0 * y; }
    double pc_position() const { return x_a - x; }

    /// Throws ConfigError naming the first broken invariant: positive finite
    /// lengths and c, v_b > c in finite mode, x <= x_a, elements inside their
    /// arm.
    void check_invariants() const;
};

struct TimingReport {
    double t1 = 0.0;  // detection of photon 1
    double t2 = 0.0;  // detection of photon 2
    double t_l = 0.0;
    std::optional<double> t_b;
    std::optional<double> t_catch;
    /// Path coordinate on arm 2 where the B-wave meets photon 2.
    std::optional<double> catch_position;
    bool first_detected_first = false;  // t1 < t2
};

enum class ViolationKind : std::uint8_t { DetectionOrder, RaceViolation, NoCatch };

struct Violation {
    ViolationKind kind;
    std::string message;
};

const char *violation_name(ViolationKind kind);

/// x / c.
double light_signal_time(const ScenarioConfig &cfg);

/// (x + 2y) / v_b. Throws std::domain_error outside finite mode.
double bwave_transit_time(const ScenarioConfig &cfg);

/// Strict light_signal_time < bwave_transit_time. Finite mode only.
bool race_ok(const ScenarioConfig &cfg);

/// (v_b - c) x / (2c). Finite mode only.
double min_detour(const ScenarioConfig &cfg);

TimingReport detection_times(const ScenarioConfig &cfg);

/// Empty iff the configuration is feasible. Race and interception checks
/// apply only to modes where a B-wave exists with the relevant speed.
std::vector<Violation> validate_scenario(const ScenarioConfig &cfg);

}  // namespace bwave
