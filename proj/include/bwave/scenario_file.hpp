#pragma once

// JSON scenario files. Angles are stored in degrees exactly as written and
// converted to radians (multiplication by pi/180) when building a
// ScenarioConfig, so parse -> serialize -> parse is lossless.
//
//   {
//     "geometry": {"x_a": 1, "y": 5.49945, "x_b": 20, "x": 0.001},
//     "speeds":   {"c": 299792458, "v_b": 2997924580000},
//     "optics":   {"a_deg": 0, "b_deg": 0,
//                  "pc": {"kind": "rotator", "theta_deg": 45},
//                  "extra_elements": [{"arm": 2, "kind": "hwp",
//                                      "theta_deg": 10, "position": 3}]},
//     "trigger":  {"rule": "d1prime"},
//     "run":      {"trials": 1000000, "seed": 1}
//   }
//
// "v_b" may also be "instantaneous" or "none". Element kinds are "rotator",
// "hwp", "unitary" (with "matrix": [[[re, im], [re, im]], [[re, im], [re, im]]])
// and, for the Pockels cell only, "identity". Trigger rules are "d1prime",
// "never" and "always". Unknown keys are rejected.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwave/geometry.hpp"

namespace bwave {

class ScenarioParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct OpticSpec {
    std::string kind;
    std::optional<double> theta_deg;
    std::optional<std::array<Complex, 4>> matrix;

    bool operator==(const OpticSpec &) const = default;
};

struct ElementSpec {
    int arm = 1;
    OpticSpec optic;
    double position = 0.0;

    bool operator==(const ElementSpec &) const = default;
};

struct ScenarioFile {
    double x_a = 0.0;
    double y = 0.0;
    double x_b = 0.0;
    double x = 0.0;
    double c = kSpeedOfLight;
    BWaveMode bwave_mode = BWaveMode::Finite;
    double v_b = 0.0;  // meaningful in finite mode only
    double a_deg = 0.0;
    double b_deg = 0.0;
    OpticSpec pc;
    std::vector<ElementSpec> extra_elements;
    TriggerRule trigger = TriggerRule::OnReflectionD1Prime;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;

    bool operator==(const ScenarioFile &) const = default;
};

/// Throws ScenarioParseError with a line/column or key-path diagnostic.
ScenarioFile parse_scenario(const std::string &text);
ScenarioFile load_scenario(const std::string &path);

std::string serialize_scenario(const ScenarioFile &file);

/// Throws ScenarioParseError for unusable optics (unknown kind, missing
/// angle, non-unitary matrix) and ConfigError for broken invariants.
ScenarioConfig to_config(const ScenarioFile &file);

/// v_b = 10^4 c, x = 1 mm and y = 1.1 y_min, a = b = 0, a 45 degree Pockels
/// rotator triggered from D1'.
ScenarioFile default_scenario();

const char *trigger_rule_name(TriggerRule rule);

}  // namespace bwave
