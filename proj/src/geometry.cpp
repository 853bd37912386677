#include "bwave/geometry.hpp"

#include <cmath>
#include <sstream>

namespace bwave {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_finite_mode(const ScenarioConfig &cfg, const char *what) {
    if (cfg.bwave_mode != BWaveMode::Finite) {
        throw std::domain_error(std::string(what) + " is only defined for a finite B-wave speed");
    }
}

}  // namespace

void ScenarioConfig::check_invariants() const {
    const std::pair<const char *, double> lengths[] = {{"x_a", x_a}, {"y", y}, {"x_b", x_b}, {"x", x}, {"c", c}};
    for (const auto &[name, value] : lengths) {
        if (!positive_finite(value)) {
            std::ostringstream msg;
            msg << name << " must be positive and finite (got " << value << ")";
            throw ConfigError(msg.str());
        }
    }
    if (bwave_mode == BWaveMode::Finite && !(std::isfinite(v_b) && v_b > c)) {
        std::ostringstream msg;
        msg << "v_b must exceed c (v_b = " << v_b << ", c = " << c << ")";
        throw ConfigError(msg.str());
    }
    if (x > x_a) {
        std::ostringstream msg;
        msg << "trigger distance x = " << x << " exceeds arm length x_a = " << x_a
            << "; the Pockels cell would lie behind the source";
        throw ConfigError(msg.str());
    }
    for (const auto &el : elements) {
        double limit = el.arm == Arm::First ? arm1_length() : x_b;
        if (!std::isfinite(el.position) || el.position < 0.0 || el.position > limit) {
            std::ostringstream msg;
            msg << "element on arm " << static_cast<int>(el.arm) << " at position " << el.position
                << " lies outside [0, " << limit << "]";
            throw ConfigError(msg.str());
        }
    }
}

const char *violation_name(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::DetectionOrder:
        return "DetectionOrder";
    case ViolationKind::RaceViolation:
        return "RaceViolation";
    case ViolationKind::NoCatch:
        return "NoCatch";
    }
    return "Unknown";
}

double light_signal_time(const ScenarioConfig &cfg) {
    cfg.check_invariants();
    return cfg.x / cfg.c;
}

double bwave_transit_time(const ScenarioConfig &cfg) {
    cfg.check_invariants();
    require_finite_mode(cfg, "B-wave transit time");
    return (cfg.x + 2.0 * cfg.y) / cfg.v_b;
}

bool race_ok(const ScenarioConfig &cfg) { return light_signal_time(cfg) < bwave_transit_time(cfg); }

double min_detour(const ScenarioConfig &cfg) {
    cfg.check_invariants();
    require_finite_mode(cfg, "minimum detour");
    return (cfg.v_b - cfg.c) / cfg.c * (cfg.x / 2.0);
}

TimingReport detection_times(const ScenarioConfig &cfg) {
    cfg.check_invariants();
    TimingReport r;
    const double l1 = cfg.arm1_length();
    r.t1 = l1 / cfg.c;
    r.t2 = cfg.x_b / cfg.c;
    r.t_l = cfg.x / cfg.c;
    r.first_detected_first = r.t1 < r.t2;

    switch (cfg.bwave_mode) {
    case BWaveMode::Finite: {
        r.t_b = (cfg.x + 2.0 * cfg.y) / cfg.v_b;
        // The B-wave leaves S at t_s; photon 2 is then at c * t_s and the gap
        // closes at v_b - c.
        const double t_s = r.t1 + l1 / cfg.v_b;
        const double t_catch = cfg.v_b * t_s / (cfg.v_b - cfg.c);
        const double where = cfg.c * t_catch;
        if (where < cfg.x_b) {
            r.t_catch = t_catch;
            r.catch_position = where;
        }
        break;
    }
    case BWaveMode::Instantaneous:
        if (l1 < cfg.x_b) {
            r.t_catch = r.t1;
            r.catch_position = l1;
        }
        break;
    case BWaveMode::None:
        break;
    }
    return r;
}

std::vector<Violation> validate_scenario(const ScenarioConfig &cfg) {
    std::vector<Violation> out;
    const TimingReport times = detection_times(cfg);
    if (!(cfg.x_b > cfg.arm1_length())) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "x_b = " << cfg.x_b << " must exceed x_a + 2y = " << cfg.arm1_length() << " (t1 = " << times.t1
            << " s, t2 = " << times.t2 << " s)";
        out.push_back({ViolationKind::DetectionOrder, msg.str()});
    }
    if (cfg.bwave_mode == BWaveMode::Finite && !race_ok(cfg)) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "y = " << cfg.y << " must exceed y_min = " << min_detour(cfg) << " (t_l = " << times.t_l
            << " s, t_B = " << *times.t_b << " s)";
        out.push_back({ViolationKind::RaceViolation, msg.str()});
    }
    if (cfg.bwave_mode != BWaveMode::None && !(times.t_catch && *times.t_catch < times.t2)) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "B-wave does not reach photon 2 before its detection at x_b = " << cfg.x_b << " (t2 = " << times.t2
            << " s)";
        out.push_back({ViolationKind::NoCatch, msg.str()});
    }
    return out;
}

}  // namespace bwave
