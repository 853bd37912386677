#include "bwave/scenario_file.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace bwave {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string &path, const std::string &what) {
    throw ScenarioParseError("key '" + path + "': " + what);
}

std::string join(const std::string &path, const std::string &key) { return path.empty() ? key : path + "." + key; }

const Json &object_at(const Json &parent, const std::string &key, const std::string &path,
                      std::initializer_list<const char *> allowed) {
    const std::string here = join(path, key);
    if (!parent.contains(key)) {
        fail(here, "missing");
    }
    const Json &node = parent.at(key);
    if (!node.is_object()) {
        fail(here, "expected an object");
    }
    for (const auto &item : node.items()) {
        bool known = false;
        for (const char *name : allowed) {
            known = known || item.key() == name;
        }
        if (!known) {
            fail(join(here, item.key()), "unknown key");
        }
    }
    return node;
}

double number_at(const Json &node, const std::string &key, const std::string &path) {
    const std::string here = join(path, key);
    if (!node.contains(key)) {
        fail(here, "missing");
    }
    if (!node.at(key).is_number()) {
        fail(here, "expected a number");
    }
    return node.at(key).get<double>();
}

std::uint64_t unsigned_at(const Json &node, const std::string &key, const std::string &path) {
    const std::string here = join(path, key);
    if (!node.contains(key)) {
        fail(here, "missing");
    }
    if (!node.at(key).is_number_unsigned()) {
        fail(here, "expected a non-negative integer");
    }
    return node.at(key).get<std::uint64_t>();
}

std::string string_at(const Json &node, const std::string &key, const std::string &path) {
    const std::string here = join(path, key);
    if (!node.contains(key)) {
        fail(here, "missing");
    }
    if (!node.at(key).is_string()) {
        fail(here, "expected a string");
    }
    return node.at(key).get<std::string>();
}

std::array<Complex, 4> parse_matrix(const Json &node, const std::string &path) {
    auto bad = [&] { fail(path, "expected [[[re, im], [re, im]], [[re, im], [re, im]]]"); };
    if (!node.is_array() || node.size() != 2) {
        bad();
    }
    std::array<Complex, 4> m{};
    for (std::size_t r = 0; r < 2; ++r) {
        const Json &row = node[r];
        if (!row.is_array() || row.size() != 2) {
            bad();
        }
        for (std::size_t c = 0; c < 2; ++c) {
            const Json &z = row[c];
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
                bad();
            }
            m[r * 2 + c] = Complex{z[0].get<double>(), z[1].get<double>()};
        }
    }
    return m;
}

OpticSpec parse_optic(const Json &node, const std::string &path) {
    OpticSpec spec;
    spec.kind = string_at(node, "kind", path);
    if (spec.kind == "rotator" || spec.kind == "hwp") {
        spec.theta_deg = number_at(node, "theta_deg", path);
        if (node.contains("matrix")) {
            fail(join(path, "matrix"), "only valid for kind 'unitary'");
        }
    } else if (spec.kind == "unitary") {
        if (!node.contains("matrix")) {
            fail(join(path, "matrix"), "missing");
        }
        if (node.contains("theta_deg")) {
            fail(join(path, "theta_deg"), "not valid for kind 'unitary'");
        }
        spec.matrix = parse_matrix(node.at("matrix"), join(path, "matrix"));
    } else if (spec.kind == "identity") {
        if (node.contains("theta_deg") || node.contains("matrix")) {
            fail(path, "kind 'identity' takes no parameters");
        }
    } else {
        fail(join(path, "kind"), "unknown element kind '" + spec.kind + "'");
    }
    return spec;
}

Json optic_json(const OpticSpec &spec) {
    Json j;
    j["kind"] = spec.kind;
    if (spec.theta_deg) {
        j["theta_deg"] = *spec.theta_deg;
    }
    if (spec.matrix) {
        Json rows = Json::array();
        for (std::size_t r = 0; r < 2; ++r) {
            Json row = Json::array();
            for (std::size_t c = 0; c < 2; ++c) {
                const Complex z = (*spec.matrix)[r * 2 + c];
                row.push_back(Json::array({z.real(), z.imag()}));
            }
            rows.push_back(row);
        }
        j["matrix"] = rows;
    }
    return j;
}

ElementKind element_kind(const OpticSpec &spec, bool pockels) {
    const double deg_to_rad = kPi / 180.0;
    if (spec.kind == "rotator") {
        const double rad = *spec.theta_deg * deg_to_rad;
        return pockels ? ElementKind{PockelsRotator{rad}} : ElementKind{Rotator{rad}};
    }
    if (spec.kind == "hwp") {
        return HalfWavePlate{*spec.theta_deg * deg_to_rad};
    }
    if (spec.kind == "unitary") {
        return CustomUnitary{*spec.matrix};
    }
    return Rotator{0.0};
}

}  // namespace

const char *trigger_rule_name(TriggerRule rule) {
    switch (rule) {
    case TriggerRule::OnReflectionD1Prime:
        return "d1prime";
    case TriggerRule::Never:
        return "never";
    case TriggerRule::Always:
        return "always";
    }
    return "unknown";
}

ScenarioFile parse_scenario(const std::string &text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw ScenarioParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) {
        fail("<root>", "expected an object");
    }
    for (const auto &item : root.items()) {
        const std::string &k = item.key();
        if (k != "geometry" && k != "speeds" && k != "optics" && k != "trigger" && k != "run") {
            fail(k, "unknown key");
        }
    }

    ScenarioFile f;
    const Json &geometry = object_at(root, "geometry", "", {"x_a", "y", "x_b", "x"});
    f.x_a = number_at(geometry, "x_a", "geometry");
    f.y = number_at(geometry, "y", "geometry");
    f.x_b = number_at(geometry, "x_b", "geometry");
    f.x = number_at(geometry, "x", "geometry");

    const Json &speeds = object_at(root, "speeds", "", {"c", "v_b"});
    f.c = number_at(speeds, "c", "speeds");
    if (!speeds.contains("v_b")) {
        fail("speeds.v_b", "missing");
    }
    const Json &vb = speeds.at("v_b");
    if (vb.is_number()) {
        f.bwave_mode = BWaveMode::Finite;
        f.v_b = vb.get<double>();
    } else if (vb.is_string() && vb.get<std::string>() == "instantaneous") {
        f.bwave_mode = BWaveMode::Instantaneous;
    } else if (vb.is_string() && vb.get<std::string>() == "none") {
        f.bwave_mode = BWaveMode::None;
    } else {
        fail("speeds.v_b", "expected a number, \"instantaneous\" or \"none\"");
    }

    const Json &optics = object_at(root, "optics", "", {"a_deg", "b_deg", "pc", "extra_elements"});
    f.a_deg = number_at(optics, "a_deg", "optics");
    f.b_deg = number_at(optics, "b_deg", "optics");
    f.pc = parse_optic(object_at(optics, "pc", "optics", {"kind", "theta_deg", "matrix"}), "optics.pc");
    if (optics.contains("extra_elements")) {
        const Json &list = optics.at("extra_elements");
        if (!list.is_array()) {
            fail("optics.extra_elements", "expected an array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = "optics.extra_elements[" + std::to_string(i) + "]";
            const Json &el = list[i];
            if (!el.is_object()) {
                fail(path, "expected an object");
            }
            for (const auto &item : el.items()) {
                const std::string &k = item.key();
                if (k != "arm" && k != "kind" && k != "theta_deg" && k != "matrix" && k != "position") {
                    fail(join(path, k), "unknown key");
                }
            }
            ElementSpec spec;
            const std::uint64_t arm = unsigned_at(el, "arm", path);
            if (arm != 1 && arm != 2) {
                fail(join(path, "arm"), "must be 1 or 2");
            }
            spec.arm = static_cast<int>(arm);
            spec.optic = parse_optic(el, path);
            if (spec.optic.kind == "identity") {
                fail(join(path, "kind"), "'identity' is only valid for the Pockels cell");
            }
            spec.position = number_at(el, "position", path);
            f.extra_elements.push_back(spec);
        }
    }

    const Json &trigger = object_at(root, "trigger", "", {"rule"});
    const std::string rule = string_at(trigger, "rule", "trigger");
    if (rule == "d1prime") {
        f.trigger = TriggerRule::OnReflectionD1Prime;
    } else if (rule == "never") {
        f.trigger = TriggerRule::Never;
    } else if (rule == "always") {
        f.trigger = TriggerRule::Always;
    } else {
        fail("trigger.rule", "expected \"d1prime\", \"never\" or \"always\"");
    }

    const Json &run = object_at(root, "run", "", {"trials", "seed"});
    f.trials = unsigned_at(run, "trials", "run");
    f.seed = unsigned_at(run, "seed", "run");
    return f;
}

ScenarioFile load_scenario(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioParseError("cannot open scenario file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioFile &f) {
    Json root;
    root["geometry"] = {{"x_a", f.x_a}, {"y", f.y}, {"x_b", f.x_b}, {"x", f.x}};
    Json speeds;
    speeds["c"] = f.c;
    switch (f.bwave_mode) {
    case BWaveMode::Finite:
        speeds["v_b"] = f.v_b;
        break;
    case BWaveMode::Instantaneous:
        speeds["v_b"] = "instantaneous";
        break;
    case BWaveMode::None:
        speeds["v_b"] = "none";
        break;
    }
    root["speeds"] = speeds;
    Json optics;
    optics["a_deg"] = f.a_deg;
    optics["b_deg"] = f.b_deg;
    optics["pc"] = optic_json(f.pc);
    Json extras = Json::array();
    for (const auto &el : f.extra_elements) {
        Json j;
        j["arm"] = el.arm;
        const Json optic = optic_json(el.optic);
        for (const auto &item : optic.items()) {
            j[item.key()] = item.value();
        }
        j["position"] = el.position;
        extras.push_back(j);
    }
    optics["extra_elements"] = extras;
    root["optics"] = optics;
    root["trigger"] = {{"rule", trigger_rule_name(f.trigger)}};
    root["run"] = {{"trials", f.trials}, {"seed", f.seed}};
    return root.dump(2) + "\n";
}

ScenarioConfig to_config(const ScenarioFile &f) {
    ScenarioConfig cfg;
    cfg.x_a = f.x_a;
    cfg.y = f.y;
    cfg.x_b = f.x_b;
    cfg.x = f.x;
    cfg.c = f.c;
    cfg.bwave_mode = f.bwave_mode;
    cfg.v_b = f.v_b;
    cfg.a = AnalyzerOrientation::from_degrees(f.a_deg);
    cfg.b = AnalyzerOrientation::from_degrees(f.b_deg);
    try {
        cfg.pc = f.pc.kind == "identity" ? JonesOperator::identity() : make_element(element_kind(f.pc, true));
        for (std::size_t i = 0; i < f.extra_elements.size(); ++i) {
            const ElementSpec &el = f.extra_elements[i];
            cfg.elements.push_back({el.arm == 1 ? Arm::First : Arm::Second, el.position,
                                    make_element(element_kind(el.optic, false))});
        }
    } catch (const NonUnitaryError &e) {
        throw ScenarioParseError(std::string("optics: ") + e.what());
    }
    cfg.trigger_rule = f.trigger;
    cfg.trials = f.trials;
    cfg.seed = f.seed;
    cfg.check_invariants();
    return cfg;
}

ScenarioFile default_scenario() {
    ScenarioFile f;
    f.x_a = 1.0;
    f.x = 0.001;
    f.c = kSpeedOfLight;
    f.bwave_mode = BWaveMode::Finite;
    f.v_b = 1e4 * kSpeedOfLight;
    f.y = 1.1 * ((f.v_b - f.c) / f.c * (f.x / 2.0));
    f.x_b = 20.0;
    f.a_deg = 0.0;
    f.b_deg = 0.0;
    f.pc = OpticSpec{"rotator", 45.0, std::nullopt};
    f.trigger = TriggerRule::OnReflectionD1Prime;
    f.trials = 1'000'000;
    f.seed = 1;
    return f;
}

}  // namespace bwave
