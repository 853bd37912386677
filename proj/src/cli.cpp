#include "bwave/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "bwave/engine.hpp"
#include "bwave/ghz.hpp"
#include "bwave/harness.hpp"
#include "bwave/scenario_file.hpp"
#include "json.hpp"

namespace bwave::cli {

namespace {

using Json = nlohmann::ordered_json;

class CsvTable {
  public:
    explicit CsvTable(std::ostream &out) : out_(out) { out_ << "name,value,stderr\n"; }

    void count(const std::string &name, std::uint64_t v) { out_ << name << ',' << v << ",\n"; }
    void number(const std::string &name, double v) { out_ << name << ',' << format_number(v) << ",\n"; }
    void estimate(const std::string &name, const Estimate &e) {
        out_ << name << ',' << format_number(e.value) << ',' << format_number(e.std_error) << '\n';
    }
    void text(const std::string &name, const std::string &v) { out_ << name << ',' << v << ",\n"; }

  private:
    std::ostream &out_;
};

/// Loads and converts a scenario, reporting failures as exit codes.
std::optional<ScenarioFile> load(const std::string &path, std::ostream &err, int &code) {
    try {
        ScenarioFile f = load_scenario(path);
        (void)to_config(f);
        return f;
    } catch (const ScenarioParseError &e) {
        err << "parse error: " << e.what() << '\n';
    } catch (const ConfigError &e) {
        err << "invalid scenario: " << e.what() << '\n';
    }
    code = kExitUsage;
    return std::nullopt;
}

void report_violations(const std::vector<Violation> &violations, std::ostream &os) {
    for (const auto &v : violations) {
        os << violation_name(v.kind) << ": " << v.message << '\n';
    }
}

std::string bit_string(const std::vector<int> &bits) {
    std::string s;
    for (int b : bits) {
        s.push_back(b != 0 ? '1' : '0');
    }
    return s;
}

bool write_file(const std::string &path, const std::string &content, std::ostream &err) {
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) {
        err << "cannot write '" << path << "'\n";
        return false;
    }
    return true;
}

Json estimate_json(const Estimate &e, double closed) {
    Json j;
    j["value"] = e.value;
    j["stderr"] = e.std_error;
    j["closed_form"] = closed;
    return j;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

int cmd_validate(const ValidateArgs &args, std::ostream &out, std::ostream &err) {
    int code = kExitOk;
    auto file = load(args.path, err, code);
    if (!file) {
        return code;
    }
    const ScenarioConfig cfg = to_config(*file);
    const auto violations = validate_scenario(cfg);
    if (violations.empty()) {
        out << "OK\n";
        return kExitOk;
    }
    report_violations(violations, out);
    return kExitInfeasible;
}

int cmd_run(const RunArgs &args, std::ostream &out, std::ostream &err) {
    int code = kExitOk;
    auto file = load(args.path, err, code);
    if (!file) {
        return code;
    }
    if (args.trials) {
        file->trials = *args.trials;
    }
    if (args.seed) {
        file->seed = *args.seed;
    }
    if (args.trigger) {
        if (*args.trigger == "on") {
            file->trigger = TriggerRule::Always;
        } else if (*args.trigger == "off") {
            file->trigger = TriggerRule::Never;
        } else if (*args.trigger == "d1prime") {
            file->trigger = TriggerRule::OnReflectionD1Prime;
        } else {
            err << "--trigger must be on, off or d1prime\n";
            return kExitUsage;
        }
    }
    if (file->trials == 0) {
        err << "trials must be at least 1\n";
        return kExitUsage;
    }
    const ScenarioConfig cfg = to_config(*file);
    const auto violations = validate_scenario(cfg);
    if (!violations.empty()) {
        report_violations(violations, err);
        if (!args.allow_infeasible) {
            return kExitInfeasible;
        }
        err << "running infeasible scenario on request\n";
    }

    try {
        std::vector<TrialRecord> records;
        RunOptions options;
        options.workers = args.workers;
        options.allow_infeasible = args.allow_infeasible;
        options.records = args.per_trial_out ? &records : nullptr;
        const CountsTable counts = run_experiment(cfg, file->trials, file->seed, options);
        const ProbabilityEstimates est = estimate_probabilities(counts);
        const JointProbabilities model = model_prediction(cfg);
        const Marginals model_m{model.p12 + model.p12p, model.p1p2 + model.p1p2p, model.p12 + model.p1p2,
                                model.p12p + model.p1p2p};

        const std::pair<const char *, std::pair<Estimate, double>> rows[] = {
            {"p12", {est.p12, model.p12}},   {"p12p", {est.p12p, model.p12p}}, {"p1p2", {est.p1p2, model.p1p2}},
            {"p1p2p", {est.p1p2p, model.p1p2p}}, {"p1", {est.p1, model_m.p1}},     {"p1p", {est.p1p, model_m.p1p}},
            {"p2", {est.p2, model_m.p2}},     {"p2p", {est.p2p, model_m.p2p}},
        };

        std::ostringstream csv;
        CsvTable table(csv);
        table.count("n", counts.n);
        table.count("c_12", counts.c_12);
        table.count("c_12p", counts.c_12p);
        table.count("c_1p2", counts.c_1p2);
        table.count("c_1p2p", counts.c_1p2p);
        table.count("c_bwave_missed", counts.c_bwave_missed);
        table.count("c_pc_activated", counts.c_pc_activated);
        for (const auto &[name, pair] : rows) {
            table.estimate(name, pair.first);
            table.number(std::string(name) + "_closed", pair.second);
        }
        out << csv.str();

        if (args.json_out) {
            const TimingReport times = detection_times(cfg);
            Json doc;
            doc["scenario"] = Json::parse(serialize_scenario(*file));
            doc["counts"] = {{"n", counts.n},
                             {"c_12", counts.c_12},
                             {"c_12p", counts.c_12p},
                             {"c_1p2", counts.c_1p2},
                             {"c_1p2p", counts.c_1p2p},
                             {"c_bwave_missed", counts.c_bwave_missed},
                             {"c_pc_activated", counts.c_pc_activated}};
            Json estimates;
            for (const auto &[name, pair] : rows) {
                estimates[name] = estimate_json(pair.first, pair.second);
            }
            doc["estimates"] = estimates;
            Json timing;
            timing["t1_s"] = times.t1;
            timing["t2_s"] = times.t2;
            timing["t_l_s"] = times.t_l;
            timing["t_b_s"] = times.t_b ? Json(*times.t_b) : Json(nullptr);
            timing["t_catch_s"] = times.t_catch ? Json(*times.t_catch) : Json(nullptr);
            doc["timing"] = timing;
            Json vs = Json::array();
            for (const auto &v : violations) {
                vs.push_back({{"kind", violation_name(v.kind)}, {"message", v.message}});
            }
            doc["violations"] = vs;
            if (!write_file(*args.json_out, doc.dump(2) + "\n", err)) {
                return kExitRuntime;
            }
        }

        if (args.per_trial_out) {
            std::ostringstream trials;
            trials << "trial,ch1,ch2,t1_s,t2_s,pc_activated,bwave_arrived\n";
            for (std::size_t i = 0; i < records.size(); ++i) {
                const TrialRecord &r = records[i];
                trials << i << ',' << channel_letter(r.ch1) << ',' << channel_letter(r.ch2) << ','
                       << format_number(r.t1) << ',' << format_number(r.t2) << ',' << (r.pc_activated ? 1 : 0) << ','
                       << (r.bwave_arrived ? 1 : 0) << '\n';
            }
            if (!write_file(*args.per_trial_out, trials.str(), err)) {
                return kExitRuntime;
            }
        }
    } catch (const std::exception &e) {
        err << "run failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_sweep(const SweepArgs &args, std::ostream &out, std::ostream &err) {
    int code = kExitOk;
    auto file = load(args.path, err, code);
    if (!file) {
        return code;
    }
    if (args.param != "b_deg" && args.param != "pc.theta_deg" && args.param != "v_b" && args.param != "y") {
        err << "unknown sweep parameter '" << args.param << "' (expected b_deg, pc.theta_deg, v_b or y)\n";
        return kExitUsage;
    }
    if (args.steps <= 0) {
        err << "--steps must be at least 1\n";
        return kExitUsage;
    }
    if (args.param == "pc.theta_deg" && !file->pc.theta_deg) {
        err << "Pockels cell kind '" << file->pc.kind << "' has no theta_deg to sweep\n";
        return kExitUsage;
    }
    if (args.param == "v_b" && file->bwave_mode != BWaveMode::Finite) {
        err << "v_b can only be swept for a finite B-wave speed\n";
        return kExitUsage;
    }
    if (!std::isfinite(args.from) || !std::isfinite(args.to)) {
        err << "--from and --to must be finite\n";
        return kExitUsage;
    }
    const std::uint64_t trials = args.trials.value_or(file->trials);
    const std::uint64_t seed = args.seed.value_or(file->seed);
    if (trials == 0) {
        err << "trials must be at least 1\n";
        return kExitUsage;
    }

    std::ostringstream csv;
    csv << args.param << ",p2,p2_stderr,p2_closed,feasible,violations\n";
    try {
        for (std::int64_t k = 0; k < args.steps; ++k) {
            const double value =
                args.steps == 1 ? args.from
                                : args.from + (args.to - args.from) * static_cast<double>(k) /
                                                  static_cast<double>(args.steps - 1);
            ScenarioFile step = *file;
            if (args.param == "b_deg") {
                step.b_deg = value;
            } else if (args.param == "pc.theta_deg") {
                step.pc.theta_deg = value;
            } else if (args.param == "v_b") {
                step.v_b = value;
            } else {
                step.y = value;
            }
            csv << format_number(value) << ',';
            ScenarioConfig cfg;
            try {
                cfg = to_config(step);
            } catch (const ConfigError &e) {
                csv << ",,,0,InvalidConfig\n";
                err << "step " << k << ": " << e.what() << '\n';
                continue;
            }
            const auto violations = validate_scenario(cfg);
            RunOptions options;
            options.workers = args.workers;
            options.allow_infeasible = true;
            const CountsTable counts = run_experiment(cfg, trials, seed, options);
            const ProbabilityEstimates est = estimate_probabilities(counts);
            const JointProbabilities model = model_prediction(cfg);
            std::string names;
            for (const auto &v : violations) {
                names += names.empty() ? "" : "|";
                names += violation_name(v.kind);
            }
            csv << format_number(est.p2.value) << ',' << format_number(est.p2.std_error) << ','
                << format_number(model.p12 + model.p1p2) << ',' << (violations.empty() ? 1 : 0) << ',' << names
                << '\n';
        }
    } catch (const std::exception &e) {
        err << "sweep failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    out << csv.str();
    return kExitOk;
}

int cmd_ghz(const GhzArgs &args, std::ostream &out, std::ostream &err) {
    if (args.alice != "on" && args.alice != "off") {
        err << "--alice must be on or off\n";
        return kExitUsage;
    }
    if (args.trials == 0) {
        err << "--trials must be at least 1\n";
        return kExitUsage;
    }
    GhzConfig cfg;
    cfg.l = args.l;
    cfg.t_a = args.t_a;
    cfg.t_l_meas = args.t_l;
    cfg.v = args.v;
    cfg.c = args.c;
    cfg.alice_measures = args.alice == "on";
    cfg.trials = args.trials;
    cfg.seed = args.seed;
    bool timing_valid = false;
    try {
        timing_valid = validate_ghz_timing(cfg);
    } catch (const ConfigError &e) {
        err << "invalid GHZ configuration: " << e.what() << '\n';
        return kExitUsage;
    }
    const double needed = cfg.l / (cfg.t_l_meas - cfg.t_a);
    if (cfg.alice_measures && !timing_valid) {
        err << "warning: timing condition v > l/(t_L - t_A) > c fails (v = " << format_number(cfg.v)
            << ", l/(t_L - t_A) = " << format_number(needed) << ", c = " << format_number(cfg.c)
            << "); running as a negative test\n";
    }

    try {
        const GhzResult r = ghz_experiment(cfg, args.workers);
        std::ostringstream csv;
        CsvTable table(csv);
        table.count("n", r.n);
        table.estimate("p_same", {r.p_same, r.stderr_same});
        table.count("same", r.same);
        table.count("b0c0", r.table[0][0]);
        table.count("b0c1", r.table[0][1]);
        table.count("b1c0", r.table[1][0]);
        table.count("b1c1", r.table[1][1]);
        table.count("influence_reached", r.influence_reached);
        table.count("timing_valid", timing_valid ? 1 : 0);
        table.number("l_over_dt", needed);
        table.number("v", cfg.v);
        table.number("c", cfg.c);
        out << csv.str();

        if (args.json_out) {
            Json doc;
            doc["config"] = {{"alice_measures", cfg.alice_measures}, {"l", cfg.l},       {"t_a", cfg.t_a},
                             {"t_l", cfg.t_l_meas},                {"v", cfg.v},       {"c", cfg.c},
                             {"trials", cfg.trials},               {"seed", cfg.seed}};
            doc["timing"] = {{"valid", timing_valid}, {"l_over_dt", needed}, {"influence_arrives",
                                                                               influence_arrives(cfg)}};
            doc["result"] = {{"n", r.n},
                             {"p_same", r.p_same},
                             {"stderr", r.stderr_same},
                             {"same", r.same},
                             {"table", {{r.table[0][0], r.table[0][1]}, {r.table[1][0], r.table[1][1]}}},
                             {"influence_reached", r.influence_reached}};
            if (!write_file(*args.json_out, doc.dump(2) + "\n", err)) {
                return kExitRuntime;
            }
        }
    } catch (const std::exception &e) {
        err << "GHZ run failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_decode(const DecodeArgs &args, std::ostream &out, std::ostream &err) {
    int code = kExitOk;
    auto file = load(args.path, err, code);
    if (!file) {
        return code;
    }
    if (args.bits == 0 || args.block_trials == 0) {
        err << "--bits and --blocks must be at least 1\n";
        return kExitUsage;
    }
    ScenarioConfig on = to_config(*file);
    on.trigger_rule = TriggerRule::OnReflectionD1Prime;
    ScenarioConfig off = on;
    off.trigger_rule = TriggerRule::Never;

    const auto violations = validate_scenario(on);
    if (!violations.empty()) {
        report_violations(violations, err);
        return kExitInfeasible;
    }
    const JointProbabilities model_on = model_prediction(on);
    const JointProbabilities model_off = model_prediction(off);
    const double p2_on = model_on.p12 + model_on.p1p2;
    const double p2_off = model_off.p12 + model_off.p1p2;
    const double lo = std::min(p2_on, p2_off);
    const double hi = std::max(p2_on, p2_off);
    if (!(args.threshold > lo && args.threshold < hi)) {
        err << "threshold " << format_number(args.threshold) << " is not strictly between the expected p2 values "
            << format_number(lo) << " and " << format_number(hi) << '\n';
        return kExitUsage;
    }
    if (p2_on > p2_off) {
        err << "this scenario raises p2 when triggered; decoding assumes a triggered block lowers it\n";
        return kExitUsage;
    }

    try {
        TrialRng message_rng(substream_seed(args.seed, ~std::uint64_t{0}));
        std::vector<int> sent(args.bits);
        for (auto &b : sent) {
            b = message_rng.fair_bit();
        }
        std::vector<CountsTable> blocks;
        blocks.reserve(sent.size());
        RunOptions options;
        options.workers = args.workers;
        for (std::size_t i = 0; i < sent.size(); ++i) {
            blocks.push_back(run_experiment(sent[i] != 0 ? on : off, args.block_trials, substream_seed(args.seed, i),
                                            options));
        }
        const DecodeResult decoded = decode_message(blocks, args.threshold, sent);
        std::size_t errors = 0;
        for (std::size_t i = 0; i < sent.size(); ++i) {
            errors += sent[i] != decoded.bits[i] ? 1 : 0;
        }
        std::ostringstream csv;
        CsvTable table(csv);
        table.count("bits", args.bits);
        table.count("trials_per_block", args.block_trials);
        table.number("threshold", args.threshold);
        table.number("p2_on_expected", p2_on);
        table.number("p2_off_expected", p2_off);
        table.text("sent", bit_string(sent));
        table.text("decoded", bit_string(decoded.bits));
        table.count("errors", errors);
        table.number("ber", *decoded.ber);
        out << csv.str();
    } catch (const std::exception &e) {
        err << "decode failed: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace bwave::cli
