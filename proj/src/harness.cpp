#include "bwave/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

namespace bwave {

void CountsTable::add(const TrialRecord &rec) {
    ++n;
    if (rec.ch1 == Channel::Transmitted) {
        ++(rec.ch2 == Channel::Transmitted ? c_12 : c_12p);
    } else {
        ++(rec.ch2 == Channel::Transmitted ? c_1p2 : c_1p2p);
    }
    c_bwave_missed += rec.bwave_arrived ? 0 : 1;
    c_pc_activated += rec.pc_activated ? 1 : 0;
}

CountsTable &CountsTable::operator+=(const CountsTable &rhs) {
    n += rhs.n;
    c_12 += rhs.c_12;
    c_12p += rhs.c_12p;
    c_1p2 += rhs.c_1p2;
    c_1p2p += rhs.c_1p2p;
    c_bwave_missed += rhs.c_bwave_missed;
    c_pc_activated += rhs.c_pc_activated;
    return *this;
}

CountsTable run_experiment(const ScenarioConfig &cfg, std::uint64_t n, std::uint64_t seed,
                           const RunOptions &options) {
    const TrialSimulator sim(cfg, options.allow_infeasible);
    if (options.records != nullptr) {
        options.records->assign(n, TrialRecord{});
    }
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::uint64_t>(options.workers, std::max<std::uint64_t>(n, 1)));

    std::vector<CountsTable> partial(workers);
    auto work = [&](std::size_t w) {
        const std::uint64_t begin = n * w / workers;
        const std::uint64_t end = n * (w + 1) / workers;
        for (std::uint64_t i = begin; i < end; ++i) {
            TrialRng rng = TrialRng::substream(seed, i);
            const TrialRecord rec = sim.run(rng);
            partial[w].add(rec);
            if (options.records != nullptr) {
                (*options.records)[i] = rec;
            }
        }
    };
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < workers; ++w) {
        threads.emplace_back(work, w);
    }
    work(0);
    for (auto &t : threads) {
        t.join();
    }

    CountsTable total;
    for (const auto &p : partial) {
        total += p;
    }
    return total;
}

namespace {

Estimate ratio(std::uint64_t k, std::uint64_t n) {
    const double p = static_cast<double>(k) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

double sin2(double t) {
    const double s = std::sin(t);
    return s * s;
}

double cos2(double t) {
    const double c = std::cos(t);
    return c * c;
}

bool trigger_fires(TriggerRule rule, Channel ch1) {
    return rule == TriggerRule::Always || (rule == TriggerRule::OnReflectionD1Prime && ch1 == Channel::Reflected);
}

}  // namespace

ProbabilityEstimates estimate_probabilities(const CountsTable &counts) {
    if (counts.n == 0) {
        throw std::invalid_argument("cannot estimate probabilities from an empty table");
    }
    if (counts.c_12 + counts.c_12p + counts.c_1p2 + counts.c_1p2p != counts.n) {
        throw std::invalid_argument("channel counts do not sum to n");
    }
    ProbabilityEstimates e;
    e.p12 = ratio(counts.c_12, counts.n);
    e.p12p = ratio(counts.c_12p, counts.n);
    e.p1p2 = ratio(counts.c_1p2, counts.n);
    e.p1p2p = ratio(counts.c_1p2p, counts.n);
    e.p1 = ratio(counts.c_12 + counts.c_12p, counts.n);
    e.p1p = ratio(counts.c_1p2 + counts.c_1p2p, counts.n);
    e.p2 = ratio(counts.c_12 + counts.c_1p2, counts.n);
    e.p2p = ratio(counts.c_12p + counts.c_1p2p, counts.n);
    return e;
}

JointProbabilities closed_form_joint(double a, double b, double b_prime) {
    return {0.5 * sin2(b - a), 0.5 * cos2(b - a), 0.5 * cos2(b_prime - a), 0.5 * sin2(b_prime - a)};
}

Marginals closed_form_marginals(double a, double b, double b_prime) {
    const JointProbabilities j = closed_form_joint(a, b, b_prime);
    return {j.p12 + j.p12p, j.p1p2 + j.p1p2p, j.p12 + j.p1p2, j.p12p + j.p1p2p};
}

double effective_b_prime(double b, double pc_rotation) { return b + pc_rotation; }

JointProbabilities model_prediction(const ScenarioConfig &cfg) {
    cfg.check_invariants();
    const TimingReport times = detection_times(cfg);
    const bool intercepts =
        cfg.bwave_mode != BWaveMode::None && times.t_catch.has_value() && *times.t_catch < times.t2;
    const bool race_won = cfg.bwave_mode == BWaveMode::Finite && race_ok(cfg);

    struct Placed {
        double position;
        JonesOperator op;
        bool is_pc;
    };
    std::vector<Placed> arm1;
    std::vector<Placed> arm2;
    for (const auto &el : cfg.elements) {
        (el.arm == Arm::First ? arm1 : arm2).push_back({el.position, el.op, false});
    }
    arm1.push_back({cfg.pc_position(), cfg.pc, true});
    auto by_position = [](const Placed &l, const Placed &r) { return l.position < r.position; };
    std::stable_sort(arm1.begin(), arm1.end(), by_position);
    std::stable_sort(arm2.begin(), arm2.end(), by_position);

    // Photon 1 always passes the idle cell.
    JonesOperator photon1_path;
    for (const auto &el : arm1) {
        photon1_path = (el.is_pc ? JonesOperator::identity() : el.op) * photon1_path;
    }
    const TwoPhotonState at_detector = apply_jones_to_photon(singlet(), Photon::First, photon1_path);

    std::array<double, 4> p{};
    const Channel channels[] = {Channel::Transmitted, Channel::Reflected};
    for (int i = 0; i < 2; ++i) {
        const double p_first = first_photon_probability(at_detector, cfg.a, channels[i]);
        if (!intercepts || p_first <= kNormTolerance) {
            p[2 * i] = 0.5 * p_first;
            p[2 * i + 1] = 0.5 * p_first;
            continue;
        }
        SinglePhotonState carried = collapse_on_first_detection(singlet(), cfg.a, channels[i]).partner;
        const bool pc_on = race_won && trigger_fires(cfg.trigger_rule, channels[i]);
        for (auto it = arm1.rbegin(); it != arm1.rend(); ++it) {
            const JonesOperator &op = it->is_pc ? (pc_on ? cfg.pc : JonesOperator::identity()) : it->op;
            carried = op.adjoint().apply(carried);
        }
        for (const auto &el : arm2) {
            carried = el.op.apply(carried);
        }
        p[2 * i] = p_first * channel_probability(carried, cfg.b, Channel::Transmitted);
        p[2 * i + 1] = p_first * channel_probability(carried, cfg.b, Channel::Reflected);
    }
    return {p[0], p[1], p[2], p[3]};
}

SignalTestResult two_proportion_z_test(std::uint64_t successes_1, std::uint64_t n_1, std::uint64_t successes_2,
                                       std::uint64_t n_2, double significance) {
    if (n_1 == 0 || n_2 == 0) {
        throw std::invalid_argument("two-proportion test needs non-empty samples");
    }
    if (!(significance > 0.0 && significance < 1.0)) {
        throw std::invalid_argument("significance must lie in (0, 1)");
    }
    const double n1 = static_cast<double>(n_1);
    const double n2 = static_cast<double>(n_2);
    const double p1 = static_cast<double>(successes_1) / n1;
    const double p2 = static_cast<double>(successes_2) / n2;
    const double pooled = static_cast<double>(successes_1 + successes_2) / (n1 + n2);
    const double variance = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2);
    if (!(variance > 0.0)) {
        throw DegenerateTestError("pooled variance is zero: every trial landed in the same channel");
    }
    SignalTestResult r;
    r.z_statistic = (p1 - p2) / std::sqrt(variance);
    r.p_value = std::erfc(std::abs(r.z_statistic) / std::sqrt(2.0));
    r.reject_null = r.p_value < significance;
    r.effect = std::abs(p1 - p2);
    return r;
}

SignalTestResult signaling_test(const CountsTable &counts_on, const CountsTable &counts_off, double significance) {
    return two_proportion_z_test(counts_on.c_12 + counts_on.c_1p2, counts_on.n, counts_off.c_12 + counts_off.c_1p2,
                                 counts_off.n, significance);
}

DecodeResult decode_message(const std::vector<CountsTable> &blocks, double threshold,
                            const std::optional<std::vector<int>> &truth) {
    if (blocks.empty()) {
        throw std::invalid_argument("no blocks to decode");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("decision threshold must lie strictly inside (0, 1)");
    }
    if (truth && truth->size() != blocks.size()) {
        throw std::invalid_argument("ground-truth length differs from the number of blocks");
    }
    DecodeResult out;
    out.bits.reserve(blocks.size());
    for (const auto &block : blocks) {
        if (block.n == 0) {
            throw std::invalid_argument("cannot decode an empty block");
        }
        const double p2 = static_cast<double>(block.c_12 + block.c_1p2) / static_cast<double>(block.n);
        out.bits.push_back(p2 < threshold ? 1 : 0);
    }
    if (truth) {
        std::size_t errors = 0;
        for (std::size_t i = 0; i < out.bits.size(); ++i) {
            errors += out.bits[i] != (*truth)[i] ? 1 : 0;
        }
        out.ber = static_cast<double>(errors) / static_cast<double>(out.bits.size());
    }
    return out;
}

std::uint64_t required_trials(double p_on, double p_off, double alpha, double power) {
    auto in_open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_open_unit(p_on) || !in_open_unit(p_off) || !in_open_unit(alpha) || !in_open_unit(power)) {
        throw std::invalid_argument("proportions, alpha and power must lie in (0, 1)");
    }
    if (p_on == p_off) {
        throw std::invalid_argument("proportions must differ");
    }
    const boost::math::normal standard;
    const double z_alpha = boost::math::quantile(boost::math::complement(standard, alpha / 2.0));
    const double z_power = boost::math::quantile(standard, power);
    const double p_bar = 0.5 * (p_on + p_off);
    const double spread = z_alpha * std::sqrt(2.0 * p_bar * (1.0 - p_bar)) +
                          z_power * std::sqrt(p_on * (1.0 - p_on) + p_off * (1.0 - p_off));
    const double delta = p_on - p_off;
    const double n = spread * spread / (delta * delta);
    if (!(n <= static_cast<double>(kMaxRequiredTrials))) {
        std::ostringstream msg;
        msg << "effect " << std::abs(delta) << " needs more than " << kMaxRequiredTrials << " trials";
        throw std::invalid_argument(msg.str());
    }
    return static_cast<std::uint64_t>(std::ceil(n));
}

double chi_square_independence_2x2(const std::array<std::array<std::uint64_t, 2>, 2> &table) {
    const double n = static_cast<double>(table[0][0] + table[0][1] + table[1][0] + table[1][1]);
    if (n == 0.0) {
        throw std::invalid_argument("empty contingency table");
    }
    double chi2 = 0.0;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const double row = static_cast<double>(table[r][0] + table[r][1]);
            const double col = static_cast<double>(table[0][c] + table[1][c]);
            const double expected = row * col / n;
            if (expected == 0.0) {
                throw DegenerateTestError("contingency table has an empty row or column");
            }
            const double d = static_cast<double>(table[r][c]) - expected;
            chi2 += d * d / expected;
        }
    }
    return std::erfc(std::sqrt(chi2 / 2.0));
}

}  // namespace bwave
