#include "bwave/ghz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>
#include <vector>

#include "bwave/polarization.hpp"

namespace bwave {

void GhzConfig::check_invariants() const {
    if (!(std::isfinite(l) && l > 0.0)) {
        throw ConfigError("l must be positive");
    }
    if (!(std::isfinite(t_a) && std::isfinite(t_l_meas) && t_l_meas > t_a)) {
        std::ostringstream msg;
        msg << "t_L = " << t_l_meas << " must be later than t_A = " << t_a;
        throw ConfigError(msg.str());
    }
    if (!(v > 0.0) || std::isnan(v)) {
        throw ConfigError("v must be positive");
    }
    if (!(std::isfinite(c) && c > 0.0)) {
        throw ConfigError("c must be positive");
    }
}

bool validate_ghz_timing(const GhzConfig &cfg) {
    cfg.check_invariants();
    const double needed = cfg.l / (cfg.t_l_meas - cfg.t_a);
    return cfg.v > needed && needed > cfg.c;
}

bool influence_arrives(const GhzConfig &cfg) {
    cfg.check_invariants();
    return cfg.v > cfg.l / (cfg.t_l_meas - cfg.t_a);
}

namespace {

int sample_bit(TrialRng &rng, double p_one) { return rng.uniform() < p_one ? 1 : 0; }

GhzTrialRecord run_trial(const GhzConfig &cfg, bool reached, TrialRng &rng) {
    static const NQubitState ghz = ghz_state();
    GhzTrialRecord rec;
    rec.influence_reached = reached;
    if (cfg.alice_measures) {
        const int a = sample_bit(rng, ghz.probability(0, 1));
        rec.a_outcome = a;
        if (reached) {
            // Bob and Charlie measure the collapsed pair; the second
            // measurement is conditioned on the first since both act on
            // the same forced state at the same instant.
            const NQubitState pair = measure_qubit(ghz, 0, a).remaining;
            rec.b_outcome = sample_bit(rng, pair.probability(0, 1));
            const NQubitState last = measure_qubit(pair, 0, rec.b_outcome).remaining;
            rec.c_outcome = sample_bit(rng, last.probability(0, 1));
            return rec;
        }
    }
    // No influence reaches the right lab: each outcome follows its own
    // marginal, independently.
    rec.b_outcome = sample_bit(rng, ghz.probability(1, 1));
    rec.c_outcome = sample_bit(rng, ghz.probability(2, 1));
    return rec;
}

}  // namespace

GhzTrialRecord ghz_trial(const GhzConfig &cfg, TrialRng &rng) {
    const bool reached = cfg.alice_measures && influence_arrives(cfg);
    return run_trial(cfg, reached, rng);
}

GhzResult ghz_experiment(const GhzConfig &cfg, std::size_t workers) {
    if (cfg.trials == 0) {
        throw std::invalid_argument("GHZ experiment needs at least one trial");
    }
    const bool reached = cfg.alice_measures && influence_arrives(cfg);
    workers = std::max<std::size_t>(1, std::min<std::uint64_t>(workers, cfg.trials));

    std::vector<GhzResult> partial(workers);
    auto work = [&](std::size_t w) {
        const std::uint64_t begin = cfg.trials * w / workers;
        const std::uint64_t end = cfg.trials * (w + 1) / workers;
        GhzResult &acc = partial[w];
        for (std::uint64_t i = begin; i < end; ++i) {
            TrialRng rng = TrialRng::substream(cfg.seed, i);
            const GhzTrialRecord rec = run_trial(cfg, reached, rng);
            acc.table[rec.b_outcome][rec.c_outcome] += 1;
            acc.influence_reached += rec.influence_reached ? 1 : 0;
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

    GhzResult out;
    for (const auto &p : partial) {
        for (int b = 0; b < 2; ++b) {
            for (int c = 0; c < 2; ++c) {
                out.table[b][c] += p.table[b][c];
            }
        }
        out.influence_reached += p.influence_reached;
    }
    out.n = cfg.trials;
    out.same = out.table[0][0] + out.table[1][1];
    out.p_same = static_cast<double>(out.same) / static_cast<double>(out.n);
    out.stderr_same = std::sqrt(out.p_same * (1.0 - out.p_same) / static_cast<double>(out.n));
    return out;
}

}  // namespace bwave
