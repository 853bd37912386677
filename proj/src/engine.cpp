#include "bwave/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bwave {

namespace {

std::string describe(const std::vector<Violation> &violations) {
    std::ostringstream msg;
    msg << "infeasible scenario:";
    for (const auto &v : violations) {
        msg << " [" << violation_name(v.kind) << "] " << v.message << ";";
    }
    return msg.str();
}

bool trigger_fires(TriggerRule rule, Channel ch1) {
    switch (rule) {
    case TriggerRule::OnReflectionD1Prime:
        return ch1 == Channel::Reflected;
    case TriggerRule::Always:
        return true;
    case TriggerRule::Never:
        return false;
    }
    return false;
}

std::vector<ArmElement> sorted_arm(const ScenarioConfig &cfg, Arm arm) {
    std::vector<ArmElement> out;
    for (const auto &el : cfg.elements) {
        if (el.arm == arm) {
            out.push_back({el.position, DeviceTimeline{std::nullopt, el.op, el.op}, false});
        }
    }
    return out;
}

}  // namespace

InfeasibleScenarioError::InfeasibleScenarioError(std::vector<Violation> violations)
    : std::runtime_error(describe(violations)), violations_(std::move(violations)) {}

void EventQueue::schedule(Event ev) {
    if (!std::isfinite(ev.time) || ev.time < now_) {
        std::ostringstream msg;
        msg << "event scheduled at " << ev.time << " s before the current time " << now_ << " s";
        throw std::logic_error(msg.str());
    }
    ev.sequence = next_sequence_++;
    heap_.push(ev);
}

Event EventQueue::pop() {
    Event ev = heap_.top();
    heap_.pop();
    now_ = ev.time;
    return ev;
}

const JonesOperator &DeviceTimeline::at(double t) const { return pc_active_at(*this, t) ? active : idle; }

bool pc_active_at(const DeviceTimeline &timeline, double t) {
    return timeline.activated_at.has_value() && t > *timeline.activated_at;
}

TrialSimulator::TrialSimulator(ScenarioConfig cfg, bool allow_infeasible) : cfg_(std::move(cfg)) {
    cfg_.check_invariants();
    if (!allow_infeasible) {
        auto violations = validate_scenario(cfg_);
        if (!violations.empty()) {
            throw InfeasibleScenarioError(std::move(violations));
        }
    }
    timing_ = detection_times(cfg_);

    arm1_ = sorted_arm(cfg_, Arm::First);
    arm1_.push_back({cfg_.pc_position(), DeviceTimeline{std::nullopt, JonesOperator::identity(), cfg_.pc}, true});
    arm2_ = sorted_arm(cfg_, Arm::Second);
    auto by_position = [](const ArmElement &l, const ArmElement &r) { return l.position < r.position; };
    std::stable_sort(arm1_.begin(), arm1_.end(), by_position);
    std::stable_sort(arm2_.begin(), arm2_.end(), by_position);
    for (std::size_t i = 0; i < arm1_.size(); ++i) {
        if (arm1_[i].is_pockels_cell) {
            pc_index_ = i;
        }
    }
}

double TrialSimulator::bwave_arm1_crossing(double t1, double position) const {
    if (cfg_.bwave_mode == BWaveMode::Instantaneous) {
        return t1;
    }
    return t1 + (cfg_.arm1_length() - position) / cfg_.v_b;
}

double TrialSimulator::bwave_arm2_crossing(double t1, double position) const {
    if (cfg_.bwave_mode == BWaveMode::Instantaneous) {
        return t1;
    }
    return bwave_arm1_crossing(t1, 0.0) + position / cfg_.v_b;
}

TrialRecord TrialSimulator::run(TrialRng &rng, std::vector<TraceEntry> *trace) const {
    const double c = cfg_.c;
    const double t1 = cfg_.arm1_length() / c;
    const double t2 = cfg_.x_b / c;

    EventQueue queue;
    for (std::uint32_t i = 0; i < arm1_.size(); ++i) {
        queue.schedule({arm1_[i].position / c, EventKind::PhotonArrivesAtElement, Arm::First, i});
    }
    for (std::uint32_t j = 0; j < arm2_.size(); ++j) {
        queue.schedule({arm2_[j].position / c, EventKind::PhotonArrivesAtElement, Arm::Second, j});
    }
    // Photon 1 is scheduled first so that equal detection times resolve in
    // particle order.
    queue.schedule({t1, EventKind::Detection, Arm::First, 0});
    queue.schedule({t2, EventKind::Detection, Arm::Second, 0});

    DeviceTimeline pc = arm1_[pc_index_].timeline;
    auto arm1_op = [&](std::uint32_t i, double t) -> const JonesOperator & {
        return i == pc_index_ ? pc.at(t) : arm1_[i].timeline.at(t);
    };

    TrialRecord rec;
    rec.simultaneous_detection = t1 == t2;
    JonesOperator photon1_path;
    std::optional<SinglePhotonState> forced;
    std::vector<std::uint32_t> photon2_pending;
    std::vector<bool> bwave_crossed(arm2_.size(), false);
    BWave wave;
    bool photon2_detected = false;

    while (!queue.empty()) {
        const Event ev = queue.pop();
        if (trace != nullptr) {
            trace->push_back({ev.time, ev.kind, ev.arm});
        }
        switch (ev.kind) {
        case EventKind::PhotonArrivesAtElement:
            if (ev.arm == Arm::First) {
                photon1_path = arm1_op(ev.element, ev.time) * photon1_path;
            } else if (forced) {
                *forced = arm2_[ev.element].timeline.at(ev.time).apply(*forced);
            } else {
                photon2_pending.push_back(ev.element);
            }
            break;

        case EventKind::Detection:
            if (ev.arm == Arm::First) {
                rec.t1 = ev.time;
                const TwoPhotonState at_detector = apply_jones_to_photon(singlet(), Photon::First, photon1_path);
                const double p_t = first_photon_probability(at_detector, cfg_.a, Channel::Transmitted);
                rec.ch1 = rng.uniform() < p_t ? Channel::Transmitted : Channel::Reflected;

                if (trigger_fires(cfg_.trigger_rule, rec.ch1)) {
                    queue.schedule({ev.time + cfg_.x / c, EventKind::TriggerArrivesAtPC, Arm::First,
                                    static_cast<std::uint32_t>(pc_index_)});
                }
                if (cfg_.bwave_mode == BWaveMode::None) {
                    break;
                }
                wave.carried_state = collapse_on_first_detection(singlet(), cfg_.a, rec.ch1).partner;
                wave.position = cfg_.arm1_length();
                wave.leg = BWave::Leg::BackwardOnArm1;
                wave.speed = cfg_.bwave_mode == BWaveMode::Finite ? cfg_.v_b
                                                                   : std::numeric_limits<double>::infinity();
                for (std::size_t k = arm1_.size(); k-- > 0;) {
                    queue.schedule({bwave_arm1_crossing(ev.time, arm1_[k].position), EventKind::BWaveCrossesElement,
                                    Arm::First, static_cast<std::uint32_t>(k)});
                }
                // Interception: the B-wave leaves S at t_s while photon 2 is
                // c * t_s ahead, and the gap closes at v_b - c.
                double t_catch = ev.time;
                if (cfg_.bwave_mode == BWaveMode::Finite) {
                    const double t_s = bwave_arm1_crossing(ev.time, 0.0);
                    t_catch = t_s + c * t_s / (cfg_.v_b - c);
                }
                const double catch_at = c * t_catch;
                for (std::uint32_t j = 0; j < arm2_.size(); ++j) {
                    if (arm2_[j].position < catch_at && arm2_[j].position < cfg_.x_b) {
                        queue.schedule({bwave_arm2_crossing(ev.time, arm2_[j].position),
                                        EventKind::BWaveCrossesElement, Arm::Second, j});
                    }
                }
                if (catch_at < cfg_.x_b) {
                    queue.schedule({t_catch, EventKind::BWaveReachesPartner, Arm::Second, 0});
                }
            } else {
                rec.t2 = ev.time;
                photon2_detected = true;
                const double p_t = forced ? channel_probability(*forced, cfg_.b, Channel::Transmitted) : 0.5;
                rec.ch2 = rng.uniform() < p_t ? Channel::Transmitted : Channel::Reflected;
            }
            break;

        case EventKind::TriggerArrivesAtPC:
            pc.activated_at = ev.time;
            rec.pc_triggered = true;
            break;

        case EventKind::BWaveCrossesElement:
            if (ev.arm == Arm::First) {
                if (ev.element == pc_index_ && pc_active_at(pc, ev.time)) {
                    rec.pc_activated = true;
                }
                wave.carried_state = arm1_op(ev.element, ev.time).adjoint().apply(wave.carried_state);
                wave.position = arm1_[ev.element].position;
            } else {
                wave.leg = BWave::Leg::ForwardOnArm2;
                wave.carried_state = arm2_[ev.element].timeline.at(ev.time).apply(wave.carried_state);
                wave.position = arm2_[ev.element].position;
                bwave_crossed[ev.element] = true;
            }
            break;

        case EventKind::BWaveReachesPartner:
            if (photon2_detected) {
                break;
            }
            forced = wave.carried_state;
            rec.bwave_arrived = true;
            rec.t_catch = ev.time;
            wave.leg = BWave::Leg::ForwardOnArm2;
            wave.position = c * ev.time;
            for (std::uint32_t j : photon2_pending) {
                if (!bwave_crossed[j]) {
                    *forced = arm2_[j].timeline.at(ev.time).apply(*forced);
                }
            }
            photon2_pending.clear();
            break;
        }
    }
    return rec;
}

TrialRecord simulate_trial(const ScenarioConfig &cfg, TrialRng &rng, bool allow_infeasible) {
    return TrialSimulator(cfg, allow_infeasible).run(rng);
}

BWaveTraceResult bwave_trace(const std::vector<ArmElement> &arm1, const std::vector<ArmElement> &arm2,
                             const SinglePhotonState &carried, double t_start, const ScenarioConfig &cfg) {
    BWaveTraceResult out{carried, std::nullopt};
    if (cfg.bwave_mode == BWaveMode::None) {
        return out;
    }
    const bool finite = cfg.bwave_mode == BWaveMode::Finite;
    const double l1 = cfg.arm1_length();
    for (std::size_t k = arm1.size(); k-- > 0;) {
        const double t = finite ? t_start + (l1 - arm1[k].position) / cfg.v_b : t_start;
        out.final_state = arm1[k].timeline.at(t).adjoint().apply(out.final_state);
    }
    const double t_s = finite ? t_start + l1 / cfg.v_b : t_start;
    const double t_catch = finite ? cfg.v_b * t_s / (cfg.v_b - cfg.c) : t_start;
    const double catch_at = cfg.c * t_catch;
    // Without interception the wave still sweeps arm 2 until photon 2 is gone.
    const double reach = catch_at < cfg.x_b ? catch_at : (finite ? cfg.v_b * (cfg.x_b / cfg.c - t_s) : cfg.x_b);
    for (const auto &el : arm2) {
        if (el.position < reach && el.position < cfg.x_b) {
            const double t = finite ? t_s + el.position / cfg.v_b : t_start;
            out.final_state = el.timeline.at(t).apply(out.final_state);
        }
    }
    if (catch_at < cfg.x_b) {
        out.t_arrival = t_catch;
    }
    return out;
}

}  // namespace bwave
