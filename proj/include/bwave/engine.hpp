#pragma once

// Discrete-event simulation of a single trial in the preferred frame.
//
// Photon 1 is detected first and spawns a B-wave carrying the conditional
// state photon 2 must be forced into. The B-wave retraces arm 1 toward the
// source, applying the adjoint of each element's unitary as of the crossing
// instant, then runs out along arm 2 applying each unitary until it meets
// photon 2. A light-speed trigger from D1' may switch the Pockels cell on
// before the B-wave passes it. If the B-wave misses photon 2, its outcome is
// drawn from the local marginal.

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "bwave/geometry.hpp"
#include "bwave/polarization.hpp"
#include "bwave/random.hpp"

namespace bwave {

class InfeasibleScenarioError : public std::runtime_error {
  public:
    explicit InfeasibleScenarioError(std::vector<Violation> violations);
    const std::vector<Violation> &violations() const { return violations_; }

  private:
    std::vector<Violation> violations_;
};

enum class EventKind : std::uint8_t {
    PhotonArrivesAtElement,
    Detection,
    TriggerArrivesAtPC,
    BWaveCrossesElement,
    BWaveReachesPartner,
};

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::Detection;
    Arm arm = Arm::First;        // photon / arm the event belongs to
    std::uint32_t element = 0;   // index into the arm's element list
    std::uint64_t sequence = 0;  // insertion order, breaks time ties
};

/// Min-queue over (time, insertion order).
class EventQueue {
  public:
    /// Throws std::logic_error when scheduling into the past.
    void schedule(Event ev);
    bool empty() const { return heap_.empty(); }
    Event pop();
    double now() const { return now_; }

  private:
    struct Later {
        bool operator()(const Event &l, const Event &r) const {
            return l.time != r.time ? l.time > r.time : l.sequence > r.sequence;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_sequence_ = 0;
    double now_ = 0.0;
};

/// Activation schedule of one element.
struct DeviceTimeline {
    std::optional<double> activated_at;
    JonesOperator idle;
    JonesOperator active;

    const JonesOperator &at(double t) const;
};

/// True iff the element was switched on strictly before `t`.
bool pc_active_at(const DeviceTimeline &timeline, double t);

struct BWave {
    SinglePhotonState carried_state;
    double position = 0.0;  // path coordinate from S on the current leg
    enum class Leg : std::uint8_t { BackwardOnArm1, ForwardOnArm2 } leg = Leg::BackwardOnArm1;
    double speed = 0.0;  // infinite in instantaneous mode
};

struct TrialRecord {
    Channel ch1 = Channel::Transmitted;
    Channel ch2 = Channel::Transmitted;
    double t1 = 0.0;
    double t2 = 0.0;
    /// The B-wave crossed the Pockels cell while it was active.
    bool pc_activated = false;
    /// The trigger signal reached the cell during the trial.
    bool pc_triggered = false;
    bool bwave_arrived = false;
    bool simultaneous_detection = false;
    std::optional<double> t_catch;

    bool operator==(const TrialRecord &) const = default;
};

struct TraceEntry {
    double time;
    EventKind kind;
    Arm arm;
};

/// Optical element on an arm with its (possibly switchable) action.
struct ArmElement {
    double position = 0.0;
    DeviceTimeline timeline;
    bool is_pockels_cell = false;
};

/// Ordered elements of each arm plus the B-wave path parameters for one
/// scenario. Immutable after construction and safe to share across threads.
class TrialSimulator {
  public:
    /// Throws InfeasibleScenarioError unless the scenario validates or
    /// `allow_infeasible` is set.
    explicit TrialSimulator(ScenarioConfig cfg, bool allow_infeasible = false);

    TrialRecord run(TrialRng &rng, std::vector<TraceEntry> *trace = nullptr) const;

    const ScenarioConfig &config() const { return cfg_; }
    const TimingReport &timing() const { return timing_; }
    const std::vector<ArmElement> &arm1() const { return arm1_; }
    const std::vector<ArmElement> &arm2() const { return arm2_; }

  private:
    double bwave_arm1_crossing(double t1, double position) const;
    double bwave_arm2_crossing(double t1, double position) const;

    ScenarioConfig cfg_;
    TimingReport timing_;
    std::vector<ArmElement> arm1_;  // sorted by position from S
    std::vector<ArmElement> arm2_;
    std::size_t pc_index_ = 0;
};

TrialRecord simulate_trial(const ScenarioConfig &cfg, TrialRng &rng, bool allow_infeasible = false);

struct BWaveTraceResult {
    SinglePhotonState final_state;
    std::optional<double> t_arrival;
};

/// Runs a B-wave created at `t_start` carrying `carried` over the two arms.
/// Arm 1 is visited from the detector end back to S applying adjoints, arm 2
/// from S outward applying unitaries, each element taken as of its crossing
/// instant. Elements of arm 2 beyond the interception point are left to
/// photon 2 and are not applied here.
BWaveTraceResult bwave_trace(const std::vector<ArmElement> &arm1, const std::vector<ArmElement> &arm2,
                             const SinglePhotonState &carried, double t_start, const ScenarioConfig &cfg);

}  // namespace bwave
