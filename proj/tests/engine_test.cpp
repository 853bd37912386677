#include "bwave/engine.hpp"

#include <cmath>
#include <random>

#include "bwave/harness.hpp"
#include "fixtures.hpp"
#include "gtest/gtest.h"
#include "oracle.hpp"

using namespace bwave;
using fixtures::within_sigma;

namespace {

ScenarioConfig no_catch_config() {
    ScenarioConfig cfg = fixtures::default_config();
    cfg.x_b = cfg.arm1_length() * (1 + 1e-6);
    return cfg;
}

std::vector<TrialRecord> records(const ScenarioConfig &cfg, std::uint64_t n, std::uint64_t seed,
                                 bool allow_infeasible = false, std::size_t workers = 1) {
    std::vector<TrialRecord> out;
    RunOptions opt;
    opt.records = &out;
    opt.allow_infeasible = allow_infeasible;
    opt.workers = workers;
    run_experiment(cfg, n, seed, opt);
    return out;
}

}  // namespace

TEST(event_queue, pops_in_time_then_insertion_order) {
    EventQueue q;
    q.schedule({2.0, EventKind::Detection, Arm::First, 0});
    q.schedule({1.0, EventKind::Detection, Arm::First, 1});
    q.schedule({1.0, EventKind::Detection, Arm::First, 2});
    EXPECT_EQ(q.pop().element, 1u);
    EXPECT_EQ(q.now(), 1.0);
    EXPECT_EQ(q.pop().element, 2u);
    EXPECT_EQ(q.pop().element, 0u);
    EXPECT_TRUE(q.empty());
}

TEST(event_queue, refuses_past_and_non_finite_times) {
    EventQueue q;
    q.schedule({1.0, EventKind::Detection, Arm::First, 0});
    q.pop();
    EXPECT_THROW(q.schedule({0.5, EventKind::Detection, Arm::First, 0}), std::logic_error);
    EXPECT_THROW(q.schedule({NAN, EventKind::Detection, Arm::First, 0}), std::logic_error);
    EXPECT_NO_THROW(q.schedule({1.0, EventKind::Detection, Arm::First, 0}));
}

TEST(pc_active_at, strict_tie_rule) {
    DeviceTimeline never{std::nullopt, JonesOperator::identity(), make_element(PockelsRotator{0.3})};
    for (double t : {-1.0, 0.0, 1.0, 1e9})
        EXPECT_FALSE(pc_active_at(never, t));
    DeviceTimeline on = never;
    on.activated_at = 2.0;
    EXPECT_FALSE(pc_active_at(on, 2.0));
    EXPECT_TRUE(pc_active_at(on, std::nextafter(2.0, 3.0)));
    EXPECT_TRUE(pc_active_at(on, 2.0 + 1e-12));
    EXPECT_FALSE(pc_active_at(on, 1.0));
}

TEST(bwave_trace, no_devices_is_identity) {
    const ScenarioConfig cfg = fixtures::default_config();
    const auto carried = SinglePhotonState::linear(0.7);
    const auto out = bwave_trace({}, {}, carried, cfg.arm1_length() / cfg.c, cfg);
    EXPECT_TRUE(out.final_state.equal_up_to_phase(carried));
    ASSERT_TRUE(out.t_arrival.has_value());
    EXPECT_NEAR(*out.t_arrival, *detection_times(cfg).t_catch, 1e-9 * *out.t_arrival);
}

TEST(bwave_trace, active_rotator_applies_adjoint_then_arm2) {
    const ScenarioConfig cfg = fixtures::default_config();
    const double theta = 0.4;
    const auto pc_op = make_element(PockelsRotator{theta});
    const auto hwp = make_element(HalfWavePlate{0.2});
    std::vector<ArmElement> arm1{{cfg.pc_position(), DeviceTimeline{0.0, JonesOperator::identity(), pc_op}, true}};
    std::vector<ArmElement> arm2{{1.0, DeviceTimeline{std::nullopt, hwp, hwp}, false}};
    const auto carried = SinglePhotonState::linear(1.1);
    const double t1 = cfg.arm1_length() / cfg.c;
    const auto out = bwave_trace(arm1, arm2, carried, t1, cfg);
    EXPECT_TRUE(out.final_state.equal_up_to_phase(hwp.apply(pc_op.adjoint().apply(carried))));
    // R(theta)^dagger turns a linear state backward by theta.
    const auto back = bwave_trace(arm1, {}, carried, t1, cfg);
    EXPECT_TRUE(back.final_state.equal_up_to_phase(SinglePhotonState::linear(1.1 - theta)));

    // Activated exactly when the B-wave crosses: idle.
    const double crossing = t1 + (cfg.arm1_length() - cfg.pc_position()) / cfg.v_b;
    arm1[0].timeline.activated_at = crossing;
    EXPECT_TRUE(bwave_trace(arm1, {}, carried, t1, cfg).final_state.equal_up_to_phase(carried));
}

TEST(bwave_trace, elements_beyond_interception_are_left_to_photon2) {
    ScenarioConfig cfg = fixtures::default_config();
    const double catch_at = *detection_times(cfg).catch_position;
    const auto hwp = make_element(HalfWavePlate{0.2});
    std::vector<ArmElement> arm2{{catch_at + 1.0, DeviceTimeline{std::nullopt, hwp, hwp}, false}};
    const auto carried = SinglePhotonState::linear(0.3);
    const auto out = bwave_trace({}, arm2, carried, cfg.arm1_length() / cfg.c, cfg);
    EXPECT_TRUE(out.final_state.equal_up_to_phase(carried));
}

TEST(simulate_trial, equal_angles_never_coincide_without_trigger) {
    ScenarioConfig cfg = fixtures::default_config();
    cfg.a = cfg.b = AnalyzerOrientation::from_degrees(37);
    cfg.trigger_rule = TriggerRule::Never;
    const CountsTable t = run_experiment(cfg, 100000, 3);
    EXPECT_EQ(t.c_12, 0u);
    EXPECT_EQ(t.c_1p2p, 0u);
    EXPECT_EQ(t.c_12 + t.c_12p + t.c_1p2 + t.c_1p2p, t.n);
}

TEST(simulate_trial, always_trigger_quarter_turn_gives_even_conditional) {
    ScenarioConfig cfg = fixtures::default_config();
    cfg.trigger_rule = TriggerRule::Always;
    const CountsTable t = run_experiment(cfg, 200000, 4);
    const std::uint64_t given_t = t.c_12 + t.c_12p;
    EXPECT_TRUE(within_sigma(t.c_12, given_t, 0.5)) << t.c_12 << "/" << given_t;
    EXPECT_EQ(t.c_pc_activated, t.n);
}

TEST(simulate_trial, missed_interception_samples_local_marginal) {
    for (double a_deg : {0.0, 30.0, 45.0, 60.0, 90.0}) {
        ScenarioConfig cfg = no_catch_config();
        cfg.a = AnalyzerOrientation::from_degrees(a_deg);
        const CountsTable t = run_experiment(cfg, 100000, 5, {1, true});
        EXPECT_EQ(t.c_bwave_missed, t.n);
        EXPECT_TRUE(within_sigma(t.c_12 + t.c_1p2, t.n, 0.5)) << a_deg;
    }
    EXPECT_THROW(TrialSimulator{no_catch_config()}, InfeasibleScenarioError);
}

TEST(simulate_trial, infeasible_refusal_names_violation) {
    ScenarioConfig cfg = fixtures::default_config();
    cfg.y = 0.5 * min_detour(cfg);
    try {
        TrialSimulator sim(cfg);
        FAIL() << "expected refusal";
    } catch (const InfeasibleScenarioError &e) {
        ASSERT_EQ(e.violations().size(), 1u);
        EXPECT_EQ(e.violations()[0].kind, ViolationKind::RaceViolation);
        EXPECT_NE(std::string(e.what()).find("RaceViolation"), std::string::npos);
    }
}

TEST(simulate_trial, causal_ordering_of_trace) {
    std::mt19937_64 gen(31);
    for (int k = 0; k < 50; ++k) {
        ScenarioConfig cfg = fixtures::random_feasible(gen);
        cfg.trigger_rule = TriggerRule::Always;
        cfg.elements.push_back({Arm::First, cfg.x_a * 0.5, fixtures::random_unitary(gen)});
        cfg.elements.push_back({Arm::Second, cfg.x_b * 0.1, fixtures::random_unitary(gen)});
        cfg.elements.push_back({Arm::Second, cfg.x_b * 0.9, fixtures::random_unitary(gen)});
        const TrialSimulator sim(cfg);
        TrialRng rng(k);
        std::vector<TraceEntry> trace;
        const TrialRecord rec = sim.run(rng, &trace);
        ASSERT_FALSE(trace.empty());
        for (std::size_t i = 1; i < trace.size(); ++i)
            EXPECT_LE(trace[i - 1].time, trace[i].time);
        for (const auto &e : trace) {
            EXPECT_TRUE(std::isfinite(e.time));
            EXPECT_GE(e.time, 0.0);
            if (e.kind == EventKind::BWaveCrossesElement || e.kind == EventKind::BWaveReachesPartner) {
                EXPECT_GT(e.time, rec.t1);
            }
        }
        EXPECT_LT(rec.t1, rec.t2);
        EXPECT_TRUE(rec.bwave_arrived);
    }
}

TEST(simulate_trial, interception_time_matches_geometry) {
    std::mt19937_64 gen(32);
    for (int k = 0; k < 100; ++k) {
        const ScenarioConfig cfg = fixtures::random_feasible(gen);
        TrialRng rng(k);
        const TrialRecord rec = simulate_trial(cfg, rng);
        ASSERT_TRUE(rec.t_catch.has_value());
        const auto closed = detection_times(cfg).t_catch;
        ASSERT_TRUE(closed.has_value());
        EXPECT_NEAR(*rec.t_catch, *closed, 1e-9);
        // Independent chase: photon 2 at c t, B-wave leaving S at t1 + L1/v_b.
        const double t_s = cfg.arm1_length() / cfg.c + cfg.arm1_length() / cfg.v_b;
        EXPECT_NEAR(*rec.t_catch, t_s * cfg.v_b / (cfg.v_b - cfg.c), 1e-9);
    }
}

TEST(simulate_trial, instantaneous_mode_catches_at_first_detection) {
    ScenarioConfig cfg = fixtures::default_config();
    cfg.bwave_mode = BWaveMode::Instantaneous;
    TrialRng rng(1);
    const TrialRecord rec = simulate_trial(cfg, rng);
    ASSERT_TRUE(rec.t_catch.has_value());
    EXPECT_EQ(*rec.t_catch, rec.t1);
}

TEST(simulate_trial, race_fidelity) {
    ScenarioConfig cfg = fixtures::default_config();
    for (const auto &rec : records(cfg, 20000, 6)) {
        EXPECT_EQ(rec.pc_activated, rec.ch1 == Channel::Reflected);
        EXPECT_EQ(rec.pc_triggered, rec.ch1 == Channel::Reflected);
    }
    cfg.y = 0.99 * min_detour(cfg);
    cfg.x_b = 2 * cfg.arm1_length() * (1 + cfg.c / cfg.v_b) / (1 - cfg.c / cfg.v_b);
    bool any_triggered = false;
    for (const auto &rec : records(cfg, 20000, 6, true)) {
        EXPECT_FALSE(rec.pc_activated);
        any_triggered |= rec.pc_triggered;
    }
    EXPECT_TRUE(any_triggered);
}

TEST(simulate_trial, marginal_asymmetry) {
    ScenarioConfig cfg = fixtures::default_config();
    cfg.pc = make_element(PockelsRotator{0.3});
    const CountsTable on = run_experiment(cfg, 200000, 7);
    const double expected = closed_form_marginals(0, 0, effective_b_prime(0, 0.3)).p2;
    EXPECT_TRUE(within_sigma(on.c_12 + on.c_1p2, on.n, expected));
    EXPECT_FALSE(within_sigma(on.c_12 + on.c_1p2, on.n, 0.5));
    cfg.trigger_rule = TriggerRule::Never;
    const CountsTable off = run_experiment(cfg, 200000, 7);
    EXPECT_TRUE(within_sigma(off.c_12 + off.c_1p2, off.n, 0.5));
}

TEST(simulate_trial, simultaneous_detection_is_flagged) {
    ScenarioConfig cfg = fixtures::default_config();
    cfg.x_b = cfg.arm1_length();
    TrialRng rng(2);
    const TrialRecord rec = simulate_trial(cfg, rng, true);
    EXPECT_TRUE(rec.simultaneous_detection);
    EXPECT_EQ(rec.t1, rec.t2);
    EXPECT_FALSE(rec.bwave_arrived);

    TrialRng rng2(2);
    EXPECT_FALSE(simulate_trial(fixtures::default_config(), rng2).simultaneous_detection);
}

TEST(simulate_trial, static_devices_reproduce_born_rule) {
    std::mt19937_64 gen(33);
    for (int k = 0; k < 3; ++k) {
        ScenarioConfig cfg = fixtures::random_feasible(gen);
        cfg.trigger_rule = TriggerRule::Never;
        const JonesOperator u1 = fixtures::random_unitary(gen);
        const JonesOperator u1b = fixtures::random_unitary(gen);
        const JonesOperator u2 = fixtures::random_unitary(gen);
        const JonesOperator u2b = fixtures::random_unitary(gen);
        cfg.elements = {{Arm::First, 0.2 * cfg.x_a, u1},
                        {Arm::First, cfg.x_a + cfg.y, u1b},
                        {Arm::Second, 0.01 * cfg.x_b, u2},
                        {Arm::Second, 0.99 * cfg.x_b, u2b}};
        const auto m1 = fixtures::matmul(fixtures::to_mat2(u1b), fixtures::to_mat2(u1));
        const auto m2 = fixtures::matmul(fixtures::to_mat2(u2b), fixtures::to_mat2(u2));
        const auto psi = oracle::mul(oracle::kron(m1, m2), oracle::singlet());
        const double a = cfg.a.radians(), b = cfg.b.radians();
        const double p[4] = {oracle::born(psi, a, b), oracle::born(psi, a, b + kPi / 2),
                             oracle::born(psi, a + kPi / 2, b), oracle::born(psi, a + kPi / 2, b + kPi / 2)};
        const std::uint64_t n = 200000;
        const CountsTable t = run_experiment(cfg, n, 100 + k);
        EXPECT_TRUE(within_sigma(t.c_12, n, p[0])) << t.c_12 << " vs " << p[0] * n;
        EXPECT_TRUE(within_sigma(t.c_12p, n, p[1])) << t.c_12p << " vs " << p[1] * n;
        EXPECT_TRUE(within_sigma(t.c_1p2, n, p[2])) << t.c_1p2 << " vs " << p[2] * n;
        EXPECT_TRUE(within_sigma(t.c_1p2p, n, p[3])) << t.c_1p2p << " vs " << p[3] * n;
    }
}

TEST(simulate_trial, deterministic_records_for_any_worker_count) {
    ScenarioConfig cfg = fixtures::default_config();
    const auto base = records(cfg, 5000, 9, false, 1);
    EXPECT_EQ(records(cfg, 5000, 9, false, 1), base);
    EXPECT_EQ(records(cfg, 5000, 9, false, 4), base);
    EXPECT_EQ(records(cfg, 5000, 9, false, 16), base);
    EXPECT_NE(records(cfg, 5000, 10, false, 1), base);
}

TEST(trial_simulator, pockels_cell_idle_is_identity) {
    const TrialSimulator sim(fixtures::default_config());
    int cells = 0;
    for (const auto &el : sim.arm1()) {
        if (el.is_pockels_cell) {
            ++cells;
            EXPECT_LT(el.timeline.idle.unitarity_error(), 1e-15);
            EXPECT_EQ(el.timeline.idle.at(0, 0), Complex(1, 0));
            EXPECT_EQ(el.timeline.idle.at(0, 1), Complex(0, 0));
            EXPECT_FALSE(el.timeline.activated_at.has_value());
        }
    }
    EXPECT_EQ(cells, 1);
}
