#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "bwave/geometry.hpp"
#include "bwave/polarization.hpp"
#include "oracle.hpp"

namespace fixtures {

/// The shipped default layout: v_b = 10^4 c, x = 1 mm, y = 1.1 y_min,
/// a = b = 0, 45 degree Pockels rotator fired from D1'.
inline bwave::ScenarioConfig default_config() {
    bwave::ScenarioConfig cfg;
    cfg.x_a = 1.0;
    cfg.x = 0.001;
    cfg.v_b = 1e4 * cfg.c;
    cfg.y = 1.1 * (cfg.v_b - cfg.c) / cfg.c * (cfg.x / 2);
    cfg.x_b = 20.0;
    cfg.a = bwave::AnalyzerOrientation::from_degrees(0);
    cfg.b = bwave::AnalyzerOrientation::from_degrees(0);
    cfg.pc = bwave::make_element(bwave::PockelsRotator{bwave::kPi / 4});
    cfg.trigger_rule = bwave::TriggerRule::OnReflectionD1Prime;
    return cfg;
}

/// Random layout satisfying every feasibility condition with margin.
inline bwave::ScenarioConfig random_feasible(std::mt19937_64 &gen) {
    std::uniform_real_distribution<double> u(0, 1);
    bwave::ScenarioConfig cfg;
    cfg.c = bwave::kSpeedOfLight;
    cfg.x_a = 0.5 + 4.5 * u(gen);
    cfg.x = cfg.x_a * (0.001 + 0.5 * u(gen));
    cfg.v_b = cfg.c * std::pow(10.0, 0.2 + 3.8 * u(gen));
    const double y_min = (cfg.v_b - cfg.c) / cfg.c * cfg.x / 2;
    cfg.y = y_min * (1.05 + 2 * u(gen));
    // Interception happens at (x_a + 2y)(1 + c/v_b)/(1 - c/v_b) along arm 2.
    const double r = cfg.c / cfg.v_b;
    cfg.x_b = cfg.arm1_length() * (1 + r) / (1 - r) * (1.01 + u(gen));
    cfg.a = bwave::AnalyzerOrientation::from_radians(bwave::kPi * u(gen));
    cfg.b = bwave::AnalyzerOrientation::from_radians(bwave::kPi * u(gen));
    cfg.pc = bwave::make_element(bwave::PockelsRotator{bwave::kPi * u(gen)});
    return cfg;
}

inline oracle::Mat2 to_mat2(const bwave::JonesOperator &u) {
    return {{{u.at(0, 0), u.at(0, 1)}, {u.at(1, 0), u.at(1, 1)}}};
}

inline oracle::Mat2 matmul(const oracle::Mat2 &a, const oracle::Mat2 &b) {
    oracle::Mat2 out{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                out[i][j] += a[i][k] * b[k][j];
    return out;
}

/// Haar-ish random 2x2 unitary: global phase times an SU(2) element.
inline bwave::JonesOperator random_unitary(std::mt19937_64 &gen) {
    std::normal_distribution<double> n(0, 1);
    std::uniform_real_distribution<double> phase(-bwave::kPi, bwave::kPi);
    double q[4];
    double norm = 0;
    for (double &v : q) {
        v = n(gen);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    const bwave::Complex alpha{q[0] / norm, q[1] / norm};
    const bwave::Complex beta{q[2] / norm, q[3] / norm};
    const bwave::Complex g = std::polar(1.0, phase(gen));
    return bwave::JonesOperator::from_matrix(g * alpha, -g * std::conj(beta), g * beta, g * std::conj(alpha));
}

/// |k/n - p| within `sigmas` binomial standard deviations of p.
inline bool within_sigma(std::uint64_t k, std::uint64_t n, double p, double sigmas = 5.0) {
    const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n));
    const double diff = std::abs(static_cast<double>(k) / static_cast<double>(n) - p);
    return sd == 0 ? diff == 0 : diff <= sigmas * sd;
}

}  // namespace fixtures
