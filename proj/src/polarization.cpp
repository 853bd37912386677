#include "bwave/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bwave {

namespace {

bool all_finite(const Complex *begin, const Complex *end) {
    return std::all_of(begin, end, [](Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

template <std::size_t N>
double sum_norm(const std::array<Complex, N> &amps) {
    double s = 0.0;
    for (const auto &a : amps) {
        s += std::norm(a);
    }
    return s;
}

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

AnalyzerOrientation AnalyzerOrientation::from_radians(double radians) {
    if (!std::isfinite(radians)) {
        throw std::invalid_argument("analyzer angle must be finite");
    }
    double r = std::fmod(radians, kPi);
    if (r < 0.0) {
        r += kPi;
    }
    if (r >= kPi) {
        r = 0.0;
    }
    return AnalyzerOrientation(r);
}

AnalyzerOrientation AnalyzerOrientation::from_degrees(double degrees) {
    return from_radians(degrees * (kPi / 180.0));
}

SinglePhotonState SinglePhotonState::from_amplitudes(Complex h, Complex v) {
    std::array<Complex, 2> amps{h, v};
    if (!all_finite(amps.data(), amps.data() + 2)) {
        throw std::invalid_argument("single-photon amplitudes must be finite");
    }
    if (std::abs(sum_norm(amps) - 1.0) > kNormTolerance) {
        throw std::invalid_argument("single-photon state is not normalized");
    }
    return SinglePhotonState(amps);
}

SinglePhotonState SinglePhotonState::normalized(Complex h, Complex v) {
    std::array<Complex, 2> amps{h, v};
    if (!all_finite(amps.data(), amps.data() + 2)) {
        throw std::invalid_argument("single-photon amplitudes must be finite");
    }
    double n = std::sqrt(sum_norm(amps));
    if (n == 0.0) {
        throw std::invalid_argument("cannot normalize the zero vector");
    }
    return SinglePhotonState({h / n, v / n});
}

SinglePhotonState SinglePhotonState::linear(double radians) {
    return SinglePhotonState({Complex{std::cos(radians), 0.0}, Complex{std::sin(radians), 0.0}});
}

double SinglePhotonState::norm_squared() const { return sum_norm(amps_); }

Complex SinglePhotonState::inner(const SinglePhotonState &other) const {
    return std::conj(amps_[0]) * other.amps_[0] + std::conj(amps_[1]) * other.amps_[1];
}

bool SinglePhotonState::equal_up_to_phase(const SinglePhotonState &other) const {
    return std::abs(std::abs(inner(other)) - 1.0) <= kPhaseTolerance;
}

TwoPhotonState::TwoPhotonState()
    : amps_{Complex{0.0, 0.0}, Complex{-kInvSqrt2, 0.0}, Complex{kInvSqrt2, 0.0}, Complex{0.0, 0.0}} {}

TwoPhotonState TwoPhotonState::from_amplitudes(const std::array<Complex, 4> &amps) {
    if (!all_finite(amps.data(), amps.data() + 4)) {
        throw std::invalid_argument("two-photon amplitudes must be finite");
    }
    if (std::abs(sum_norm(amps) - 1.0) > kNormTolerance) {
        throw std::invalid_argument("two-photon state is not normalized");
    }
    return TwoPhotonState(Unchecked{}, amps);
}

TwoPhotonState TwoPhotonState::product(const SinglePhotonState &first, const SinglePhotonState &second) {
    std::array<Complex, 4> amps{};
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            amps[2 * i + j] = first.amplitudes()[i] * second.amplitudes()[j];
        }
    }
    return TwoPhotonState(Unchecked{}, amps);
}

double TwoPhotonState::norm_squared() const { return sum_norm(amps_); }

bool TwoPhotonState::equal_up_to_phase(const TwoPhotonState &other) const {
    Complex overlap{0.0, 0.0};
    for (std::size_t k = 0; k < 4; ++k) {
        overlap += std::conj(amps_[k]) * other.amps_[k];
    }
    return std::abs(std::abs(overlap) - 1.0) <= kPhaseTolerance;
}

JonesOperator::JonesOperator() : m_{Complex{1.0, 0.0}, Complex{0.0, 0.0}, Complex{0.0, 0.0}, Complex{1.0, 0.0}} {}

JonesOperator JonesOperator::from_matrix(Complex m00, Complex m01, Complex m10, Complex m11) {
    JonesOperator op({m00, m01, m10, m11});
    if (!all_finite(op.m_.data(), op.m_.data() + 4)) {
        throw NonUnitaryError("Jones matrix has non-finite entries");
    }
    double err = op.unitarity_error();
    if (err > kUnitaryTolerance) {
        std::ostringstream msg;
        msg << "Jones matrix is not unitary (max |M^dagger M - I| = " << err << ")";
        throw NonUnitaryError(msg.str());
    }
    return op;
}

JonesOperator JonesOperator::adjoint() const {
    return JonesOperator({std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])});
}

JonesOperator JonesOperator::operator*(const JonesOperator &rhs) const {
    std::array<Complex, 4> out{};
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
            out[r * 2 + c] = m_[r * 2] * rhs.m_[c] + m_[r * 2 + 1] * rhs.m_[2 + c];
        }
    }
    return JonesOperator(out);
}

SinglePhotonState JonesOperator::apply(const SinglePhotonState &state) const {
    const auto &v = state.amplitudes();
    Complex h = m_[0] * v[0] + m_[1] * v[1];
    Complex w = m_[2] * v[0] + m_[3] * v[1];
    // Unitary action preserves the norm; renormalizing only trims rounding.
    return SinglePhotonState::normalized(h, w);
}

double JonesOperator::unitarity_error() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 2; ++c) {
            Complex g = std::conj(m_[r]) * m_[c] + std::conj(m_[2 + r]) * m_[2 + c];
            Complex expected = r == c ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
            worst = std::max(worst, std::abs(g - expected));
        }
    }
    return worst;
}

JonesOperator make_element(const ElementKind &kind) {
    struct Visitor {
        JonesOperator operator()(const HalfWavePlate &hwp) const {
            double c = std::cos(2.0 * hwp.fast_axis);
            double s = std::sin(2.0 * hwp.fast_axis);
            return JonesOperator::from_matrix(c, s, s, -c);
        }
        JonesOperator operator()(const Rotator &rot) const { return rotation(rot.angle); }
        JonesOperator operator()(const PockelsRotator &pc) const { return rotation(pc.angle); }
        JonesOperator operator()(const CustomUnitary &u) const {
            return JonesOperator::from_matrix(u.matrix[0], u.matrix[1], u.matrix[2], u.matrix[3]);
        }
        static JonesOperator rotation(double angle) {
            double c = std::cos(angle);
            double s = std::sin(angle);
            return JonesOperator::from_matrix(c, -s, s, c);
        }
    };
    return std::visit(Visitor{}, kind);
}

TwoPhotonState singlet() { return TwoPhotonState(); }

TwoPhotonState apply_jones_to_photon(const TwoPhotonState &state, Photon photon, const JonesOperator &u) {
    if (u.unitarity_error() > kUnitaryTolerance) {
        throw NonUnitaryError("operator applied to a photon must be unitary");
    }
    const auto &in = state.amplitudes();
    std::array<Complex, 4> out{};
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            Complex acc{0.0, 0.0};
            for (std::size_t k = 0; k < 2; ++k) {
                if (photon == Photon::First) {
                    acc += u.at(i, k) * in[2 * k + j];
                } else {
                    acc += u.at(j, k) * in[2 * i + k];
                }
            }
            out[2 * i + j] = acc;
        }
    }
    double n = std::sqrt(sum_norm(out));
    for (auto &a : out) {
        a /= n;
    }
    return TwoPhotonState::from_amplitudes(out);
}

SinglePhotonState channel_state(AnalyzerOrientation orientation, Channel ch) {
    double t = orientation.radians();
    return SinglePhotonState::linear(ch == Channel::Transmitted ? t : t + kPi / 2.0);
}

double channel_probability(const SinglePhotonState &state, AnalyzerOrientation orientation, Channel ch) {
    return std::norm(channel_state(orientation, ch).inner(state));
}

double joint_probability(const TwoPhotonState &state, AnalyzerOrientation a, Channel ch1, AnalyzerOrientation b,
                         Channel ch2) {
    const auto p1 = channel_state(a, ch1).amplitudes();
    const auto p2 = channel_state(b, ch2).amplitudes();
    const auto &amps = state.amplitudes();
    Complex overlap{0.0, 0.0};
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            overlap += std::conj(p1[i]) * std::conj(p2[j]) * amps[2 * i + j];
        }
    }
    return std::clamp(std::norm(overlap), 0.0, 1.0);
}

double first_photon_probability(const TwoPhotonState &state, AnalyzerOrientation a, Channel ch) {
    const auto p1 = channel_state(a, ch).amplitudes();
    const auto &amps = state.amplitudes();
    Complex h = std::conj(p1[0]) * amps[0] + std::conj(p1[1]) * amps[2];
    Complex v = std::conj(p1[0]) * amps[1] + std::conj(p1[1]) * amps[3];
    return std::clamp(std::norm(h) + std::norm(v), 0.0, 1.0);
}

FirstDetection collapse_on_first_detection(const TwoPhotonState &state, AnalyzerOrientation a, Channel channel) {
    const auto p1 = channel_state(a, channel).amplitudes();
    const auto &amps = state.amplitudes();
    Complex h = std::conj(p1[0]) * amps[0] + std::conj(p1[1]) * amps[2];
    Complex v = std::conj(p1[0]) * amps[1] + std::conj(p1[1]) * amps[3];
    double p = std::norm(h) + std::norm(v);
    if (p <= kNormTolerance) {
        std::ostringstream msg;
        msg << "photon 1 cannot be detected in channel " << channel_letter(channel) << " at " << a.radians()
            << " rad (probability " << p << ")";
        throw DegenerateBranchError(msg.str());
    }
    return {std::min(p, 1.0), SinglePhotonState::normalized(h, v)};
}

NQubitState NQubitState::from_amplitudes(std::vector<Complex> amps) {
    std::size_t n = 0;
    switch (amps.size()) {
    case 2:
        n = 1;
        break;
    case 4:
        n = 2;
        break;
    case 8:
        n = 3;
        break;
    default:
        throw std::invalid_argument("qubit register must hold 2, 4 or 8 amplitudes");
    }
    if (!all_finite(amps.data(), amps.data() + amps.size())) {
        throw std::invalid_argument("qubit amplitudes must be finite");
    }
    double s = 0.0;
    for (const auto &a : amps) {
        s += std::norm(a);
    }
    if (std::abs(s - 1.0) > kNormTolerance) {
        throw std::invalid_argument("qubit register is not normalized");
    }
    return NQubitState(n, std::move(amps));
}

double NQubitState::norm_squared() const {
    double s = 0.0;
    for (const auto &a : amps_) {
        s += std::norm(a);
    }
    return s;
}

double NQubitState::probability(std::size_t qubit, int bit) const {
    if (qubit >= n_ || (bit != 0 && bit != 1)) {
        throw std::out_of_range("qubit index or bit value out of range");
    }
    std::size_t shift = n_ - 1 - qubit;
    double p = 0.0;
    for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
        if (static_cast<int>((idx >> shift) & 1U) == bit) {
            p += std::norm(amps_[idx]);
        }
    }
    return p;
}

QubitMeasurement measure_qubit(const NQubitState &state, std::size_t qubit, int bit) {
    const std::size_t n = state.qubits();
    if (n < 2) {
        throw std::invalid_argument("measure_qubit needs a register of at least two qubits");
    }
    double p = state.probability(qubit, bit);
    if (p <= kNormTolerance) {
        throw DegenerateBranchError("qubit outcome has zero probability");
    }
    std::size_t shift = n - 1 - qubit;
    std::vector<Complex> rest;
    rest.reserve(state.amplitudes().size() / 2);
    for (std::size_t idx = 0; idx < state.amplitudes().size(); ++idx) {
        if (static_cast<int>((idx >> shift) & 1U) == bit) {
            rest.push_back(state.amplitudes()[idx] / std::sqrt(p));
        }
    }
    return {p, NQubitState::from_amplitudes(std::move(rest))};
}

NQubitState ghz_state() {
    std::vector<Complex> amps(8, Complex{0.0, 0.0});
    amps[0] = kInvSqrt2;
    amps[7] = kInvSqrt2;
    return NQubitState::from_amplitudes(std::move(amps));
}

}  // namespace bwave
