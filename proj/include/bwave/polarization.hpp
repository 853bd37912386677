#pragma once

// Polarization kernel: Jones-calculus states and operators, projective
// two-channel measurement and conditional collapse.
//
// Basis convention: |H> is 0 rad, angles grow counterclockwise toward |V>.
// A linear state at angle t is cos(t)|H> + sin(t)|V>. Two-photon amplitudes
// are indexed HH, HV, VH, VV with photon 1 as the most significant factor.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bwave {

using Complex = std::complex<double>;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-9;
inline constexpr double kPhaseTolerance = 1e-9;
inline constexpr double kPi = 3.14159265358979323846;

class NonUnitaryError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a measurement branch has zero Born probability and no
/// conditional state exists.
class DegenerateBranchError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

enum class Channel : std::uint8_t { Transmitted, Reflected };

enum class Photon : std::uint8_t { First = 1, Second = 2 };

inline char channel_letter(Channel ch) { return ch == Channel::Transmitted ? 'T' : 'R'; }

/// Orientation of a two-channel polarizer, canonicalized into [0, pi).
/// The transmission channel projects onto |angle>, the reflection channel
/// onto |angle + pi/2>.
class AnalyzerOrientation {
  public:
    AnalyzerOrientation() = default;
    static AnalyzerOrientation from_radians(double radians);
    static AnalyzerOrientation from_degrees(double degrees);

    double radians() const { return angle_; }

    bool operator==(const AnalyzerOrientation &) const = default;

  private:
    explicit AnalyzerOrientation(double canonical) : angle_(canonical) {}
    double angle_ = 0.0;
};

class SinglePhotonState {
  public:
    /// |H>.
    SinglePhotonState() = default;

    /// Throws std::invalid_argument if the pair is not normalized within
    /// kNormTolerance or holds non-finite values.
    static SinglePhotonState from_amplitudes(Complex h, Complex v);
    /// Scales (h, v) to unit norm. Throws on a zero or non-finite vector.
    static SinglePhotonState normalized(Complex h, Complex v);
    static SinglePhotonState linear(double radians);

    Complex amp_h() const { return amps_[0]; }
    Complex amp_v() const { return amps_[1]; }
    const std::array<Complex, 2> &amplitudes() const { return amps_; }

    double norm_squared() const;
    /// <this|other>.
    Complex inner(const SinglePhotonState &other) const;
    /// |<this|other>| == 1 within kPhaseTolerance.
    bool equal_up_to_phase(const SinglePhotonState &other) const;

  private:
    explicit SinglePhotonState(std::array<Complex, 2> amps) : amps_(amps) {}
    std::array<Complex, 2> amps_{Complex{1.0, 0.0}, Complex{0.0, 0.0}};
};

class TwoPhotonState {
  public:
    enum Basis : std::size_t { HH = 0, HV = 1, VH = 2, VV = 3 };

    /// The singlet (|VH> - |HV>)/sqrt(2).
    TwoPhotonState();

    static TwoPhotonState from_amplitudes(const std::array<Complex, 4> &amps);
    static TwoPhotonState product(const SinglePhotonState &first, const SinglePhotonState &second);

    Complex amp(Basis b) const { return amps_[b]; }
    const std::array<Complex, 4> &amplitudes() const { return amps_; }
    double norm_squared() const;
    bool equal_up_to_phase(const TwoPhotonState &other) const;

  private:
    struct Unchecked {};
    TwoPhotonState(Unchecked, const std::array<Complex, 4> &amps) : amps_(amps) {}
    std::array<Complex, 4> amps_;
};

/// 2x2 unitary Jones matrix, stored row-major.
class JonesOperator {
  public:
    /// Identity.
    JonesOperator();

    /// Throws NonUnitaryError unless M^dagger M = I within kUnitaryTolerance.
    static JonesOperator from_matrix(Complex m00, Complex m01, Complex m10, Complex m11);
    static JonesOperator identity() { return JonesOperator(); }

    Complex at(std::size_t row, std::size_t col) const { return m_[row * 2 + col]; }
    JonesOperator adjoint() const;
    /// Matrix product: (this * rhs) acts with rhs first.
    JonesOperator operator*(const JonesOperator &rhs) const;
    SinglePhotonState apply(const SinglePhotonState &state) const;

    /// Largest elementwise deviation of M^dagger M from I.
    double unitarity_error() const;

  private:
    explicit JonesOperator(const std::array<Complex, 4> &m) : m_(m) {}
    std::array<Complex, 4> m_;
};

struct HalfWavePlate {
    double fast_axis = 0.0;  // radians
};
struct Rotator {
    double angle = 0.0;  // radians
};
/// Active-state action of a Pockels cell configured as a polarization rotator.
struct PockelsRotator {
    double angle = 0.0;  // radians
};
struct CustomUnitary {
    std::array<Complex, 4> matrix{};  // row-major
};

using ElementKind = std::variant<HalfWavePlate, Rotator, PockelsRotator, CustomUnitary>;

JonesOperator make_element(const ElementKind &kind);

TwoPhotonState singlet();

/// Applies `u` to one tensor factor. Throws NonUnitaryError if `u` is not
/// unitary.
TwoPhotonState apply_jones_to_photon(const TwoPhotonState &state, Photon photon, const JonesOperator &u);

/// Projection vector for an analyzer channel.
SinglePhotonState channel_state(AnalyzerOrientation orientation, Channel ch);

/// |<channel|state>|^2 for a single photon.
double channel_probability(const SinglePhotonState &state, AnalyzerOrientation orientation, Channel ch);

/// Born probability that photon 1 exits `ch1` of analyzer `a` and photon 2
/// exits `ch2` of analyzer `b`.
double joint_probability(const TwoPhotonState &state, AnalyzerOrientation a, Channel ch1, AnalyzerOrientation b,
                         Channel ch2);

/// Marginal probability that photon 1 exits `ch` of analyzer `a`.
double first_photon_probability(const TwoPhotonState &state, AnalyzerOrientation a, Channel ch);

struct FirstDetection {
    double probability = 0.0;
    SinglePhotonState partner;
};

/// Born probability of photon 1 landing in `channel` and the normalized
/// conditional state of photon 2. Throws DegenerateBranchError when the
/// branch probability is at or below kNormTolerance.
FirstDetection collapse_on_first_detection(const TwoPhotonState &state, AnalyzerOrientation a, Channel channel);

/// Register of 1 to 3 qubits in the computational basis. Qubit 0 is the most
/// significant bit of the amplitude index.
class NQubitState {
  public:
    /// Single qubit in |0>.
    NQubitState() = default;
    /// Throws std::invalid_argument unless the size is 2, 4 or 8 and the
    /// vector is normalized within kNormTolerance.
    static NQubitState from_amplitudes(std::vector<Complex> amps);

    std::size_t qubits() const { return n_; }
    const std::vector<Complex> &amplitudes() const { return amps_; }
    Complex amp(std::size_t index) const { return amps_.at(index); }
    double norm_squared() const;

    /// Marginal Born probability that `qubit` reads `bit`.
    double probability(std::size_t qubit, int bit) const;

  private:
    NQubitState(std::size_t n, std::vector<Complex> amps) : n_(n), amps_(std::move(amps)) {}
    std::size_t n_ = 1;
    std::vector<Complex> amps_{Complex{1.0, 0.0}, Complex{0.0, 0.0}};
};

struct QubitMeasurement {
    double probability = 0.0;
    /// State of the unmeasured qubits, order preserved.
    NQubitState remaining;
};

/// Projects `qubit` onto `bit` and returns the normalized state of the other
/// qubits. Requires at least two qubits; throws DegenerateBranchError on a
/// zero-probability outcome.
QubitMeasurement measure_qubit(const NQubitState &state, std::size_t qubit, int bit);

/// (|000> + |111>)/sqrt(2).
NQubitState ghz_state();

}  // namespace bwave
