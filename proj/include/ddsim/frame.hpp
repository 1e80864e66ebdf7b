#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddsim {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Length-MN vector of constellation symbols (data or pilot).
using SymbolFrame = CVector;
/// Length-MN vector of time-domain samples, indexed n in [0, MN).
using SampleFrame = CVector;
using BitVector = std::vector<std::uint8_t>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegeneratePilotError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Grid geometry of one frame: M delay bins, N Doppler bins, subcarrier
/// spacing delta_f. Bandwidth B = M*delta_f and duration T = N/delta_f, so
/// B*T = M*N holds as an integer identity.
struct FrameConfig {
    int M = 0;
    int N = 0;
    double delta_f = 0.0;
    double f_c = 0.0;

    int mn() const { return M * N; }
    double bandwidth() const { return M * delta_f; }
    double duration() const { return N / delta_f; }
};

FrameConfig make_config(int M, int N, double delta_f, double f_c);

/// exp(j*2*pi*num/den) with num reduced modulo den first, so that large
/// integer phase arguments do not lose precision.
cplx unit_phasor(std::int64_t num, std::int64_t den);

class Constellation {
public:
    /// order-PSK with points exp(j*2*pi*m/order) and Gray labels.
    static Constellation psk(int order);
    /// Arbitrary point set, labelled with natural binary. Used for negative
    /// controls; it need not satisfy the unit-energy zero-mean hypothesis.
    static Constellation custom(std::vector<cplx> points);

    int order() const { return static_cast<int>(points_.size()); }
    int bits_per_symbol() const { return bits_per_symbol_; }
    const std::vector<cplx>& points() const { return points_; }
    cplx point(int index) const { return points_[index]; }
    /// Bit label of point `index`, MSB first.
    unsigned label(int index) const { return labels_[index]; }
    int index_of_label(unsigned label) const { return index_of_label_[label]; }

    /// Largest deviation from unit modulus, and magnitude of the mean.
    double max_modulus_error() const;
    double mean_magnitude() const;
    /// True when every point has unit energy and the set has zero mean.
    bool unit_energy_zero_mean(double tol = 1e-12) const;

    /// Nearest point in Euclidean distance; ties go to the lowest index.
    int nearest(cplx value) const;

private:
    Constellation(std::vector<cplx> points, std::vector<unsigned> labels);

    std::vector<cplx> points_;
    std::vector<unsigned> labels_;
    std::vector<int> index_of_label_;
    int bits_per_symbol_ = 0;
};

SymbolFrame map_bits(const BitVector& bits, const Constellation& constellation);

struct SliceResult {
    SymbolFrame symbols;
    BitVector bits;
};

SliceResult slice(const CVector& soft, const Constellation& constellation);

/// Counter-based seed derivation. Every (master, trial, stream) triple maps
/// to an independent, reproducible engine regardless of evaluation order.
struct SeedSpec {
    std::uint64_t master_seed = 0;

    std::uint64_t derive(std::uint64_t trial_index, std::uint64_t stream_tag) const;
    std::mt19937_64 engine(std::uint64_t trial_index, std::uint64_t stream_tag) const;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream tags used by the simulator. The frame index occupies the low
/// 32 bits so each frame gets its own stream.
enum class Stream : std::uint32_t {
    Channel = 1,
    Pilot = 2,
    DataBits = 3,
    Noise = 4,
    Diagnostic = 5,
};

constexpr std::uint64_t stream_tag(Stream kind, std::uint32_t index = 0) {
    return (static_cast<std::uint64_t>(kind) << 32) | index;
}

BitVector random_bits(std::size_t count, std::mt19937_64& rng);
SymbolFrame random_symbols(int count, const Constellation& constellation, std::mt19937_64& rng);

}  // namespace ddsim
