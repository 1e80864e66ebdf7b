#include "ddsim/frame.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace ddsim {

FrameConfig make_config(int M, int N, double delta_f, double f_c) {
    if (M < 1 || N < 1) {
        throw ConfigError("frame geometry needs M >= 1 and N >= 1");
    }
    if (!(delta_f > 0.0) || !(f_c > 0.0)) {
        throw ConfigError("subcarrier spacing and carrier frequency must be positive");
    }
    return FrameConfig{M, N, delta_f, f_c};
}

cplx unit_phasor(std::int64_t num, std::int64_t den) {
    std::int64_t r = num % den;
    if (r < 0) r += den;
    // Fold to (-den/2, den/2] so the argument stays small.
    if (2 * r > den) r -= den;
    const double angle = kTwoPi * static_cast<double>(r) / static_cast<double>(den);
    return {std::cos(angle), std::sin(angle)};
}

Constellation::Constellation(std::vector<cplx> points, std::vector<unsigned> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
    const auto order = static_cast<unsigned>(points_.size());
    if (order >= 2 && std::has_single_bit(order)) {
        bits_per_symbol_ = std::countr_zero(order);
    }
    index_of_label_.assign(points_.size(), -1);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        index_of_label_[labels_[i]] = static_cast<int>(i);
    }
}

Constellation Constellation::psk(int order) {
    if (order < 2) {
        throw ConfigError("PSK order must be at least 2");
    }
    std::vector<cplx> points(order);
    for (int m = 0; m < order; ++m) {
        points[m] = unit_phasor(m, order);
    }
    std::vector<unsigned> labels(order);
    for (int m = 0; m < order; ++m) {
        labels[m] = static_cast<unsigned>(m) ^ (static_cast<unsigned>(m) >> 1);
    }
    if (!std::has_single_bit(static_cast<unsigned>(order))) {
        // Non power-of-two orders carry no bit labelling.
        for (int m = 0; m < order; ++m) labels[m] = static_cast<unsigned>(m);
    }
    return Constellation(std::move(points), std::move(labels));
}

Constellation Constellation::custom(std::vector<cplx> points) {
    if (points.size() < 2) {
        throw ConfigError("a constellation needs at least two points");
    }
    std::vector<unsigned> labels(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) labels[i] = static_cast<unsigned>(i);
    return Constellation(std::move(points), std::move(labels));
}

double Constellation::max_modulus_error() const {
    double worst = 0.0;
    for (const auto& p : points_) worst = std::max(worst, std::abs(std::abs(p) - 1.0));
    return worst;
}

double Constellation::mean_magnitude() const {
    cplx sum{0.0, 0.0};
    for (const auto& p : points_) sum += p;
    return std::abs(sum) / static_cast<double>(points_.size());
}

bool Constellation::unit_energy_zero_mean(double tol) const {
    return max_modulus_error() < tol && mean_magnitude() < tol;
}

int Constellation::nearest(cplx value) const {
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < order(); ++i) {
        const double d = std::norm(value - points_[i]);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

SymbolFrame map_bits(const BitVector& bits, const Constellation& constellation) {
    const int bps = constellation.bits_per_symbol();
    if (bps == 0) {
        throw ConfigError("constellation order is not a power of two; no bit mapping");
    }
    if (bits.size() % static_cast<std::size_t>(bps) != 0) {
        throw ShapeError("bit count is not a multiple of bits per symbol");
    }
    const auto count = static_cast<Eigen::Index>(bits.size() / bps);
    SymbolFrame symbols(count);
    for (Eigen::Index s = 0; s < count; ++s) {
        unsigned label = 0;
        for (int b = 0; b < bps; ++b) {
            label = (label << 1) | (bits[s * bps + b] & 1u);
        }
        symbols[s] = constellation.point(constellation.index_of_label(label));
    }
    return symbols;
}

SliceResult slice(const CVector& soft, const Constellation& constellation) {
    const int bps = constellation.bits_per_symbol();
    SliceResult out;
    out.symbols.resize(soft.size());
    out.bits.reserve(static_cast<std::size_t>(soft.size()) * bps);
    for (Eigen::Index s = 0; s < soft.size(); ++s) {
        const int idx = constellation.nearest(soft[s]);
        out.symbols[s] = constellation.point(idx);
        const unsigned label = constellation.label(idx);
        for (int b = bps - 1; b >= 0; --b) {
            out.bits.push_back(static_cast<std::uint8_t>((label >> b) & 1u));
        }
    }
    return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t SeedSpec::derive(std::uint64_t trial_index, std::uint64_t stream_tag) const {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ trial_index);
    h = splitmix64(h ^ stream_tag);
    return h;
}

std::mt19937_64 SeedSpec::engine(std::uint64_t trial_index, std::uint64_t stream_tag) const {
    return std::mt19937_64(derive(trial_index, stream_tag));
}

BitVector random_bits(std::size_t count, std::mt19937_64& rng) {
    BitVector bits(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 64 == 0) word = rng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return bits;
}

SymbolFrame random_symbols(int count, const Constellation& constellation, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, constellation.order() - 1);
    SymbolFrame s(count);
    for (int i = 0; i < count; ++i) s[i] = constellation.point(pick(rng));
    return s;
}

}  // namespace ddsim
