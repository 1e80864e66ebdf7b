#pragma once

#include "ddsim/frame.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ddsim {

enum class SchemeTag { OFDM, AFDM, OTSM, ZakOTFS };

std::string to_string(SchemeTag tag);
SchemeTag parse_scheme(std::string_view name);

/// Exact rational p/q used for the AFDM chirp coefficients.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
};

/// AFDM chirp coefficients c1 (in n^2) and c2 (in i^2). Unset values
/// resolve to 1/(2MN), the OCDM specialization.
struct AfdmParams {
    std::optional<Rational> c1;
    std::optional<Rational> c2;

    static AfdmParams ocdm(const FrameConfig& cfg);
    /// c1 = c2 = (2 l_half + 1)/(2MN): each delay step moves the chirp by
    /// 2 l_half + 1 Doppler bins, so a box with |l| <= l_half does not alias.
    static AfdmParams for_doppler_span(const FrameConfig& cfg, int l_half);
    /// c1 = c2 = delta/MN; requires gcd(delta, MN) = 1.
    static AfdmParams dft_p_fdma(const FrameConfig& cfg, std::int64_t delta);
};

struct BasisScheme {
    SchemeTag tag = SchemeTag::ZakOTFS;
    FrameConfig config;
    AfdmParams afdm;
};

/// Element i of the scheme's orthonormal basis, evaluated at n in [0, MN).
///
/// OFDM:     (1/sqrt(M)) e^{j2pi i n/M} on the block floor(n/M) == floor(i/M).
/// AFDM:     (1/sqrt(MN)) e^{j2pi (c1 n^2 + c2 i^2 + n i/MN)}.
/// OTSM:     (1/sqrt(N)) (-1)^{popcount(floor(i/M) & floor(n/M))} on n == i (mod M).
///           Walsh rows are in natural (Hadamard) order of the binary index.
/// Zak-OTFS: (1/sqrt(N)) e^{j2pi floor(i/M) floor(n/M)/N} on n == i (mod M).
///
/// Throws ConfigError for OTSM when N is not a power of two.
SampleFrame basis_element(const BasisScheme& scheme, int i);

/// Precomputed synthesis matrix (columns are basis elements). Construction
/// is O((MN)^2); reuse one instance per scheme.
class Basis {
public:
    explicit Basis(BasisScheme scheme);

    const BasisScheme& scheme() const { return scheme_; }
    SchemeTag tag() const { return scheme_.tag; }
    const FrameConfig& config() const { return scheme_.config; }
    int mn() const { return scheme_.config.mn(); }
    const CMatrix& synthesis() const { return synthesis_; }

    /// x[n] = sum_i s[i] phi_i[n].
    SampleFrame modulate(const SymbolFrame& s) const;
    /// <phi_i, y> for every i.
    CVector project(const SampleFrame& y) const;

    /// Index of the pilot basis element: floor(M/2) + M*floor(N/2).
    int default_pilot_index() const;

private:
    BasisScheme scheme_;
    CMatrix synthesis_;
};

struct GramReport {
    double max_deviation = 0.0;
    int i = 0;
    int j = 0;
};

/// Max |<phi_i, phi_j> - delta[i-j]| over all pairs, with its location.
GramReport gram_check(const CMatrix& synthesis);
GramReport gram_check(const BasisScheme& scheme);

/// Largest |phi_i[n]| deviation from its own support mean, over bases whose
/// elements have a constant envelope on their support.
double envelope_spread(const CMatrix& synthesis);

}  // namespace ddsim
