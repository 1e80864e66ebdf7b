#include "ddsim/modulation.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numeric>

namespace ddsim {

std::string to_string(SchemeTag tag) {
    switch (tag) {
        case SchemeTag::OFDM: return "OFDM";
        case SchemeTag::AFDM: return "AFDM";
        case SchemeTag::OTSM: return "OTSM";
        case SchemeTag::ZakOTFS: return "ZakOTFS";
    }
    return "?";
}

SchemeTag parse_scheme(std::string_view name) {
    std::string key;
    for (char c : name) {
        if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (key == "ofdm") return SchemeTag::OFDM;
    if (key == "afdm") return SchemeTag::AFDM;
    if (key == "otsm") return SchemeTag::OTSM;
    if (key == "zakotfs" || key == "zak") return SchemeTag::ZakOTFS;
    throw ConfigError("unknown modulation scheme: " + std::string(name));
}

AfdmParams AfdmParams::ocdm(const FrameConfig& cfg) {
    const Rational c{1, 2 * static_cast<std::int64_t>(cfg.mn())};
    return AfdmParams{c, c};
}

AfdmParams AfdmParams::for_doppler_span(const FrameConfig& cfg, int l_half) {
    if (l_half < 0) throw ConfigError("Doppler half-width must be non-negative");
    const Rational c{2 * static_cast<std::int64_t>(l_half) + 1, 2 * static_cast<std::int64_t>(cfg.mn())};
    return AfdmParams{c, c};
}

AfdmParams AfdmParams::dft_p_fdma(const FrameConfig& cfg, std::int64_t delta) {
    if (std::gcd(delta, static_cast<std::int64_t>(cfg.mn())) != 1) {
        throw ConfigError("DFT-p-FDMA needs gcd(delta, MN) = 1");
    }
    const Rational c{delta, cfg.mn()};
    return AfdmParams{c, c};
}

namespace {

void require_index(const BasisScheme& scheme, int i) {
    if (i < 0 || i >= scheme.config.mn()) {
        throw ShapeError("basis index out of range");
    }
}

void require_supported(const BasisScheme& scheme) {
    if (scheme.config.M < 1 || scheme.config.N < 1) {
        throw ConfigError("basis needs a valid frame configuration");
    }
    if (scheme.tag == SchemeTag::OTSM && !std::has_single_bit(static_cast<unsigned>(scheme.config.N))) {
        throw ConfigError("OTSM needs N to be a power of two (Walsh-Hadamard rows)");
    }
    if (scheme.tag == SchemeTag::AFDM) {
        for (const auto& c : {scheme.afdm.c1, scheme.afdm.c2}) {
            if (c && c->den <= 0) throw ConfigError("AFDM coefficient denominator must be positive");
        }
    }
}

// Fractional part of (p * v) / q, as an exact numerator over q.
std::int64_t frac_num(const Rational& c, std::int64_t v) {
    std::int64_t r = (c.num % c.den) * (v % c.den) % c.den;
    return r < 0 ? r + c.den : r;
}

cplx afdm_value(const BasisScheme& scheme, Rational c1, Rational c2, std::int64_t n, std::int64_t i) {
    const std::int64_t mn = scheme.config.mn();
    // Common denominator keeps the combined phase exact.
    const std::int64_t l12 = std::lcm(c1.den, c2.den);
    const std::int64_t den = std::lcm(l12, mn);
    const std::int64_t a = frac_num(c1, (n * n) % c1.den) * (den / c1.den);
    const std::int64_t b = frac_num(c2, (i * i) % c2.den) * (den / c2.den);
    const std::int64_t c = ((n * i) % mn) * (den / mn);
    return unit_phasor((a + b + c) % den, den) / std::sqrt(static_cast<double>(mn));
}

}  // namespace

SampleFrame basis_element(const BasisScheme& scheme, int i) {
    require_supported(scheme);
    require_index(scheme, i);
    const int M = scheme.config.M;
    const int N = scheme.config.N;
    const int mn = M * N;
    SampleFrame phi = SampleFrame::Zero(mn);

    switch (scheme.tag) {
        case SchemeTag::OFDM: {
            const double scale = 1.0 / std::sqrt(static_cast<double>(M));
            const int block = i / M;
            for (int n = block * M; n < (block + 1) * M; ++n) {
                phi[n] = scale * unit_phasor(static_cast<std::int64_t>(i) * n, M);
            }
            break;
        }
        case SchemeTag::AFDM: {
            const auto def = AfdmParams::ocdm(scheme.config);
            const Rational c1 = scheme.afdm.c1.value_or(*def.c1);
            const Rational c2 = scheme.afdm.c2.value_or(*def.c2);
            for (int n = 0; n < mn; ++n) phi[n] = afdm_value(scheme, c1, c2, n, i);
            break;
        }
        case SchemeTag::OTSM: {
            const double scale = 1.0 / std::sqrt(static_cast<double>(N));
            const unsigned row = static_cast<unsigned>(i / M);
            for (int n = i % M; n < mn; n += M) {
                const unsigned col = static_cast<unsigned>(n / M);
                phi[n] = (std::popcount(row & col) % 2 == 0) ? scale : -scale;
            }
            break;
        }
        case SchemeTag::ZakOTFS: {
            const double scale = 1.0 / std::sqrt(static_cast<double>(N));
            const std::int64_t tone = i / M;
            for (int n = i % M; n < mn; n += M) {
                phi[n] = scale * unit_phasor(tone * (n / M), N);
            }
            break;
        }
    }
    return phi;
}

Basis::Basis(BasisScheme scheme) : scheme_(std::move(scheme)) {
    require_supported(scheme_);
    const int mn = scheme_.config.mn();
    synthesis_.resize(mn, mn);
    for (int i = 0; i < mn; ++i) synthesis_.col(i) = basis_element(scheme_, i);
}

SampleFrame Basis::modulate(const SymbolFrame& s) const {
    if (s.size() != mn()) throw ShapeError("symbol frame length must equal MN");
    return synthesis_ * s;
}

CVector Basis::project(const SampleFrame& y) const {
    if (y.size() != mn()) throw ShapeError("sample frame length must equal MN");
    return synthesis_.adjoint() * y;
}

int Basis::default_pilot_index() const {
    const auto& c = scheme_.config;
    return c.M / 2 + c.M * (c.N / 2);
}

GramReport gram_check(const CMatrix& synthesis) {
    const CMatrix gram = synthesis.adjoint() * synthesis;
    GramReport report;
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
        for (Eigen::Index i = 0; i < gram.rows(); ++i) {
            const double dev = std::abs(gram(i, j) - (i == j ? 1.0 : 0.0));
            if (dev > report.max_deviation) {
                report = {dev, static_cast<int>(i), static_cast<int>(j)};
            }
        }
    }
    return report;
}

GramReport gram_check(const BasisScheme& scheme) { return gram_check(Basis(scheme).synthesis()); }

double envelope_spread(const CMatrix& synthesis) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < synthesis.cols(); ++i) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (Eigen::Index n = 0; n < synthesis.rows(); ++n) {
            const double a = std::abs(synthesis(n, i));
            if (a < 1e-14) continue;
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        if (hi > 0.0) worst = std::max(worst, hi - lo);
    }
    return worst;
}

}  // namespace ddsim
