#include "ddsim/validation.hpp"

#include "ddsim/ambiguity.hpp"
#include "ddsim/channel.hpp"
#include "ddsim/equalization.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ddsim {

namespace {

const SchemeTag kSchemes[] = {SchemeTag::OFDM, SchemeTag::AFDM, SchemeTag::OTSM, SchemeTag::ZakOTFS};

std::string sci(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

DDTaps random_taps(int mn, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> k0(-4, 4), span(1, 6);
    std::normal_distribution<double> g(0.0, 1.0);
    const int k_lo = k0(rng), l_lo = k0(rng);
    DDTaps h(mn, DDBox{k_lo, k_lo + span(rng), l_lo, l_lo + span(rng)});
    for (auto& v : h.values.reshaped()) v = cplx(g(rng), g(rng));
    return h;
}

}  // namespace

std::vector<CheckResult> check_orthonormality(const FrameConfig& cfg) {
    std::vector<CheckResult> out;
    for (auto tag : kSchemes) {
        const GramReport r = gram_check(BasisScheme{tag, cfg, {}});
        out.push_back({"orthonormality " + to_string(tag), r.max_deviation < 1e-10,
                       "max |<phi_i,phi_j> - delta| = " + sci(r.max_deviation)});
    }
    return out;
}

CheckResult check_corrupted_basis(const FrameConfig& cfg) {
    const Basis basis(BasisScheme{SchemeTag::ZakOTFS, cfg, {}});
    CMatrix phi = basis.synthesis();
    const int col = basis.default_pilot_index();
    const int row = col % cfg.M;  // first sample on the pulsone support
    phi(row, col) = -phi(row, col);
    const GramReport r = gram_check(phi);
    const bool located = r.i == col || r.j == col;
    std::ostringstream d;
    d << "flipped entry (" << row << "," << col << "): gram deviation " << sci(r.max_deviation) << " at (i,j) = ("
      << r.i << "," << r.j << ")";
    return {"corrupted basis is rejected", r.max_deviation > 1e-3 && located, d.str()};
}

std::vector<CheckResult> check_twisted_convolution(const FrameConfig& cfg, int cases, std::uint64_t seed) {
    std::vector<CheckResult> out;
    const SeedSpec s{seed};
    const auto psk = Constellation::psk(4);
    for (auto tag : kSchemes) {
        const Basis basis(BasisScheme{tag, cfg, {}});
        double worst = 0.0;
        for (int c = 0; c < cases; ++c) {
            auto rng = s.engine(static_cast<std::uint64_t>(c), stream_tag(Stream::Diagnostic, 1));
            const DDTaps h = random_taps(cfg.mn(), rng);
            const SampleFrame x = basis.modulate(random_symbols(cfg.mn(), psk, rng));
            const AmbiguitySurface lhs = ambiguity_torus(apply_channel(h, x), x);
            const AmbiguitySurface rhs = twisted_convolve_discrete(h, self_ambiguity(x));
            worst = std::max(worst, (lhs.values - rhs.values).cwiseAbs().maxCoeff());
        }
        out.push_back({"twisted convolution " + to_string(tag), worst < 1e-10, "max error " + sci(worst)});
    }
    return out;
}

std::vector<CheckResult> check_system_equivalence(const FrameConfig& cfg, int cases, std::uint64_t seed) {
    std::vector<CheckResult> out;
    const SeedSpec s{seed};
    const auto psk = Constellation::psk(4);
    for (auto tag : kSchemes) {
        const Basis basis(BasisScheme{tag, cfg, {}});
        double worst = 0.0;
        for (int c = 0; c < cases; ++c) {
            auto rng = s.engine(static_cast<std::uint64_t>(c), stream_tag(Stream::Diagnostic, 2));
            const DDTaps h = random_taps(cfg.mn(), rng);
            const SymbolFrame sym = random_symbols(cfg.mn(), psk, rng);
            const CVector gs = build_G(h, basis).G * sym;
            const SampleFrame y = apply_channel(h, basis.modulate(sym));
            worst = std::max(worst, (y - gs).norm() / gs.norm());
        }
        out.push_back({"time/DD system equivalence " + to_string(tag), worst < 1e-10, "max relative error " + sci(worst)});
    }
    return out;
}

std::vector<CheckResult> check_thumbtack(const FrameConfig& cfg, int trials, std::uint64_t seed) {
    std::vector<CheckResult> out;
    const double bound = 3.0 / std::sqrt(static_cast<double>(trials));
    for (auto tag : kSchemes) {
        const Basis basis(BasisScheme{tag, cfg, {}});
        const auto d = expected_thumbtack_diagnostic(basis, Constellation::psk(4), trials, SeedSpec{seed});
        const bool pass = d.max_origin_error < 1e-12 && d.max_off_origin < bound;
        out.push_back({"thumbtack " + to_string(tag), pass,
                       "origin error " + sci(d.max_origin_error) + ", max off-origin " + sci(d.max_off_origin) +
                           " (bound " + sci(bound) + ")"});
    }
    return out;
}

CheckResult check_thumbtack_negative_control(const FrameConfig& cfg, int trials, std::uint64_t seed) {
    const Basis basis(BasisScheme{SchemeTag::ZakOTFS, cfg, {}});
    const auto skewed = Constellation::custom({cplx(1.0, 0.0), cplx(0.0, 1.0)});
    const auto d = expected_thumbtack_diagnostic(basis, skewed, trials, SeedSpec{seed});
    const double bound = 3.0 / std::sqrt(static_cast<double>(trials));
    return {"thumbtack negative control {1, j}", d.max_off_origin >= bound,
            "max off-origin " + sci(d.max_off_origin) + " must exceed " + sci(bound)};
}

CheckResult check_roots_of_unity(int max_n) {
    double worst = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        for (int k = -n + 1; k < 2 * n; ++k) {
            cplx sum{0.0, 0.0};
            for (int m = 0; m < n; ++m) sum += unit_phasor(static_cast<std::int64_t>(k) * m, n);
            const double expect = (k % n == 0) ? n : 0.0;
            worst = std::max(worst, std::abs(sum - expect));
        }
    }
    return {"roots of unity sum, N <= " + std::to_string(max_n), worst < 1e-10, "max error " + sci(worst)};
}

std::vector<CheckResult> run_validation(const ValidationOptions& o) {
    std::vector<CheckResult> all;
    auto append = [&all](std::vector<CheckResult> v) { all.insert(all.end(), v.begin(), v.end()); };
    append(check_orthonormality(o.config));
    all.push_back(check_corrupted_basis(o.config));
    append(check_twisted_convolution(o.config, o.random_cases, o.seed));
    append(check_system_equivalence(o.config, o.random_cases, o.seed));
    append(check_thumbtack(o.config, o.thumbtack_trials, o.seed));
    all.push_back(check_thumbtack_negative_control(o.config, o.thumbtack_trials, o.seed));
    all.push_back(check_roots_of_unity(o.max_roots_n));
    return all;
}

}  // namespace ddsim
