#include "ddsim/ambiguity.hpp"

#include <doctest.h>

#include <sstream>

using namespace ddsim;

namespace {
const FrameConfig kCfg{13, 16, 30e3, 2.4e9};

DDTaps random_taps(DDBox box, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    DDTaps h(kCfg.mn(), box);
    for (auto& v : h.values.reshaped()) v = cplx(g(rng), g(rng));
    return h;
}
}  // namespace

TEST_CASE("direct and FFT ambiguity agree") {
    std::mt19937_64 rng(4);
    const auto psk = Constellation::psk(4);
    const auto x = random_symbols(kCfg.mn(), psk, rng);
    const auto y = random_symbols(kCfg.mn(), psk, rng);
    const DDBox box{-3, 4, -5, 5};
    const auto direct = cross_ambiguity(y, x, box);
    const auto torus = ambiguity_torus(y, x);
    for (int k = box.k_lo; k <= box.k_hi; ++k) {
        for (int l = box.l_lo; l <= box.l_hi; ++l) CHECK(std::abs(direct.at(k, l) - torus.at(k, l)) < 1e-12);
    }
    CHECK(torus.at(-3, 2) == torus.at(kCfg.mn() - 3, 2));
    CHECK(direct.at(50, 50) == cplx{});
}

TEST_CASE("twisted convolution with a delta") {
    const cplx c{0.4, -1.2};
    const auto h = DDTaps::single(kCfg.mn(), 3, -2, c);
    const auto out = twisted_convolve_discrete(h, AmbiguitySurface::delta(kCfg.mn()), DDBox{-5, 5, -5, 5});
    for (int k = -5; k <= 5; ++k) {
        for (int l = -5; l <= 5; ++l) {
            CHECK(std::abs(out.at(k, l) - ((k == 3 && l == -2) ? c : cplx{})) < 1e-15);
        }
    }
}

TEST_CASE("A_{Hx,x} = h *sd A_x") {
    std::mt19937_64 rng(8);
    for (auto tag : {SchemeTag::OFDM, SchemeTag::ZakOTFS}) {
        const Basis b(BasisScheme{tag, kCfg, {}});
        const auto x = b.modulate(random_symbols(kCfg.mn(), Constellation::psk(4), rng));
        const auto h = random_taps(DDBox{-2, 3, -4, 1}, rng);
        const DDBox out{-10, 10, -10, 10};
        const auto lhs = cross_ambiguity(apply_channel(h, x), x, out);
        const auto rhs = twisted_convolve_discrete(h, self_ambiguity(x), out);
        CHECK((lhs.values - rhs.values).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("predictable pilots recover the taps exactly") {
    std::mt19937_64 rng(6);
    const DDBox mask{-1, 2, -2, 2};
    const auto h = random_taps(mask, rng);
    const AfdmParams fit = AfdmParams::for_doppler_span(kCfg, 2);
    for (auto tag : {SchemeTag::ZakOTFS, SchemeTag::OTSM, SchemeTag::AFDM}) {
        CAPTURE(to_string(tag));
        const Basis b(BasisScheme{tag, kCfg, fit});
        const SampleFrame x = b.synthesis().col(b.default_pilot_index()) * std::sqrt(208.0);
        const auto est = estimate_taps(apply_channel(h, x), x, mask);
        CHECK(nmse(est, h) < 1e-24);
    }
    // The OCDM chirp maps a delay step onto a one-bin Doppler step; taps
    // on this mask alias into each other.
    const Basis ocdm(BasisScheme{SchemeTag::AFDM, kCfg, AfdmParams::ocdm(kCfg)});
    const SampleFrame x = ocdm.synthesis().col(ocdm.default_pilot_index()) * std::sqrt(208.0);
    CHECK(nmse(estimate_taps(apply_channel(h, x), x, mask), h) > 0.1);
}

TEST_CASE("estimator options and errors") {
    const int mn = kCfg.mn();
    const SampleFrame zero = SampleFrame::Zero(mn);
    CHECK_THROWS_AS(cross_ambiguity(zero, zero, DDBox{}), DegeneratePilotError);
    CHECK_THROWS_AS(cross_ambiguity(SampleFrame::Ones(5), SampleFrame::Ones(6), DDBox{}), ShapeError);
    DDTaps h(mn, DDBox{0, 0, -1, 1});
    h.at(0, 0) = 1.0;
    h.at(0, 1) = 0.01;
    const SampleFrame pilot = Basis(BasisScheme{SchemeTag::ZakOTFS, kCfg, {}}).synthesis().col(110) * std::sqrt(208.0);
    const auto thresholded = estimate_taps(apply_channel(h, pilot), pilot, h.box, EstimatorOptions{0.1});
    CHECK(thresholded.at(0, 1) == cplx{});
    CHECK(std::abs(thresholded.at(0, 0) - 1.0) < 1e-12);
}

TEST_CASE("nmse") {
    DDTaps t(208, DDBox{0, 1, 0, 1});
    t.values.setConstant(cplx(1, 1));
    CHECK(nmse(t, t) == 0.0);
    DDTaps z(208, t.box);
    CHECK(nmse(z, t) == doctest::Approx(1.0));
}

TEST_CASE("thumbtack diagnostic") {
    const Basis b(BasisScheme{SchemeTag::ZakOTFS, kCfg, {}});
    const auto d = expected_thumbtack_diagnostic(b, Constellation::psk(4), 200, SeedSpec{1}, {50, 200});
    CHECK(d.max_origin_error < 1e-12);
    CHECK(std::abs(d.origin - 1.0) < 1e-12);
    CHECK(d.max_off_origin < 3.0 / std::sqrt(200.0));
    REQUIRE(d.checkpoints.size() == 2);
    // Mean magnitude of an average of i.i.d. zero-mean terms scales as trials^-1/2.
    const double slope = std::log(d.checkpoints[1].mean_off_origin / d.checkpoints[0].mean_off_origin) / std::log(4.0);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.2));
    const auto skew = expected_thumbtack_diagnostic(b, Constellation::custom({1.0, cplx(0, 1)}), 200, SeedSpec{1});
    CHECK(skew.max_off_origin > 0.3);
}

TEST_CASE("surface CSV") {
    AmbiguitySurface s(208, DDBox{0, 1, -1, 1});
    s.ref(0, 0) = 1.0;
    std::ostringstream out;
    write_surface_csv(out, s);
    const std::string text = out.str();
    CHECK(text.rfind("k,l,re,im,abs\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 7);
    CHECK(text.find("0,0,1,0,1\n") != std::string::npos);
}
