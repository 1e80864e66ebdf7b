#include "ddsim/channel.hpp"

#include <doctest.h>

#include <numeric>

using namespace ddsim;

namespace {

const FrameConfig kCfg{13, 16, 30e3, 2.4e9};

// Direct 2D trapezoid of ((w_rx *s h_i delta) *s w_tx)(k/B, l/T).
cplx brute_tap(const PulseFilter& pulse, const Path& p, int k, int l, double half_width, int ppb) {
    const double B = kCfg.bandwidth(), T = kCfg.duration();
    const auto a = twist_delta(matched_filter(pulse, kCfg), p);
    const auto w = transmit_filter(pulse, kCfg);
    const double tau = k / B, nu = l / T;
    const double t0 = std::max(p.delay, tau) - half_width / B, t1 = std::min(p.delay, tau) + half_width / B;
    const double v0 = std::max(p.doppler, nu) - half_width / T, v1 = std::min(p.doppler, nu) + half_width / T;
    if (t1 <= t0 || v1 <= v0) return {};
    const int nt = static_cast<int>(std::ceil((t1 - t0) * B * ppb));
    const int nv = static_cast<int>(std::ceil((v1 - v0) * T * ppb));
    const double ht = (t1 - t0) / nt, hv = (v1 - v0) / nv;
    cplx sum{};
    for (int i = 0; i <= nt; ++i) {
        const double tp = t0 + i * ht;
        const double wi = (i == 0 || i == nt) ? 0.5 : 1.0;
        for (int j = 0; j <= nv; ++j) {
            const double vp = v0 + j * hv;
            const double wj = (j == 0 || j == nv) ? 0.5 : 1.0;
            sum += wi * wj * a(tp, vp) * w(tau - tp, nu - vp) * std::polar(1.0, kTwoPi * vp * (tau - tp));
        }
    }
    return sum * ht * hv;
}

SampleFrame shift(const SampleFrame& x, int k, int l) {
    return apply_channel(DDTaps::single(static_cast<int>(x.size()), k, l, 1.0), x);
}

}  // namespace

TEST_CASE("Veh-A profile") {
    const auto pdp = PowerDelayProfile::veh_a();
    REQUIRE(pdp.delays_s.size() == 6);
    CHECK(pdp.delays_s[5] == doctest::Approx(2.51e-6));
    CHECK(pdp.powers_db[3] == -10.0);
    const auto amp = pdp.amplitudes();
    CHECK(std::inner_product(amp.begin(), amp.end(), amp.begin(), 0.0) == doctest::Approx(1.0));
    CHECK(amp[0] / amp[1] == doctest::Approx(std::pow(10.0, 1.0 / 20.0)));

    const auto file = PowerDelayProfile::load(std::string(DDSIM_DATA_DIR) + "/veh_a.txt");
    REQUIRE(file.delays_s.size() == pdp.delays_s.size());
    for (std::size_t i = 0; i < file.delays_s.size(); ++i) {
        CHECK(file.delays_s[i] == doctest::Approx(pdp.delays_s[i]).epsilon(1e-12));
        CHECK(file.powers_db[i] == pdp.powers_db[i]);
    }
    CHECK_THROWS_AS(PowerDelayProfile::parse("0.1\n"), ConfigError);
    CHECK_THROWS_AS(PowerDelayProfile::parse("# nothing\n\n"), ConfigError);
}

TEST_CASE("path draws respect the profile and Doppler bound") {
    std::mt19937_64 a(5), b(5);
    const auto p = veh_a_paths(a, 815.0);
    const auto q = veh_a_paths(b, 815.0);
    const auto amp = PowerDelayProfile::veh_a().amplitudes();
    REQUIRE(p.paths.size() == 6);
    CHECK(p.tau_max == doctest::Approx(2.51e-6));
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(p.paths[i].doppler) <= 815.0);
        CHECK(std::abs(p.paths[i].gain) == doctest::Approx(amp[i]));
        CHECK(p.paths[i].gain == q.paths[i].gain);
    }
    std::mt19937_64 c(5);
    CHECK_THROWS_AS(veh_a_paths(c, -1.0), ConfigError);
}

TEST_CASE("evolution") {
    PathSet ps;
    ps.paths = {Path{1.09e-6, 815.0, cplx(0.3, 0.4)}, Path{0.0, -400.0, cplx(1, 0)}};
    ps.tau_max = 1.09e-6;
    const auto same = evolve(ps, 0, kCfg);
    CHECK(same.paths[0].delay == ps.paths[0].delay);
    CHECK(same.paths[0].gain == ps.paths[0].gain);

    const auto one = evolve(ps, 1, kCfg);
    // (815 / 2.4e9) * (16 / 30e3) = 1.8111e-10 s per frame.
    CHECK(one.paths[0].delay - ps.paths[0].delay == doctest::Approx(1.81111e-10).epsilon(1e-4));
    CHECK(one.paths[0].doppler == 815.0);
    const double c = kSpeedOfLight;
    CHECK(one.paths[0].gain.real() ==
          doctest::Approx(0.3 * (1 + c * 1.09e-6) / (1 + c * one.paths[0].delay)));

    const auto two = evolve(ps, 2, kCfg);
    const auto twice = evolve(one, 1, kCfg);
    for (int i = 0; i < 2; ++i) {
        CHECK(twice.paths[i].delay == doctest::Approx(two.paths[i].delay).epsilon(1e-14));
        CHECK(std::abs(twice.paths[i].gain - two.paths[i].gain) < 1e-14);
    }
}

TEST_CASE("pulse shapes") {
    const auto g = PulseFilter::gaussian_sinc();
    CHECK(std::abs(g.shape(1.5) / g.shape(0.0)) == doctest::Approx(1e-2).epsilon(1e-6));
    double e = 0.0;
    for (double x = -20; x <= 20; x += 1e-3) e += g.shape(x) * g.shape(x) * 1e-3;
    CHECK(e == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(g.shape(g.support_half_width())) < 1.01e-5 * g.shape(0.0));
    CHECK(std::isinf(PulseFilter::sinc().support_half_width()));
    CHECK(sinc(0.0) == 1.0);
    CHECK(std::abs(sinc(3.0)) < 1e-15);
}

TEST_CASE("effective taps match a brute-force 2D twisted convolution") {
    const auto pulse = PulseFilter::gaussian_sinc();
    const Path p{0.71e-6, 523.0, cplx(0.6, -0.3)};
    PathSet ps;
    ps.paths = {p};
    ps.tau_max = p.delay;
    const DDBox box{-1, 2, -2, 2};
    const auto h = effective_taps(pulse, ps, kCfg, box);
    for (int k = box.k_lo; k <= box.k_hi; ++k) {
        for (int l = -1; l <= 1; ++l) {
            CAPTURE(k);
            CAPTURE(l);
            CHECK(std::abs(h.at(k, l) - brute_tap(pulse, p, k, l, pulse.support_half_width(), 24)) < 1e-6);
        }
    }
}

TEST_CASE("sinc pulse: on-grid delay without Doppler") {
    // Rect spectra: the delay factor is a Kronecker delta at k = 2, and the
    // Doppler factor at l = 0 is the band overlap 1 - k/MN.
    PathSet ps;
    ps.paths = {Path{2.0 / kCfg.bandwidth(), 0.0, cplx(0.5, 0.5)}};
    ps.tau_max = ps.paths[0].delay;
    const auto h = effective_taps(PulseFilter::sinc(), ps, kCfg, DDBox{-2, 5, -3, 3});
    for (int k = -2; k <= 5; ++k) {
        for (int l = -3; l <= 3; ++l) {
            if (k != 2) CHECK(std::abs(h.at(k, l)) < 1e-12);
        }
    }
    CHECK(std::abs(h.at(2, 0)) == doctest::Approx(std::abs(cplx(0.5, 0.5)) * (1.0 - 2.0 / 208)).epsilon(1e-12));
}

TEST_CASE("sinc closed form agrees with a long-window quadrature") {
    const auto pulse = PulseFilter::sinc();
    const Path p{0.37 / kCfg.bandwidth(), 0.21 / kCfg.duration(), cplx(1, 0)};
    PathSet ps;
    ps.paths = {p};
    ps.tau_max = p.delay;
    const auto h = effective_taps(pulse, ps, kCfg, DDBox{0, 1, 0, 1});
    // Sinc tails decay as 1/x^2 in the product; a 60-bin window leaves ~1e-2.
    for (int k = 0; k <= 1; ++k) {
        const cplx ref = brute_tap(pulse, p, k, 0, 60.0, 6);
        CHECK(std::abs(h.at(k, 0) - ref) < 2e-2);
    }
}

TEST_CASE("quadrature refinement failure is reported") {
    PathSet ps;
    ps.paths = {Path{0.5e-6, 300.0, cplx(1, 0)}};
    ps.tau_max = 0.5e-6;
    const QuadratureSpec tight{2, 1e-15};
    CHECK_THROWS_AS(effective_taps(PulseFilter::gaussian_sinc(), ps, kCfg, DDBox{0, 1, 0, 0}, tight), NumericalError);
}

TEST_CASE("support box from the spread") {
    const auto b3 = DDBox::for_spread(kCfg, 2.51e-6, 815.0, 3);
    CHECK(b3.k_lo == -3);
    CHECK(b3.k_hi == 4);
    CHECK(b3.l_lo == -4);
    CHECK(b3.l_hi == 4);
    const auto b1 = DDBox::for_spread(kCfg, 2.51e-6, 815.0, 1);
    CHECK(b1.size() == 20);
    CHECK_THROWS_AS(DDBox::for_spread(kCfg, 2.51e-6, 815.0, -1), ConfigError);
}

TEST_CASE("apply_channel matches the DD system model") {
    std::mt19937_64 rng(11);
    const int mn = kCfg.mn();
    const auto x = random_symbols(mn, Constellation::psk(4), rng);
    const cplx h{0.3, -0.7};
    const int k0 = 3, l0 = -2;
    const auto y = apply_channel(DDTaps::single(mn, k0, l0, h), x);
    for (int n = 0; n < mn; ++n) {
        const int src = ((n - k0) % mn + mn) % mn;
        CHECK(std::abs(y[n] - h * x[src] * unit_phasor(static_cast<std::int64_t>(l0) * (n - k0), mn)) < 1e-12);
    }
}

TEST_CASE("DD shifts commute up to exp(j2pi (l1 k2 - l2 k1)/MN)") {
    std::mt19937_64 rng(2);
    const int mn = kCfg.mn();
    const auto x = random_symbols(mn, Constellation::psk(4), rng);
    const int k1 = 2, l1 = 5, k2 = -3, l2 = 7;
    const auto ab = shift(shift(x, k2, l2), k1, l1);
    const auto ba = shift(shift(x, k1, l1), k2, l2);
    const cplx phase = unit_phasor(static_cast<std::int64_t>(l1) * k2 - static_cast<std::int64_t>(l2) * k1, mn);
    CHECK((ab - phase * ba).norm() < 1e-11);
}

TEST_CASE("noise statistics") {
    CHECK(noise_variance(10.0) == doctest::Approx(0.1));
    CHECK(noise_variance(std::numeric_limits<double>::infinity()) == 0.0);
    std::mt19937_64 rng(9);
    SampleFrame y = SampleFrame::Zero(200000);
    add_noise(y, 0.25, rng);
    CHECK(y.squaredNorm() / y.size() == doctest::Approx(0.25).epsilon(0.01));
    CHECK(std::abs(y.mean()) < 0.01);
    CHECK(y.real().squaredNorm() / y.size() == doctest::Approx(0.125).epsilon(0.02));
}
