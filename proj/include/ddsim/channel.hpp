#pragma once

#include "ddsim/frame.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace ddsim {

constexpr double kSpeedOfLight = 299792458.0;

/// One physical propagation path: delay (s), Doppler (Hz), complex gain.
struct Path {
    double delay = 0.0;
    double doppler = 0.0;
    cplx gain{0.0, 0.0};
};

struct PathSet {
    std::vector<Path> paths;
    double tau_max = 0.0;  ///< max |delay| over paths
    double nu_max = 0.0;   ///< configured Doppler spread bound
};

/// Delay / relative-power table of a tapped-delay-line model.
struct PowerDelayProfile {
    std::vector<double> delays_s;
    std::vector<double> powers_db;

    /// 3GPP Vehicular-A, six paths.
    static PowerDelayProfile veh_a();
    /// Plain-text table: one "delay_us power_db" row per path; '#' starts
    /// a comment; blank lines are skipped.
    static PowerDelayProfile load(const std::string& path);
    static PowerDelayProfile parse(const std::string& text);

    /// Amplitudes 10^(dB/20), normalized so that their squares sum to 1.
    std::vector<double> amplitudes() const;
};

/// Draw one channel realization: gains alpha_i e^{j psi_i} with psi_i
/// uniform in [-pi, pi), Dopplers nu_max cos(theta_i) with theta_i uniform.
PathSet draw_paths(const PowerDelayProfile& profile, std::mt19937_64& rng, double nu_max);
PathSet veh_a_paths(std::mt19937_64& rng, double nu_max);

/// Advance every path by f_prime frame durations:
///   tau_i(f') = tau_i + (nu_i / f_c) f' T
///   h_i(f')   = h_i (1 + c|tau_i|) / (1 + c|tau_i(f')|)
/// Dopplers are unchanged.
PathSet evolve(const PathSet& paths, int f_prime, const FrameConfig& cfg,
               double c = kSpeedOfLight);

/// Separable DD pulse w(tau, nu) = sqrt(BT) g(B tau) g(T nu), where the
/// one-dimensional shape g (argument in bins) has unit energy.
class PulseFilter {
public:
    enum class Kind { Sinc, GaussianSinc, Custom };

    static PulseFilter sinc();
    /// g(x) = A sinc(x) exp(-beta x^2). With no beta given, beta is chosen
    /// so that |g(1.5)| / g(0) = 1e-2 (-40 dB at 1.5 bins).
    static PulseFilter gaussian_sinc(double beta = 0.0);
    /// User shape; must be real and even, and negligible beyond
    /// `half_width` bins. Normalized to unit energy numerically.
    static PulseFilter custom(std::function<double(double)> shape, double half_width);

    Kind kind() const { return kind_; }
    double beta() const { return beta_; }
    /// Unit-energy shape in bin units.
    double shape(double x) const;
    /// Half-width (bins) beyond which |g| < 1e-5 of its peak. Infinite for
    /// the plain sinc.
    double support_half_width() const { return half_width_; }
    /// w(tau, nu) for the frame geometry in `cfg`.
    double evaluate(double tau, double nu, const FrameConfig& cfg) const;

    static double default_beta();

private:
    PulseFilter(Kind kind, double beta, std::function<double(double)> raw, double half_width);

    Kind kind_;
    double beta_;
    std::function<double(double)> raw_;
    double half_width_;
    double amplitude_ = 1.0;
};

double sinc(double x);

/// Continuous DD function (tau, nu) -> complex.
using DDFunction = std::function<cplx(double, double)>;

/// Twisted convolution of `a` with h delta(tau - tau_i) delta(nu - nu_i):
///   (tau, nu) -> h a(tau - tau_i, nu - nu_i) e^{j2pi (nu - nu_i) tau_i}.
DDFunction twist_delta(DDFunction a, const Path& path);

/// Receive matched filter e^{j2pi nu tau} w*(-tau, -nu).
DDFunction matched_filter(const PulseFilter& pulse, const FrameConfig& cfg);
DDFunction transmit_filter(const PulseFilter& pulse, const FrameConfig& cfg);

/// Rectangular region of the DD torus: k in [k_lo, k_hi], l in [l_lo, l_hi].
/// Signed indices map to the torus modulo MN.
struct DDBox {
    int k_lo = 0;
    int k_hi = 0;
    int l_lo = 0;
    int l_hi = 0;

    int k_count() const { return k_hi - k_lo + 1; }
    int l_count() const { return l_hi - l_lo + 1; }
    int size() const { return k_count() * l_count(); }
    bool contains(int k, int l) const { return k >= k_lo && k <= k_hi && l >= l_lo && l <= l_hi; }

    /// k in [-guard, ceil(B tau_max) + guard], l in +-(ceil(T nu_max) + guard).
    static DDBox for_spread(const FrameConfig& cfg, double tau_max, double nu_max, int guard);
    static DDBox full_torus(int mn) { return DDBox{0, mn - 1, 0, mn - 1}; }
};

/// Sampled effective channel h[k, l] on a box.
struct DDTaps {
    int mn = 0;
    DDBox box;
    CMatrix values;  ///< rows k - k_lo, cols l - l_lo

    DDTaps() = default;
    DDTaps(int mn, DDBox box);

    cplx at(int k, int l) const { return values(k - box.k_lo, l - box.l_lo); }
    cplx& at(int k, int l) { return values(k - box.k_lo, l - box.l_lo); }
    double energy() const { return values.squaredNorm(); }

    /// Taps restricted to (or zero-extended onto) another box.
    DDTaps on_box(const DDBox& other) const;
    /// Single tap h[k, l] = value on the smallest box holding it.
    static DDTaps single(int mn, int k, int l, cplx value);
};

struct QuadratureSpec {
    int points_per_bin = 8;
    double tolerance = 1e-6;  ///< allowed change between refinement levels
};

/// h[k, l] = (w~ *s h_phy *s w)(k/B, l/T) over `box`.
///
/// The inner twisted convolution with each Dirac path is closed-form. The
/// outer one against w collapses, for separable pulses, to a product of a
/// delay integral and a Doppler integral; each is evaluated by trapezoidal
/// quadrature over the pulse's truncated support and checked against one
/// refinement doubling. The plain sinc pulse has no compact support and
/// uses its band-limited closed form instead.
DDTaps effective_taps(const PulseFilter& pulse, const PathSet& paths, const FrameConfig& cfg,
                      const DDBox& box, const QuadratureSpec& quad = {});

/// Noise variance per complex sample for unit average signal power.
double noise_variance(double snr_db);

/// c_k[n] = sum_l h[k,l] e^{j2pi l (n-k)/MN}, one row per delay k - box.k_lo.
CMatrix doppler_profiles(const DDTaps& taps);

/// y[n] = sum h[k,l] x[(n-k)_MN] e^{j2pi l (n-k)/MN}, noiseless.
SampleFrame apply_channel(const DDTaps& taps, const SampleFrame& x);
/// As above plus circularly-symmetric Gaussian noise of variance
/// 10^(-snr_db/10). An infinite snr_db adds no noise.
SampleFrame apply_channel(const DDTaps& taps, const SampleFrame& x, std::mt19937_64& rng, double snr_db);

void add_noise(SampleFrame& y, double variance, std::mt19937_64& rng);

}  // namespace ddsim
