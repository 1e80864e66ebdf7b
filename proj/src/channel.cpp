#include "ddsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ddsim {

// ---------------------------------------------------------------------------
// Path synthesis and evolution
// ---------------------------------------------------------------------------

PowerDelayProfile PowerDelayProfile::veh_a() {
    return PowerDelayProfile{{0.0, 0.31e-6, 0.71e-6, 1.09e-6, 1.73e-6, 2.51e-6},
                             {0.0, -1.0, -9.0, -10.0, -15.0, -20.0}};
}

PowerDelayProfile PowerDelayProfile::parse(const std::string& text) {
    PowerDelayProfile pdp;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        double delay_us = 0.0;
        double power_db = 0.0;
        if (!(row >> delay_us)) continue;
        if (!(row >> power_db)) {
            throw ConfigError("power-delay profile line " + std::to_string(line_no) + ": expected two columns");
        }
        pdp.delays_s.push_back(delay_us * 1e-6);
        pdp.powers_db.push_back(power_db);
    }
    if (pdp.delays_s.empty()) throw ConfigError("power-delay profile has no paths");
    return pdp;
}

PowerDelayProfile PowerDelayProfile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read power-delay profile: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::vector<double> PowerDelayProfile::amplitudes() const {
    std::vector<double> amp(powers_db.size());
    double total = 0.0;
    for (std::size_t i = 0; i < amp.size(); ++i) {
        amp[i] = std::pow(10.0, powers_db[i] / 20.0);
        total += amp[i] * amp[i];
    }
    for (auto& a : amp) a /= std::sqrt(total);
    return amp;
}

PathSet draw_paths(const PowerDelayProfile& profile, std::mt19937_64& rng, double nu_max) {
    if (nu_max < 0.0) throw ConfigError("Doppler spread must be non-negative");
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    const auto amp = profile.amplitudes();
    PathSet set;
    set.nu_max = nu_max;
    for (std::size_t i = 0; i < amp.size(); ++i) {
        const double psi = angle(rng);
        const double theta = angle(rng);
        Path p;
        p.delay = profile.delays_s[i];
        p.doppler = nu_max * std::cos(theta);
        p.gain = std::polar(amp[i], psi);
        set.paths.push_back(p);
        set.tau_max = std::max(set.tau_max, std::abs(p.delay));
    }
    return set;
}

PathSet veh_a_paths(std::mt19937_64& rng, double nu_max) {
    return draw_paths(PowerDelayProfile::veh_a(), rng, nu_max);
}

PathSet evolve(const PathSet& paths, int f_prime, const FrameConfig& cfg, double c) {
    if (f_prime < 0) throw ConfigError("frame index must be non-negative");
    PathSet out = paths;
    if (f_prime == 0) return out;
    out.tau_max = 0.0;
    const double elapsed = f_prime * cfg.duration();
    for (auto& p : out.paths) {
        const double tau0 = p.delay;
        const double tau1 = tau0 + (p.doppler / cfg.f_c) * elapsed;
        p.gain *= (1.0 + c * std::abs(tau0)) / (1.0 + c * std::abs(tau1));
        p.delay = tau1;
        out.tau_max = std::max(out.tau_max, std::abs(tau1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pulse shapes
// ---------------------------------------------------------------------------

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = kPi * x;
    return std::sin(px) / px;
}

namespace {

constexpr double kTruncation = 1e-5;

double gaussian_sinc_half_width(double beta) {
    // The envelope min(1, 1/(pi x)) e^{-beta x^2} is decreasing in x.
    auto envelope = [beta](double x) { return std::min(1.0, 1.0 / (kPi * x)) * std::exp(-beta * x * x); };
    double x = 0.5;
    while (envelope(x) >= kTruncation) x += 0.01;
    return x;
}

double energy_of(const std::function<double(double)>& g, double half_width) {
    const int n = static_cast<int>(std::ceil(2.0 * half_width * 64.0));
    const double h = 2.0 * half_width / n;
    double sum = 0.0;
    for (int m = 0; m <= n; ++m) {
        const double v = g(-half_width + m * h);
        sum += (m == 0 || m == n ? 0.5 : 1.0) * v * v;
    }
    return sum * h;
}

}  // namespace

PulseFilter::PulseFilter(Kind kind, double beta, std::function<double(double)> raw, double half_width)
    : kind_(kind), beta_(beta), raw_(std::move(raw)), half_width_(half_width) {
    if (kind_ != Kind::Sinc) {
        amplitude_ = 1.0 / std::sqrt(energy_of(raw_, half_width_));
    }
}

double PulseFilter::default_beta() { return std::log(std::abs(ddsim::sinc(1.5)) / 1e-2) / 2.25; }

PulseFilter PulseFilter::sinc() {
    return PulseFilter(Kind::Sinc, 0.0, [](double x) { return ddsim::sinc(x); },
                       std::numeric_limits<double>::infinity());
}

PulseFilter PulseFilter::gaussian_sinc(double beta) {
    if (beta < 0.0) throw ConfigError("Gaussian-sinc beta must be positive");
    if (beta == 0.0) beta = default_beta();
    return PulseFilter(Kind::GaussianSinc, beta,
                       [beta](double x) { return ddsim::sinc(x) * std::exp(-beta * x * x); },
                       gaussian_sinc_half_width(beta));
}

PulseFilter PulseFilter::custom(std::function<double(double)> shape, double half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw ConfigError("custom pulse needs a finite positive support half-width");
    }
    return PulseFilter(Kind::Custom, 0.0, std::move(shape), half_width);
}

double PulseFilter::shape(double x) const { return amplitude_ * raw_(x); }

double PulseFilter::evaluate(double tau, double nu, const FrameConfig& cfg) const {
    const double B = cfg.bandwidth();
    const double T = cfg.duration();
    return std::sqrt(B * T) * shape(B * tau) * shape(T * nu);
}

// ---------------------------------------------------------------------------
// Continuous DD functions
// ---------------------------------------------------------------------------

DDFunction twist_delta(DDFunction a, const Path& path) {
    return [a = std::move(a), path](double tau, double nu) {
        const double dnu = nu - path.doppler;
        return path.gain * a(tau - path.delay, dnu) * std::polar(1.0, kTwoPi * dnu * path.delay);
    };
}

DDFunction transmit_filter(const PulseFilter& pulse, const FrameConfig& cfg) {
    return [pulse, cfg](double tau, double nu) { return cplx(pulse.evaluate(tau, nu, cfg), 0.0); };
}

DDFunction matched_filter(const PulseFilter& pulse, const FrameConfig& cfg) {
    return [pulse, cfg](double tau, double nu) {
        return std::polar(1.0, kTwoPi * nu * tau) * std::conj(cplx(pulse.evaluate(-tau, -nu, cfg), 0.0));
    };
}

// ---------------------------------------------------------------------------
// Effective taps
// ---------------------------------------------------------------------------

DDBox DDBox::for_spread(const FrameConfig& cfg, double tau_max, double nu_max, int guard) {
    if (guard < 0) throw ConfigError("support guard must be non-negative");
    const int k_spread = static_cast<int>(std::ceil(cfg.bandwidth() * tau_max - 1e-12));
    const int l_spread = static_cast<int>(std::ceil(cfg.duration() * nu_max - 1e-12));
    DDBox box{-guard, std::max(0, k_spread) + guard, -(std::max(0, l_spread) + guard),
              std::max(0, l_spread) + guard};
    if (box.k_count() > cfg.mn() || 2 * box.l_hi >= cfg.mn()) {
        throw ConfigError("support box does not fit on the DD torus");
    }
    return box;
}

DDTaps::DDTaps(int mn_, DDBox box_) : mn(mn_), box(box_), values(CMatrix::Zero(box_.k_count(), box_.l_count())) {
    if (box.k_count() < 1 || box.l_count() < 1) throw ConfigError("empty tap box");
}

DDTaps DDTaps::on_box(const DDBox& other) const {
    DDTaps out(mn, other);
    for (int k = other.k_lo; k <= other.k_hi; ++k) {
        for (int l = other.l_lo; l <= other.l_hi; ++l) {
            if (box.contains(k, l)) out.at(k, l) = at(k, l);
        }
    }
    return out;
}

DDTaps DDTaps::single(int mn, int k, int l, cplx value) {
    DDTaps t(mn, DDBox{k, k, l, l});
    t.at(k, l) = value;
    return t;
}

namespace {

// One factor of the separable outer twisted convolution:
//   J_f = int g(u - c) g(d - u) e^{j2pi f u} du,
// evaluated for several modulation frequencies f on one trapezoid grid.
class SeparableIntegral {
public:
    SeparableIntegral(const PulseFilter& pulse, double c, double d, int points_per_bin)
        : pulse_(pulse), c_(c), d_(d) {
        if (pulse.kind() == PulseFilter::Kind::Sinc) return;
        const double w = pulse.support_half_width();
        const double lo = std::max(c, d) - w;
        const double hi = std::min(c, d) + w;
        if (hi <= lo) return;
        const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) * points_per_bin)));
        const double h = (hi - lo) / n;
        nodes_.resize(n + 1);
        weights_.resize(n + 1);
        for (int m = 0; m <= n; ++m) {
            const double u = lo + m * h;
            nodes_[m] = u;
            weights_[m] = (m == 0 || m == n ? 0.5 * h : h) * pulse.shape(u - c) * pulse.shape(d - u);
        }
    }

    cplx at(double f) const {
        if (pulse_.kind() == PulseFilter::Kind::Sinc) return sinc_closed_form(f);
        cplx sum{0.0, 0.0};
        for (std::size_t m = 0; m < nodes_.size(); ++m) {
            sum += weights_[m] * std::polar(1.0, kTwoPi * f * nodes_[m]);
        }
        return sum;
    }

private:
    // sinc has a rect spectrum; the integral is a finite Fourier integral
    // over the overlap of two shifted unit bands.
    cplx sinc_closed_form(double f) const {
        const double xi0 = std::max(-0.5, -f - 0.5);
        const double xi1 = std::min(0.5, -f + 0.5);
        if (xi1 <= xi0) return {0.0, 0.0};
        const double delta = d_ - c_;
        cplx inner;
        if (std::abs(delta) < 1e-12) {
            inner = xi1 - xi0;
        } else {
            inner = (std::polar(1.0, kTwoPi * xi1 * delta) - std::polar(1.0, kTwoPi * xi0 * delta)) /
                    cplx(0.0, kTwoPi * delta);
        }
        return std::polar(1.0, kTwoPi * f * d_) * inner;
    }

    const PulseFilter& pulse_;
    double c_;
    double d_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

void accumulate_path(const PulseFilter& pulse, const Path& path, const FrameConfig& cfg, const DDBox& box,
                     int points_per_bin, DDTaps& out) {
    const double B = cfg.bandwidth();
    const double T = cfg.duration();
    const int mn = cfg.mn();
    const double a = B * path.delay;
    const double b = T * path.doppler;

    std::vector<cplx> delay_factor(box.k_count());
    for (int k = box.k_lo; k <= box.k_hi; ++k) {
        delay_factor[k - box.k_lo] = SeparableIntegral(pulse, a, k, points_per_bin).at(-path.doppler / B);
    }
    for (int l = box.l_lo; l <= box.l_hi; ++l) {
        const SeparableIntegral doppler(pulse, b, l, points_per_bin);
        for (int k = box.k_lo; k <= box.k_hi; ++k) {
            out.at(k, l) += path.gain * delay_factor[k - box.k_lo] * doppler.at(static_cast<double>(k) / mn);
        }
    }
}

}  // namespace

DDTaps effective_taps(const PulseFilter& pulse, const PathSet& paths, const FrameConfig& cfg, const DDBox& box,
                      const QuadratureSpec& quad) {
    DDTaps taps(cfg.mn(), box);
    if (paths.paths.empty()) return taps;
    if (quad.points_per_bin < 1) throw ConfigError("quadrature needs at least one point per bin");

    if (pulse.kind() == PulseFilter::Kind::Sinc) {
        for (const auto& p : paths.paths) accumulate_path(pulse, p, cfg, box, quad.points_per_bin, taps);
        return taps;
    }

    DDTaps coarse(cfg.mn(), box);
    for (const auto& p : paths.paths) {
        accumulate_path(pulse, p, cfg, box, quad.points_per_bin, coarse);
        accumulate_path(pulse, p, cfg, box, 2 * quad.points_per_bin, taps);
    }
    const double change = (taps.values - coarse.values).cwiseAbs().maxCoeff();
    if (!(change <= quad.tolerance)) {
        std::ostringstream msg;
        msg << "effective tap quadrature did not converge: max change " << change << " between "
            << quad.points_per_bin << " and " << 2 * quad.points_per_bin << " points/bin exceeds tolerance "
            << quad.tolerance;
        throw NumericalError(msg.str());
    }
    return taps;
}

// ---------------------------------------------------------------------------
// Channel application
// ---------------------------------------------------------------------------

double noise_variance(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

CMatrix doppler_profiles(const DDTaps& taps) {
    const int mn = taps.mn;
    std::vector<cplx> roots(mn);
    for (int r = 0; r < mn; ++r) roots[r] = unit_phasor(r, mn);
    CMatrix c = CMatrix::Zero(taps.box.k_count(), mn);
    for (int k = taps.box.k_lo; k <= taps.box.k_hi; ++k) {
        for (int l = taps.box.l_lo; l <= taps.box.l_hi; ++l) {
            const cplx h = taps.at(k, l);
            if (h == cplx{}) continue;
            const int step = ((l % mn) + mn) % mn;
            int idx = static_cast<int>(((static_cast<std::int64_t>(l) * -k) % mn + mn) % mn);
            auto row = c.row(k - taps.box.k_lo);
            for (int n = 0; n < mn; ++n) {
                row[n] += h * roots[idx];
                idx += step;
                if (idx >= mn) idx -= mn;
            }
        }
    }
    return c;
}

SampleFrame apply_channel(const DDTaps& taps, const SampleFrame& x) {
    const int mn = taps.mn;
    if (x.size() != mn) throw ShapeError("sample frame length must equal MN");
    const CMatrix c = doppler_profiles(taps);
    SampleFrame y = SampleFrame::Zero(mn);
    for (int k = taps.box.k_lo; k <= taps.box.k_hi; ++k) {
        const auto row = c.row(k - taps.box.k_lo);
        int src = ((-k) % mn + mn) % mn;
        for (int n = 0; n < mn; ++n) {
            y[n] += row[n] * x[src];
            if (++src == mn) src = 0;
        }
    }
    return y;
}

void add_noise(SampleFrame& y, double variance, std::mt19937_64& rng) {
    if (variance <= 0.0) return;
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
    for (auto& v : y) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v += cplx(re, im);
    }
}

SampleFrame apply_channel(const DDTaps& taps, const SampleFrame& x, std::mt19937_64& rng, double snr_db) {
    SampleFrame y = apply_channel(taps, x);
    add_noise(y, noise_variance(snr_db), rng);
    return y;
}

}  // namespace ddsim
