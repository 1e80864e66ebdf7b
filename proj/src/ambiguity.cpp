#include "ddsim/ambiguity.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>

namespace ddsim {

namespace {

int wrap(int v, int mn) {
    int r = v % mn;
    return r < 0 ? r + mn : r;
}

// FFTW planning is not thread-safe; execution of a finished plan is.
class FftPlans {
public:
    static FftPlans& instance() {
        static FftPlans plans;
        return plans;
    }

    fftw_plan forward(int n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<cplx> a(n), b(n);
        fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                                       reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(n, p);
        return p;
    }

    ~FftPlans() {
        for (auto& [n, p] : plans_) fftw_destroy_plan(p);
    }

private:
    std::mutex mutex_;
    std::map<int, fftw_plan> plans_;
};

void require_nonzero(const SampleFrame& x) {
    if (x.squaredNorm() == 0.0) throw DegeneratePilotError("reference frame is identically zero");
}

}  // namespace

AmbiguitySurface::AmbiguitySurface(int mn_, DDBox box_)
    : mn(mn_), box(box_), values(CMatrix::Zero(box_.k_count(), box_.l_count())) {}

cplx AmbiguitySurface::at(int k, int l) const {
    // Find the representative of (k, l) mod MN inside the box, if any.
    const int k0 = box.k_lo + wrap(k - box.k_lo, mn);
    const int l0 = box.l_lo + wrap(l - box.l_lo, mn);
    if (k0 > box.k_hi || l0 > box.l_hi) return {0.0, 0.0};
    return values(k0 - box.k_lo, l0 - box.l_lo);
}

AmbiguitySurface AmbiguitySurface::delta(int mn) {
    AmbiguitySurface a(mn, DDBox{0, 0, 0, 0});
    a.values(0, 0) = 1.0;
    return a;
}

AmbiguitySurface cross_ambiguity(const SampleFrame& y, const SampleFrame& x, const SupportMask& mask) {
    const int mn = static_cast<int>(x.size());
    if (y.size() != x.size()) throw ShapeError("cross-ambiguity needs equal-length frames");
    require_nonzero(x);
    AmbiguitySurface out(mn, mask);
    const double scale = 1.0 / mn;
    for (int k = mask.k_lo; k <= mask.k_hi; ++k) {
        for (int l = mask.l_lo; l <= mask.l_hi; ++l) {
            cplx sum{0.0, 0.0};
            for (int n = 0; n < mn; ++n) {
                sum += y[n] * std::conj(x[wrap(n - k, mn)]) *
                       unit_phasor(-static_cast<std::int64_t>(l) * (n - k), mn);
            }
            out.ref(k, l) = sum * scale;
        }
    }
    return out;
}

AmbiguitySurface ambiguity_torus(const SampleFrame& y, const SampleFrame& x) {
    const int mn = static_cast<int>(x.size());
    if (y.size() != x.size()) throw ShapeError("cross-ambiguity needs equal-length frames");
    require_nonzero(x);
    AmbiguitySurface out(mn, DDBox::full_torus(mn));
    fftw_plan plan = FftPlans::instance().forward(mn);
    std::vector<cplx> product(mn), spectrum(mn);
    // A[k,l] = e^{j2pi lk/MN} (1/MN) DFT_l{ y[n] x*[(n-k)_MN] }.
    for (int k = 0; k < mn; ++k) {
        for (int n = 0; n < mn; ++n) product[n] = y[n] * std::conj(x[wrap(n - k, mn)]);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(product.data()),
                         reinterpret_cast<fftw_complex*>(spectrum.data()));
        for (int l = 0; l < mn; ++l) {
            out.values(k, l) = spectrum[l] * unit_phasor(static_cast<std::int64_t>(l) * k, mn) / double(mn);
        }
    }
    return out;
}

AmbiguitySurface twisted_convolve_discrete(const DDTaps& h, const AmbiguitySurface& A, const DDBox& out_box) {
    const int mn = A.mn;
    if (h.mn != mn) throw ShapeError("taps and surface live on different tori");
    AmbiguitySurface out(mn, out_box);
    for (int kp = h.box.k_lo; kp <= h.box.k_hi; ++kp) {
        for (int lp = h.box.l_lo; lp <= h.box.l_hi; ++lp) {
            const cplx tap = h.at(kp, lp);
            if (tap == cplx{}) continue;
            for (int k = out_box.k_lo; k <= out_box.k_hi; ++k) {
                const cplx twist = tap * unit_phasor(static_cast<std::int64_t>(lp) * (k - kp), mn);
                for (int l = out_box.l_lo; l <= out_box.l_hi; ++l) {
                    out.ref(k, l) += twist * A.at(k - kp, l - lp);
                }
            }
        }
    }
    return out;
}

AmbiguitySurface twisted_convolve_discrete(const DDTaps& h, const AmbiguitySurface& A) {
    return twisted_convolve_discrete(h, A, DDBox::full_torus(A.mn));
}

DDTaps estimate_taps(const SampleFrame& y, const SampleFrame& x_ref, const SupportMask& mask,
                     const EstimatorOptions& options) {
    const AmbiguitySurface a = cross_ambiguity(y, x_ref, mask);
    DDTaps taps(static_cast<int>(x_ref.size()), mask);
    taps.values = a.values;
    if (options.threshold > 0.0) {
        for (auto& v : taps.values.reshaped()) {
            if (std::abs(v) < options.threshold) v = 0.0;
        }
    }
    return taps;
}

double nmse(const DDTaps& estimate, const DDTaps& truth) {
    if (estimate.mn != truth.mn) throw ShapeError("estimate and truth disagree on MN");
    const DDTaps aligned = truth.on_box(estimate.box);
    const double den = aligned.energy();
    if (den == 0.0) return estimate.energy() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (estimate.values - aligned.values).squaredNorm() / den;
}

namespace {

ThumbtackDiagnostic::Checkpoint off_origin_stats(const CMatrix& sum, int trials) {
    ThumbtackDiagnostic::Checkpoint c;
    c.trials = trials;
    const auto mn = sum.rows();
    double total = 0.0;
    for (Eigen::Index k = 0; k < mn; ++k) {
        for (Eigen::Index l = 0; l < mn; ++l) {
            if (k == 0 && l == 0) continue;
            const double m = std::abs(sum(k, l)) / trials;
            c.max_off_origin = std::max(c.max_off_origin, m);
            total += m;
        }
    }
    c.mean_off_origin = total / (static_cast<double>(mn) * mn - 1.0);
    return c;
}

}  // namespace

ThumbtackDiagnostic expected_thumbtack_diagnostic(const Basis& basis, const Constellation& constellation,
                                                  int trials, const SeedSpec& seed,
                                                  const std::vector<int>& checkpoints) {
    if (trials < 1) throw ConfigError("thumbtack diagnostic needs at least one trial");
    const int mn = basis.mn();
    ThumbtackDiagnostic d;
    d.trials = trials;
    d.mean = AmbiguitySurface(mn, DDBox::full_torus(mn));
    for (int t = 0; t < trials; ++t) {
        auto rng = seed.engine(static_cast<std::uint64_t>(t), stream_tag(Stream::Diagnostic));
        const SymbolFrame s = random_symbols(mn, constellation, rng);
        const AmbiguitySurface a = self_ambiguity(basis.modulate(s));
        d.max_origin_error = std::max(d.max_origin_error, std::abs(a.values(0, 0) - 1.0));
        d.mean.values += a.values;
        if (std::find(checkpoints.begin(), checkpoints.end(), t + 1) != checkpoints.end()) {
            d.checkpoints.push_back(off_origin_stats(d.mean.values, t + 1));
        }
    }
    const auto final_stats = off_origin_stats(d.mean.values, trials);
    d.mean.values /= static_cast<double>(trials);
    d.origin = d.mean.values(0, 0);
    d.max_off_origin = final_stats.max_off_origin;
    d.mean_off_origin = final_stats.mean_off_origin;
    return d;
}

void write_surface_csv(std::ostream& out, const AmbiguitySurface& surface) {
    out << "k,l,re,im,abs\n";
    out.precision(17);
    for (int k = surface.box.k_lo; k <= surface.box.k_hi; ++k) {
        for (int l = surface.box.l_lo; l <= surface.box.l_hi; ++l) {
            const cplx v = surface.values(k - surface.box.k_lo, l - surface.box.l_lo);
            out << k << ',' << l << ',' << v.real() << ',' << v.imag() << ',' << std::abs(v) << '\n';
        }
    }
}

}  // namespace ddsim
