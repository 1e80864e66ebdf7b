#pragma once

#include "ddsim/channel.hpp"
#include "ddsim/frame.hpp"
#include "ddsim/modulation.hpp"

#include <iosfwd>
#include <random>
#include <vector>

namespace ddsim {

/// Estimation region of the DD torus.
using SupportMask = DDBox;

/// Complex function A[k, l] on a box of the MN x MN DD torus. Indices are
/// reduced modulo MN before lookup; values outside the stored box read as 0.
struct AmbiguitySurface {
    int mn = 0;
    DDBox box;
    CMatrix values;  ///< rows k - k_lo, cols l - l_lo

    AmbiguitySurface() = default;
    AmbiguitySurface(int mn, DDBox box);

    bool is_full_torus() const { return box.k_count() == mn && box.l_count() == mn; }
    cplx at(int k, int l) const;
    cplx& ref(int k, int l) { return values(k - box.k_lo, l - box.l_lo); }

    static AmbiguitySurface delta(int mn);
};

/// A_{y,x}[k,l] = (1/MN) sum_n y[n] x*[(n-k)_MN] e^{-j2pi l (n-k)/MN},
/// evaluated directly for every (k, l) in `mask`.
/// Throws DegeneratePilotError when x is identically zero.
AmbiguitySurface cross_ambiguity(const SampleFrame& y, const SampleFrame& x, const SupportMask& mask);

/// Same quantity on the whole torus, one FFT per delay.
AmbiguitySurface ambiguity_torus(const SampleFrame& y, const SampleFrame& x);
inline AmbiguitySurface self_ambiguity(const SampleFrame& x) { return ambiguity_torus(x, x); }

/// (h *sd A)[k,l] = sum h[k',l'] A[k-k', l-l'] e^{j2pi l'(k-k')/MN}, over `out`.
AmbiguitySurface twisted_convolve_discrete(const DDTaps& h, const AmbiguitySurface& A, const DDBox& out);
AmbiguitySurface twisted_convolve_discrete(const DDTaps& h, const AmbiguitySurface& A);

struct EstimatorOptions {
    /// Zero every estimated tap whose magnitude is below this value. Off
    /// by default.
    double threshold = 0.0;
};

/// h^[k,l] = A_{y,x_ref}[k,l] on the mask.
DDTaps estimate_taps(const SampleFrame& y, const SampleFrame& x_ref, const SupportMask& mask,
                     const EstimatorOptions& options = {});

/// Sum |h^ - h|^2 / sum |h|^2 over the mask.
double nmse(const DDTaps& estimate, const DDTaps& truth);

struct ThumbtackDiagnostic {
    AmbiguitySurface mean;               ///< Monte-Carlo mean of A_x over the torus
    int trials = 0;
    double max_origin_error = 0.0;       ///< max over frames of |A_x[0,0] - 1|
    cplx origin{0.0, 0.0};               ///< mean value at the origin
    double max_off_origin = 0.0;         ///< max |mean A_x| away from the origin
    double mean_off_origin = 0.0;        ///< average |mean A_x| away from the origin

    struct Checkpoint {
        int trials = 0;
        double max_off_origin = 0.0;
        double mean_off_origin = 0.0;
    };
    std::vector<Checkpoint> checkpoints;  ///< off-origin statistics of the running mean
};

/// Average A_x over `trials` independent data frames of `constellation`
/// symbols modulated on `basis`. Frames draw from seed streams
/// (seed, trial, Diagnostic) so results do not depend on evaluation order.
/// `checkpoints` lists trial counts at which the running mean is summarized.
ThumbtackDiagnostic expected_thumbtack_diagnostic(const Basis& basis, const Constellation& constellation,
                                                  int trials, const SeedSpec& seed,
                                                  const std::vector<int>& checkpoints = {});

/// Long-form CSV rows "k,l,re,im,abs" over the surface box, with a header.
void write_surface_csv(std::ostream& out, const AmbiguitySurface& surface);

}  // namespace ddsim
