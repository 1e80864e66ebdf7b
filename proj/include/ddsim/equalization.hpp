#pragma once

#include "ddsim/channel.hpp"
#include "ddsim/frame.hpp"
#include "ddsim/modulation.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>

namespace ddsim {

/// Effective MN x MN channel seen by the symbol vector: y = G s + w.
struct ChannelMatrix {
    CMatrix G;
    SchemeTag scheme = SchemeTag::ZakOTFS;
};

/// Time-domain channel operator H with (H x)[n] = sum h[k,l] x[(n-k)_MN] e^{j2pi l(n-k)/MN}.
CMatrix channel_operator(const DDTaps& taps);

/// G[n,i] = sum_{k,l} h[k,l] phi_i[(n-k)_MN] e^{j2pi l (n-k)/MN}.
ChannelMatrix build_G(const DDTaps& taps, const Basis& basis);

/// Soft MMSE estimate G^H (G G^H + sigma2 I)^{-1} y. sigma2 = 0 is allowed.
/// Throws NumericalError when the Hermitian solve fails or is numerically
/// singular; the message carries the reciprocal condition estimate.
CVector mmse_equalize(const ChannelMatrix& channel, const SampleFrame& y, double sigma2);

/// MMSE followed by hard decisions.
SliceResult mmse_detect(const ChannelMatrix& channel, const SampleFrame& y, double sigma2,
                        const Constellation& constellation);

/// The same MMSE estimate for G = H Phi with a unitary basis. Since
/// G G^H = H H^H, the solve runs on the sparse banded H H^H + sigma2 I and
/// is factorized once per channel. Throws NumericalError like mmse_equalize.
class DDEqualizer {
public:
    DDEqualizer(const DDTaps& taps, const Basis& basis, double sigma2);

    CVector equalize(const SampleFrame& y) const;
    SliceResult detect(const SampleFrame& y, const Constellation& constellation) const;

private:
    const Basis* basis_;
    Eigen::SparseMatrix<cplx> H_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<cplx>> ldlt_;
};

/// Transfer-domain diagonal H^[i] = <phi_i, y_pilot> / s_pilot[i].
CVector ofdm_transfer_estimate(const Basis& basis, const SymbolFrame& pilot_symbols, const SampleFrame& y_pilot);

/// Exact diagonal <phi_i, G phi_i> of a known channel; the best one-tap model.
CVector ofdm_transfer_diagonal(const DDTaps& taps, const Basis& basis);

/// s^[i] = conj(H[i]) / (|H[i]|^2 + sigma2) * <phi_i, y>.
CVector ofdm_one_tap_equalize(const Basis& basis, const SampleFrame& y, const CVector& transfer, double sigma2);

SliceResult ofdm_one_tap(const Basis& basis, const SampleFrame& y, const SymbolFrame& pilot_symbols,
                         const SampleFrame& y_pilot, double sigma2, const Constellation& constellation);

}  // namespace ddsim
