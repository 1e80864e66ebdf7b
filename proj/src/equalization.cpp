#include "ddsim/equalization.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <sstream>

namespace ddsim {

namespace {

int wrap(int v, int mn) {
    int r = v % mn;
    return r < 0 ? r + mn : r;
}

Eigen::SparseMatrix<cplx> sparse_operator(const DDTaps& taps) {
    const int mn = taps.mn;
    const CMatrix c = doppler_profiles(taps);
    std::vector<Eigen::Triplet<cplx>> entries;
    entries.reserve(static_cast<std::size_t>(c.size()));
    for (int k = taps.box.k_lo; k <= taps.box.k_hi; ++k) {
        for (int n = 0; n < mn; ++n) {
            const cplx v = c(k - taps.box.k_lo, n);
            if (v != cplx{}) entries.emplace_back(n, wrap(n - k, mn), v);
        }
    }
    Eigen::SparseMatrix<cplx> H(mn, mn);
    H.setFromTriplets(entries.begin(), entries.end());
    return H;
}

}  // namespace

CMatrix channel_operator(const DDTaps& taps) {
    const int mn = taps.mn;
    const CMatrix c = doppler_profiles(taps);
    CMatrix H = CMatrix::Zero(mn, mn);
    for (int k = taps.box.k_lo; k <= taps.box.k_hi; ++k) {
        for (int n = 0; n < mn; ++n) H(n, wrap(n - k, mn)) += c(k - taps.box.k_lo, n);
    }
    return H;
}

ChannelMatrix build_G(const DDTaps& taps, const Basis& basis) {
    if (taps.mn != basis.mn()) throw ShapeError("taps and basis disagree on MN");
    return ChannelMatrix{sparse_operator(taps) * basis.synthesis(), basis.tag()};
}

CVector mmse_equalize(const ChannelMatrix& channel, const SampleFrame& y, double sigma2) {
    const auto& G = channel.G;
    if (y.size() != G.rows()) throw ShapeError("received frame length must equal MN");
    if (sigma2 < 0.0) throw ConfigError("noise variance must be non-negative");
    CMatrix A = CMatrix::Identity(G.rows(), G.rows()) * sigma2;
    A.selfadjointView<Eigen::Lower>().rankUpdate(G);
    Eigen::LLT<CMatrix, Eigen::Lower> llt(A);
    const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
    if (llt.info() != Eigen::Success || !(rcond > 1e-14)) {
        std::ostringstream msg;
        msg << "MMSE solve failed: G G^H + sigma2 I is numerically singular (rcond ~ " << rcond
            << ", sigma2 = " << sigma2 << ")";
        throw NumericalError(msg.str());
    }
    return G.adjoint() * llt.solve(y);
}

DDEqualizer::DDEqualizer(const DDTaps& taps, const Basis& basis, double sigma2) : basis_(&basis) {
    const int mn = basis.mn();
    if (taps.mn != mn) throw ShapeError("taps and basis disagree on MN");
    if (sigma2 < 0.0) throw ConfigError("noise variance must be non-negative");
    H_ = sparse_operator(taps);
    Eigen::SparseMatrix<cplx> A = H_ * H_.adjoint();
    Eigen::SparseMatrix<cplx> reg(mn, mn);
    reg.setIdentity();
    A += reg * sigma2;
    ldlt_.compute(A);
    const Eigen::VectorXd d = ldlt_.info() == Eigen::Success ? ldlt_.vectorD().real() : Eigen::VectorXd{};
    const double ratio = d.size() > 0 && d.maxCoeff() > 0.0 ? d.minCoeff() / d.maxCoeff() : 0.0;
    if (!(ratio > 1e-14)) {
        std::ostringstream msg;
        msg << "MMSE solve failed: H H^H + sigma2 I is numerically singular (pivot ratio ~ " << ratio
            << ", sigma2 = " << sigma2 << ")";
        throw NumericalError(msg.str());
    }
}

CVector DDEqualizer::equalize(const SampleFrame& y) const {
    if (y.size() != basis_->mn()) throw ShapeError("received frame length must equal MN");
    const CVector z = ldlt_.solve(y);
    return basis_->project(H_.adjoint() * z);
}

SliceResult DDEqualizer::detect(const SampleFrame& y, const Constellation& constellation) const {
    return slice(equalize(y), constellation);
}

SliceResult mmse_detect(const ChannelMatrix& channel, const SampleFrame& y, double sigma2,
                        const Constellation& constellation) {
    return slice(mmse_equalize(channel, y, sigma2), constellation);
}

CVector ofdm_transfer_estimate(const Basis& basis, const SymbolFrame& pilot_symbols, const SampleFrame& y_pilot) {
    if (pilot_symbols.size() != basis.mn()) throw ShapeError("pilot frame length must equal MN");
    const CVector r = basis.project(y_pilot);
    CVector h(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        if (pilot_symbols[i] == cplx{}) throw DegeneratePilotError("OFDM pilot symbol is zero");
        h[i] = r[i] / pilot_symbols[i];
    }
    return h;
}

CVector ofdm_transfer_diagonal(const DDTaps& taps, const Basis& basis) {
    const int mn = basis.mn();
    if (taps.mn != mn) throw ShapeError("taps and basis disagree on MN");
    const CMatrix c = doppler_profiles(taps);
    const CMatrix& phi = basis.synthesis();
    CVector d = CVector::Zero(mn);
    for (int i = 0; i < mn; ++i) {
        const auto col = phi.col(i);
        cplx sum{0.0, 0.0};
        for (int n = 0; n < mn; ++n) {
            if (col[n] == cplx{}) continue;
            cplx hn{0.0, 0.0};
            for (int k = taps.box.k_lo; k <= taps.box.k_hi; ++k) {
                hn += c(k - taps.box.k_lo, n) * col[wrap(n - k, mn)];
            }
            sum += std::conj(col[n]) * hn;
        }
        d[i] = sum;
    }
    return d;
}

CVector ofdm_one_tap_equalize(const Basis& basis, const SampleFrame& y, const CVector& transfer, double sigma2) {
    const CVector r = basis.project(y);
    if (transfer.size() != r.size()) throw ShapeError("transfer diagonal length must equal MN");
    CVector s(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double den = std::norm(transfer[i]) + sigma2;
        s[i] = den > 0.0 ? std::conj(transfer[i]) / den * r[i] : cplx{};
    }
    return s;
}

SliceResult ofdm_one_tap(const Basis& basis, const SampleFrame& y, const SymbolFrame& pilot_symbols,
                         const SampleFrame& y_pilot, double sigma2, const Constellation& constellation) {
    const CVector h = ofdm_transfer_estimate(basis, pilot_symbols, y_pilot);
    return slice(ofdm_one_tap_equalize(basis, y, h, sigma2), constellation);
}

}  // namespace ddsim
