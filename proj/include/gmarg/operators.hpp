#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gmarg/register.hpp"

namespace gmarg {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

namespace tol {
inline constexpr double hermiticity_error = 1e-9;   // above this, construction fails
inline constexpr double density_trace = 1e-10;
inline constexpr double density_eigmin = -1e-9;
inline constexpr double pure_norm = 1e-9;
}  // namespace tol

// Hermitian operator on a qudit register. The matrix is projected to
// (H + H^dag)/2 on construction; asymmetry beyond tol::hermiticity_error is
// treated as a bug in the caller and rejected.
class HermitianOperator {
public:
    HermitianOperator(QuditRegister reg, Mat m) : reg_(std::move(reg)), mat_(std::move(m)) {
        if (mat_.rows() != reg_.total_dim() || mat_.cols() != reg_.total_dim())
            throw std::invalid_argument("matrix size does not match register dimension");
        const double asym = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
        if (asym > tol::hermiticity_error)
            throw std::invalid_argument("matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
        mat_ = 0.5 * (mat_ + mat_.adjoint()).eval();
    }

    const QuditRegister& reg() const { return reg_; }
    const Mat& matrix() const { return mat_; }
    int dim() const { return reg_.total_dim(); }
    double trace() const { return mat_.trace().real(); }

private:
    QuditRegister reg_;
    Mat mat_;
};

inline Eigen::VectorXd spectrum(const HermitianOperator& op) {
    Eigen::SelfAdjointEigenSolver<Mat> es(op.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double min_eigenvalue(const HermitianOperator& op) { return spectrum(op).minCoeff(); }

// State of the register: Hermitian, PSD within tol::density_eigmin, unit trace.
class DensityOperator : public HermitianOperator {
public:
    DensityOperator(QuditRegister reg, Mat m) : HermitianOperator(std::move(reg), std::move(m)) {
        if (std::abs(trace() - 1.0) > tol::density_trace)
            throw std::invalid_argument("density operator must have unit trace");
        if (min_eigenvalue(*this) < tol::density_eigmin)
            throw std::invalid_argument("density operator must be positive semidefinite");
    }

    static DensityOperator maximally_mixed(const QuditRegister& reg) {
        const int d = reg.total_dim();
        return DensityOperator(reg, Mat::Identity(d, d) / static_cast<double>(d));
    }
};

class PureState {
public:
    PureState(QuditRegister reg, Vec amps) : reg_(std::move(reg)), amps_(std::move(amps)) {
        if (amps_.size() != reg_.total_dim())
            throw std::invalid_argument("amplitude count does not match register dimension");
        const double n = amps_.norm();
        if (std::abs(n - 1.0) > tol::pure_norm)
            throw std::invalid_argument("pure state is not normalized");
        amps_ /= n;
    }

    const QuditRegister& reg() const { return reg_; }
    const Vec& amplitudes() const { return amps_; }

    DensityOperator to_density() const {
        return DensityOperator(reg_, amps_ * amps_.adjoint());
    }

private:
    QuditRegister reg_;
    Vec amps_;
};

//------------------------------------------------------------------------------
// Operator algebra
//------------------------------------------------------------------------------

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Kronecker product in party order; the result register is the concatenation
// of the factor registers.
inline HermitianOperator tensor_product(const std::vector<HermitianOperator>& factors) {
    if (factors.empty()) throw std::invalid_argument("tensor_product needs at least one factor");
    Mat m = factors[0].matrix();
    std::vector<int> dims = factors[0].reg().dims();
    for (size_t k = 1; k < factors.size(); ++k) {
        m = kron(m, factors[k].matrix());
        const auto& d = factors[k].reg().dims();
        dims.insert(dims.end(), d.begin(), d.end());
    }
    return HermitianOperator(QuditRegister(std::move(dims)), std::move(m));
}

namespace detail {

// Splits every register index into its component over `parties` and the rest,
// so that index = part[i] + rest[i] with the two living on disjoint digit sets.
struct IndexSplit {
    std::vector<int> part;   // contribution of the selected parties
    std::vector<int> rest;   // contribution of the remaining parties

    IndexSplit(const QuditRegister& reg, const PartySet& parties) {
        const int d = reg.total_dim();
        part.resize(d);
        rest.resize(d);
        for (int i = 0; i < d; ++i) {
            int ip = 0;
            for (int p : parties) ip += ((i / reg.stride(p)) % reg.dim(p)) * reg.stride(p);
            part[i] = ip;
            rest[i] = i - ip;
        }
    }
};

// Enumerates the joint indices of a party subset: value[k] for k in
// [0, sub_dim) gives the full-register index contribution.
inline std::vector<int> subset_offsets(const QuditRegister& reg, const PartySet& parties) {
    int sub_dim = 1;
    for (int p : parties) sub_dim *= reg.dim(p);
    std::vector<int> off(sub_dim, 0);
    for (int k = 0; k < sub_dim; ++k) {
        int rem = k;
        for (auto it = parties.rbegin(); it != parties.rend(); ++it) {
            const int d = reg.dim(*it);
            off[k] += (rem % d) * reg.stride(*it);
            rem /= d;
        }
    }
    return off;
}

}  // namespace detail

// Reduced operator on `keep`; trace preserved, linear in op.
inline HermitianOperator partial_trace(const HermitianOperator& op, const PartySet& keep) {
    const QuditRegister& reg = op.reg();
    require_party_set(reg, keep);
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep must be nonempty");
    if (static_cast<int>(keep.size()) == reg.num_parties()) return op;

    const PartySet traced = reg.complement(keep);
    const auto keep_off = detail::subset_offsets(reg, keep);
    const auto tr_off = detail::subset_offsets(reg, traced);
    const int kd = static_cast<int>(keep_off.size());

    Mat out = Mat::Zero(kd, kd);
    const Mat& m = op.matrix();
    for (int r = 0; r < kd; ++r)
        for (int c = 0; c < kd; ++c) {
            cxd acc = 0;
            for (int t : tr_off) acc += m(keep_off[r] + t, keep_off[c] + t);
            out(r, c) = acc;
        }
    return HermitianOperator(reg.sub(keep), std::move(out));
}

inline DensityOperator partial_trace(const DensityOperator& op, const PartySet& keep) {
    HermitianOperator red = partial_trace(static_cast<const HermitianOperator&>(op), keep);
    return DensityOperator(red.reg(), red.matrix());
}

// Transposes the indices of the parties in `m`; an involution that preserves
// Hermiticity and the trace.
inline HermitianOperator partial_transpose(const HermitianOperator& op, const PartySet& m) {
    const QuditRegister& reg = op.reg();
    require_party_set(reg, m);
    if (m.empty()) return op;

    const detail::IndexSplit split(reg, m);
    const int d = reg.total_dim();
    Mat out(d, d);
    const Mat& in = op.matrix();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            out(split.part[j] + split.rest[i], split.part[i] + split.rest[j]) = in(i, j);
    return HermitianOperator(reg, std::move(out));
}

// Permutes tensor factors: new_order[k] names the old party placed at
// position k of the result register.
inline HermitianOperator reorder_parties(const HermitianOperator& op,
                                         const std::vector<int>& new_order) {
    const QuditRegister& reg = op.reg();
    if (static_cast<int>(new_order.size()) != reg.num_parties())
        throw std::invalid_argument("reorder_parties: permutation size mismatch");
    std::vector<int> dims;
    for (int p : new_order) dims.push_back(reg.dim(p));
    QuditRegister out_reg(dims);

    const int d = reg.total_dim();
    std::vector<int> remap(d);  // old index -> new index
    for (int i = 0; i < d; ++i) {
        auto digits = reg.unpack(i);
        int j = 0;
        for (int k = 0; k < out_reg.num_parties(); ++k) j += digits[new_order[k]] * out_reg.stride(k);
        remap[i] = j;
    }
    Mat out(d, d);
    const Mat& in = op.matrix();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(remap[i], remap[j]) = in(i, j);
    return HermitianOperator(out_reg, std::move(out));
}

// (1-p) rho + p * I/d
inline DensityOperator mix_with_white_noise(const DensityOperator& rho, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("noise fraction must lie in [0,1]");
    const int d = rho.dim();
    Mat m = (1.0 - p) * rho.matrix() + (p / d) * Mat::Identity(d, d);
    return DensityOperator(rho.reg(), std::move(m));
}

// Hilbert-Schmidt inner product tr(A B) of two Hermitian matrices (real).
inline double hs_inner(const Mat& a, const Mat& b) {
    return a.cwiseProduct(b.conjugate()).sum().real();
}

inline double expectation(const HermitianOperator& obs, const DensityOperator& rho) {
    return hs_inner(obs.matrix(), rho.matrix());
}

// Schmidt coefficients of a pure state across left-parties | rest.
inline Eigen::VectorXd schmidt_coefficients(const PureState& psi, const PartySet& left) {
    const QuditRegister& reg = psi.reg();
    require_party_set(reg, left);
    const auto lo = detail::subset_offsets(reg, left);
    const auto ro = detail::subset_offsets(reg, reg.complement(left));
    Mat a(lo.size(), ro.size());
    for (size_t r = 0; r < lo.size(); ++r)
        for (size_t c = 0; c < ro.size(); ++c) a(r, c) = psi.amplitudes()[lo[r] + ro[c]];
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues();
}

}  // namespace gmarg
