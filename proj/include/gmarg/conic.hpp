#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gmarg/operators.hpp"

// Backend-agnostic semidefinite programs with complex Hermitian matrix
// variables, linear equalities, PSD constraints and a linear objective
// (sense: minimize). Programs are lowered to a real symmetric block LMI
//     minimize c'x   subject to   F_0 + sum_i x_i F_i >= 0   (per block)
// via the standard [[Re,-Im],[Im,Re]] embedding; linear equalities are
// eliminated through a nullspace parameterization before the backend runs.

namespace gmarg::conic {

//------------------------------------------------------------------------------
// Real embedding of complex Hermitian matrices
//------------------------------------------------------------------------------

// [[Re H, -Im H],[Im H, Re H]]; PSD iff H is PSD, each eigenvalue doubled.
inline Eigen::MatrixXd real_embedding(const Mat& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("real_embedding: square matrix required");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("real_embedding: matrix is not Hermitian");
    const Eigen::Index n = h.rows();
    Eigen::MatrixXd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.bottomRightCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    return out;
}

//------------------------------------------------------------------------------
// Program description
//------------------------------------------------------------------------------

struct VarRef {
    int id = -1;
};

struct VarInfo {
    std::string name;
    enum class Kind { hermitian, scalars } kind = Kind::scalars;
    int dim = 0;     // matrix dimension (hermitian only)
    int count = 0;   // number of real scalars
    int offset = 0;  // first scalar index
};

// Sparse complex matrix as a triplet list; represents the full matrix, not a
// triangle.
struct CTriplet {
    int r = 0, c = 0;
    cxd v;
};

struct LinExpr {
    std::vector<std::pair<int, double>> terms;  // (scalar index, coefficient)
    double constant = 0.0;

    LinExpr& add(int scalar, double coeff) {
        terms.push_back({scalar, coeff});
        return *this;
    }
};

// Affine complex-Hermitian matrix expression: constant + sum_s x_s * coeff_s.
struct MatExpr {
    int dim = 0;
    std::vector<CTriplet> constant;
    std::vector<std::pair<int, std::vector<CTriplet>>> terms;  // scalar -> coefficient matrix

    static MatExpr constant_matrix(const Mat& m, double prune = 1e-14) {
        MatExpr e;
        e.dim = static_cast<int>(m.rows());
        e.constant = to_triplets(m, prune);
        return e;
    }

    static std::vector<CTriplet> to_triplets(const Mat& m, double prune = 1e-14) {
        std::vector<CTriplet> t;
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                if (std::abs(m(r, c)) > prune) t.push_back({r, c, m(r, c)});
        return t;
    }

    static Mat to_dense(const std::vector<CTriplet>& t, int dim) {
        Mat m = Mat::Zero(dim, dim);
        for (const auto& e : t) m(e.r, e.c) += e.v;
        return m;
    }

    void add_term(int scalar, const Mat& coeff, double prune = 1e-14) {
        auto t = to_triplets(coeff, prune);
        if (!t.empty()) terms.push_back({scalar, std::move(t)});
    }

    void add_constant(const Mat& m, double prune = 1e-14) {
        for (auto& t : to_triplets(m, prune)) constant.push_back(t);
    }

    // Applies a linear Hermitian-preserving map (e.g. a partial transpose) to
    // every coefficient matrix and the constant.
    MatExpr mapped(const std::function<Mat(const Mat&)>& f) const {
        MatExpr out;
        out.constant = to_triplets(f(to_dense(constant, dim)));
        for (const auto& [s, t] : terms) {
            out.terms.push_back({s, to_triplets(f(to_dense(t, dim)))});
        }
        Mat probe = f(Mat::Zero(dim, dim));
        out.dim = static_cast<int>(probe.rows());
        return out;
    }
};

enum class Status { optimal, infeasible, numerical_failure };

inline std::string status_name(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        default: return "numerical-failure";
    }
}

struct SolveOptions {
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iterations = 200;
    bool verbose = false;
};

struct SdpSolution {
    Status status = Status::numerical_failure;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double dual_objective = std::numeric_limits<double>::quiet_NaN();
    double duality_gap = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd x;  // all program scalars
    double max_equality_violation = 0.0;
    double min_psd_eigenvalue = 0.0;
    int iterations = 0;
    std::string message;
};

class ConicProgram {
public:
    // Hermitian matrix variable; scalar layout: for a = 0..d-1, b = a..d-1:
    // the diagonal entry (a == b) or Re/Im of the (a,b) entry.
    VarRef add_hermitian(const std::string& name, int dim) {
        VarInfo v{name, VarInfo::Kind::hermitian, dim, dim * dim, num_scalars_};
        num_scalars_ += v.count;
        vars_.push_back(v);
        return VarRef{static_cast<int>(vars_.size()) - 1};
    }

    VarRef add_scalars(const std::string& name, int count) {
        VarInfo v{name, VarInfo::Kind::scalars, 0, count, num_scalars_};
        num_scalars_ += count;
        vars_.push_back(v);
        return VarRef{static_cast<int>(vars_.size()) - 1};
    }

    const VarInfo& info(VarRef r) const { return vars_.at(r.id); }
    int num_scalars() const { return num_scalars_; }
    int scalar(VarRef r, int k) const { return info(r).offset + k; }

    void set_objective(LinExpr e) { objective_ = std::move(e); }
    void add_equality(LinExpr lhs, double rhs) { equalities_.push_back({std::move(lhs), rhs}); }
    void add_psd(MatExpr e) { psd_.push_back(std::move(e)); }

    const LinExpr& objective() const { return objective_; }
    const std::vector<std::pair<LinExpr, double>>& equalities() const { return equalities_; }
    const std::vector<MatExpr>& psd_constraints() const { return psd_; }

    // The matrix expression equal to a Hermitian variable itself.
    MatExpr var_expr(VarRef r) const {
        const VarInfo& v = info(r);
        if (v.kind != VarInfo::Kind::hermitian)
            throw std::invalid_argument("var_expr: not a Hermitian variable");
        MatExpr e;
        e.dim = v.dim;
        int s = v.offset;
        const cxd i1(0.0, 1.0);
        for (int a = 0; a < v.dim; ++a) {
            for (int b = a; b < v.dim; ++b) {
                if (a == b) {
                    e.terms.push_back({s++, {CTriplet{a, a, 1.0}}});
                } else {
                    e.terms.push_back({s++, {CTriplet{a, b, 1.0}, CTriplet{b, a, 1.0}}});
                    e.terms.push_back({s++, {CTriplet{a, b, i1}, CTriplet{b, a, -i1}}});
                }
            }
        }
        return e;
    }

    // Linear functional tr(C H) of a Hermitian variable, C Hermitian.
    LinExpr trace_inner(VarRef r, const Mat& cmat) const {
        const VarInfo& v = info(r);
        if (v.kind != VarInfo::Kind::hermitian)
            throw std::invalid_argument("trace_inner: not a Hermitian variable");
        if (cmat.rows() != v.dim) throw std::invalid_argument("trace_inner: size mismatch");
        LinExpr e;
        int s = v.offset;
        for (int a = 0; a < v.dim; ++a) {
            for (int b = a; b < v.dim; ++b) {
                if (a == b) {
                    e.add(s++, cmat(a, a).real());
                } else {
                    e.add(s++, 2.0 * cmat(a, b).real());
                    e.add(s++, 2.0 * cmat(a, b).imag());
                }
            }
        }
        return e;
    }

    Mat hermitian_value(VarRef r, const Eigen::VectorXd& x) const {
        const VarInfo& v = info(r);
        if (v.kind != VarInfo::Kind::hermitian)
            throw std::invalid_argument("hermitian_value: not a Hermitian variable");
        Mat m(v.dim, v.dim);
        int s = v.offset;
        const cxd i1(0.0, 1.0);
        for (int a = 0; a < v.dim; ++a) {
            for (int b = a; b < v.dim; ++b) {
                if (a == b) {
                    m(a, a) = x[s++];
                } else {
                    const double re = x[s++];
                    const double im = x[s++];
                    m(a, b) = re + i1 * im;
                    m(b, a) = re - i1 * im;
                }
            }
        }
        return m;
    }

private:
    std::vector<VarInfo> vars_;
    int num_scalars_ = 0;
    LinExpr objective_;
    std::vector<std::pair<LinExpr, double>> equalities_;
    std::vector<MatExpr> psd_;
};

//------------------------------------------------------------------------------
// Lowered real block LMI form
//------------------------------------------------------------------------------

struct RTriplet {
    int r = 0, c = 0;
    double v = 0.0;
};

struct LmiProgram {
    struct BlockVar {
        int var = 0;  // lowered scalar index
        std::vector<RTriplet> t;
    };
    int num_vars = 0;
    std::vector<int> block_sizes;
    std::vector<std::vector<RTriplet>> f0;        // per block
    std::vector<std::vector<BlockVar>> block_vars;  // per block
    Eigen::VectorXd c;
    double obj_const = 0.0;
};

struct RawSolution {
    Status status = Status::numerical_failure;
    Eigen::VectorXd x;
    double obj = std::numeric_limits<double>::quiet_NaN();
    double dual_obj = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    std::string message;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual RawSolution solve_lmi(const LmiProgram& p, const SolveOptions& opt) = 0;
    virtual std::string name() const = 0;
};

namespace detail {

inline void append_embedded(std::vector<RTriplet>& out, const std::vector<CTriplet>& in, int n,
                            double scale = 1.0) {
    for (const auto& t : in) {
        const double re = t.v.real() * scale;
        const double im = t.v.imag() * scale;
        if (re != 0.0) {
            out.push_back({t.r, t.c, re});
            out.push_back({n + t.r, n + t.c, re});
        }
        if (im != 0.0) {
            out.push_back({t.r, n + t.c, -im});
            out.push_back({n + t.r, t.c, im});
        }
    }
}

inline void check_hermitian_triplets(const std::vector<CTriplet>& t, int dim, const char* what) {
    Mat m = MatExpr::to_dense(t, dim);
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument(std::string("PSD constraint ") + what + " is not Hermitian");
}

}  // namespace detail

// Nullspace parameterization x = x0 + N z of the equality constraints.
struct EqualityElimination {
    Eigen::VectorXd x0;
    Eigen::MatrixXd nullspace;  // n x (n - rank)
    bool consistent = true;
};

inline EqualityElimination eliminate_equalities(const ConicProgram& p) {
    const int n = p.num_scalars();
    const int k = static_cast<int>(p.equalities().size());
    EqualityElimination out;
    if (k == 0) {
        out.x0 = Eigen::VectorXd::Zero(n);
        out.nullspace = Eigen::MatrixXd::Identity(n, n);
        return out;
    }
    if (n > 4096)
        throw std::invalid_argument("equality elimination supported only up to 4096 scalars");
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k, n);
    Eigen::VectorXd r(k);
    for (int j = 0; j < k; ++j) {
        const auto& [lhs, rhs] = p.equalities()[j];
        for (const auto& [s, v] : lhs.terms) e(j, s) += v;
        r[j] = rhs - lhs.constant;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(e);
    out.x0 = cod.solve(r);
    if ((e * out.x0 - r).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + r.cwiseAbs().maxCoeff())) {
        out.consistent = false;
        return out;
    }
    const int rank = static_cast<int>(cod.rank());
    // kernel basis from the column-pivoted factorization of e^T
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e, Eigen::ComputeFullV);
    out.nullspace = svd.matrixV().rightCols(n - rank);
    return out;
}

// Lowers a program (no equalities) to the real block LMI form with x = x0 + N z.
inline LmiProgram lower(const ConicProgram& p, const EqualityElimination& elim) {
    LmiProgram lp;
    const int nz = static_cast<int>(elim.nullspace.cols());
    lp.num_vars = nz;
    const bool identity_map = (elim.nullspace.rows() == nz) &&
                              elim.nullspace.isIdentity(0.0) && elim.x0.isZero(0.0);

    lp.c = Eigen::VectorXd::Zero(nz);
    lp.obj_const = p.objective().constant;
    Eigen::VectorXd c_full = Eigen::VectorXd::Zero(p.num_scalars());
    for (const auto& [s, v] : p.objective().terms) c_full[s] += v;
    if (identity_map) {
        lp.c = c_full;
    } else {
        lp.c = elim.nullspace.transpose() * c_full;
        lp.obj_const += c_full.dot(elim.x0);
    }

    int bi = 0;
    for (const auto& expr : p.psd_constraints()) {
        const int n = expr.dim;
        detail::check_hermitian_triplets(expr.constant, n, "constant");
        lp.block_sizes.push_back(2 * n);
        lp.f0.emplace_back();
        lp.block_vars.emplace_back();

        if (identity_map) {
            detail::append_embedded(lp.f0[bi], expr.constant, n);
            for (const auto& [s, t] : expr.terms) {
                detail::check_hermitian_triplets(t, n, "coefficient");
                LmiProgram::BlockVar bv;
                bv.var = s;
                detail::append_embedded(bv.t, t, n);
                lp.block_vars[bi].push_back(std::move(bv));
            }
        } else {
            // fold x0 into the constant and recombine coefficients by N
            Mat fc = MatExpr::to_dense(expr.constant, n);
            std::vector<Mat> coeff(expr.terms.size());
            for (size_t j = 0; j < expr.terms.size(); ++j) {
                detail::check_hermitian_triplets(expr.terms[j].second, n, "coefficient");
                coeff[j] = MatExpr::to_dense(expr.terms[j].second, n);
                fc += elim.x0[expr.terms[j].first] * coeff[j];
            }
            detail::append_embedded(lp.f0[bi], MatExpr::to_triplets(fc), n);
            for (int z = 0; z < nz; ++z) {
                Mat fz = Mat::Zero(n, n);
                for (size_t j = 0; j < expr.terms.size(); ++j)
                    fz += elim.nullspace(expr.terms[j].first, z) * coeff[j];
                auto t = MatExpr::to_triplets(fz);
                if (t.empty()) continue;
                LmiProgram::BlockVar bv;
                bv.var = z;
                detail::append_embedded(bv.t, t, n);
                lp.block_vars[bi].push_back(std::move(bv));
            }
        }
        ++bi;
    }
    return lp;
}

// Residuals of a candidate point, recomputed from the program description
// (independent of whatever the backend reported).
inline void verify_residuals(const ConicProgram& p, SdpSolution& sol) {
    double eqviol = 0.0;
    for (const auto& [lhs, rhs] : p.equalities()) {
        double v = lhs.constant;
        for (const auto& [s, coeff] : lhs.terms) v += coeff * sol.x[s];
        eqviol = std::max(eqviol, std::abs(v - rhs));
    }
    sol.max_equality_violation = eqviol;
    double mineig = std::numeric_limits<double>::infinity();
    for (const auto& expr : p.psd_constraints()) {
        Mat m = MatExpr::to_dense(expr.constant, expr.dim);
        for (const auto& [s, t] : expr.terms) m += sol.x[s] * MatExpr::to_dense(t, expr.dim);
        Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
        mineig = std::min(mineig, es.eigenvalues().minCoeff());
    }
    sol.min_psd_eigenvalue = p.psd_constraints().empty() ? 0.0 : mineig;
}

inline SdpSolution solve_with(Backend& be, const ConicProgram& p, const SolveOptions& opt = {}) {
    SdpSolution sol;
    auto elim = eliminate_equalities(p);
    if (!elim.consistent) {
        sol.status = Status::infeasible;
        sol.message = "inconsistent equality constraints";
        sol.x = Eigen::VectorXd::Zero(p.num_scalars());
        return sol;
    }
    LmiProgram lp = lower(p, elim);
    RawSolution raw = be.solve_lmi(lp, opt);

    sol.status = raw.status;
    sol.iterations = raw.iterations;
    sol.message = raw.message;
    sol.duality_gap = raw.gap;
    if (raw.x.size() == lp.num_vars) {
        sol.x = elim.x0 + elim.nullspace * raw.x;
        sol.objective = raw.obj;
        sol.dual_objective = raw.dual_obj;
        verify_residuals(p, sol);
        // never report an optimal point whose recomputed residuals violate
        // the contract thresholds
        if (sol.status == Status::optimal &&
            (sol.max_equality_violation > 1e-7 || sol.min_psd_eigenvalue < -1e-7)) {
            sol.status = Status::numerical_failure;
            sol.message = "residual check failed after solve";
        }
    } else {
        sol.x = Eigen::VectorXd::Zero(p.num_scalars());
    }
    return sol;
}

}  // namespace gmarg::conic
