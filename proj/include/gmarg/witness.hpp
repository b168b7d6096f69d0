#pragma once

#include <array>
#include <map>
#include <optional>

#include "gmarg/basis.hpp"
#include "gmarg/sdp.hpp"

// Step 1 of the search: the PPT-mixture witness SDP restricted to a marginal
// pattern. A feasible W is decomposable for every bipartition M|Mbar
// (W = P_M + Q_M^{T_M} with P_M, Q_M psd) and supported on the pattern's
// two-body operator span with tr(W) = 1. A negative optimum certifies that
// every global state with the given marginals is genuinely multiparticle
// entangled.

namespace gmarg {

// Witness values above this are treated as non-detections; values in
// [threshold, 0) are "undecided" rather than certificates.
inline constexpr double kDetectionThreshold = -1e-7;

struct MarginalPattern {
    QuditRegister reg;
    std::vector<std::pair<int, int>> pairs;              // a < b, unique, sorted
    std::vector<std::array<int, 3>> triples;             // optional bookkeeping
    bool connected = false;                              // every party in some pair

    MarginalPattern(QuditRegister r, std::vector<std::pair<int, int>> prs,
                    std::vector<std::array<int, 3>> trs = {})
        : reg(std::move(r)), triples(std::move(trs)) {
        if (prs.empty()) throw std::invalid_argument("pattern needs at least one pair");
        std::set<std::pair<int, int>> uniq;
        for (auto [a, b] : prs) {
            if (a > b) std::swap(a, b);
            require_party_set(reg, {a, b});
            uniq.insert({a, b});
        }
        pairs.assign(uniq.begin(), uniq.end());
        std::set<int> covered;
        for (auto [a, b] : pairs) {
            covered.insert(a);
            covered.insert(b);
        }
        connected = static_cast<int>(covered.size()) == reg.num_parties();
        for (auto& t : triples) {
            std::sort(t.begin(), t.end());
            require_party_set(reg, {t[0], t[1], t[2]});
        }
    }

    static MarginalPattern all_pairs(const QuditRegister& reg) {
        std::vector<std::pair<int, int>> prs;
        for (int a = 0; a < reg.num_parties(); ++a)
            for (int b = a + 1; b < reg.num_parties(); ++b) prs.push_back({a, b});
        return MarginalPattern(reg, std::move(prs));
    }

    bool contains_pair(int a, int b) const {
        if (a > b) std::swap(a, b);
        return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(a, b));
    }
};

struct MarginalSet {
    MarginalPattern pattern;
    std::map<std::pair<int, int>, DensityOperator> states;

    static MarginalSet from_state(const DensityOperator& rho, const MarginalPattern& pattern) {
        if (rho.reg() != pattern.reg)
            throw std::invalid_argument("state register does not match pattern");
        MarginalSet out{pattern, {}};
        for (auto [a, b] : pattern.pairs)
            out.states.emplace(std::make_pair(a, b), partial_trace(rho, {a, b}));
        return out;
    }

    const DensityOperator& at(int a, int b) const {
        if (a > b) std::swap(a, b);
        return states.at({a, b});
    }

    // Largest disagreement between single-party reductions of overlapping
    // marginals; the invariant requires <= 1e-8.
    double overlap_inconsistency() const {
        double worst = 0.0;
        std::map<int, Mat> seen;
        for (const auto& [pr, rho] : states) {
            const auto [a, b] = pr;
            for (int which : {0, 1}) {
                const int party = which == 0 ? a : b;
                Mat red = partial_trace(rho, {which}).matrix();
                auto it = seen.find(party);
                if (it == seen.end())
                    seen.emplace(party, std::move(red));
                else
                    worst = std::max(worst, (red - it->second).cwiseAbs().maxCoeff());
            }
        }
        return worst;
    }
};

struct Witness {
    QuditRegister reg;
    MarginalPattern pattern;
    bool restricted = true;  // false for the full-span variant
    std::vector<ProductBasisElement> basis;
    std::vector<double> coeffs;                 // aligned with basis; coeffs[0] = 1/D
    HermitianOperator op;                       // assembled W
    std::vector<Bipartition> bipartitions;      // canonical order
    std::vector<std::pair<Mat, Mat>> certificates;  // (P_M, Q_M)
};

struct WitnessValidation {
    bool pass = false;
    double trace_error = 0.0;
    double subspace_residual = 0.0;
    struct PerBipartition {
        std::string m;
        double p_min_eig = 0.0;
        double q_min_eig = 0.0;
        double decomposition_residual = 0.0;
    };
    std::vector<PerBipartition> bipartitions;
};

struct WitnessResult {
    conic::Status status = conic::Status::numerical_failure;
    double value = std::numeric_limits<double>::quiet_NaN();
    std::optional<Witness> witness;
    conic::SdpSolution solution;

    bool detected() const { return status == conic::Status::optimal && value < kDetectionThreshold; }
};

namespace witness_detail {

// Expectation of a product basis element from the two-party marginal of the
// first pattern pair containing its support.
inline double expectation_from_marginals(const ProductBasisElement& el, const MarginalSet& ms) {
    const QuditRegister& reg = ms.pattern.reg;
    if (el.support.empty()) return 1.0;  // identity on a unit-trace state
    for (auto [a, b] : ms.pattern.pairs) {
        bool inside = true;
        for (int p : el.support) inside = inside && (p == a || p == b);
        if (!inside) continue;
        const auto& rho = ms.at(a, b);
        Mat local = Mat::Identity(1, 1);
        for (int p : {a, b}) {
            auto it = std::find(el.support.begin(), el.support.end(), p);
            if (it == el.support.end()) {
                local = kron(local, Mat::Identity(reg.dim(p), reg.dim(p)));
            } else {
                const int k = el.local_idx[it - el.support.begin()];
                local = kron(local, operator_basis(reg.dim(p)).elements[k]);
            }
        }
        return hs_inner(local, rho.matrix());
    }
    throw std::invalid_argument("basis element not supported on any known marginal");
}

// Core witness SDP over expansion coefficients c_k = tr(G_k rho).
inline WitnessResult solve_witness(const QuditRegister& reg, const MarginalPattern& pattern,
                                   bool restricted, std::vector<ProductBasisElement> basis,
                                   const std::vector<double>& expect,
                                   const conic::SolveOptions& opt) {
    const int dim = reg.total_dim();
    const int nb = static_cast<int>(basis.size());

    conic::ConicProgram prog;
    auto w = prog.add_scalars("w", nb - 1);
    conic::LinExpr obj;
    obj.constant = expect[0] / dim;  // fixed identity coefficient carries tr(W) = 1
    for (int k = 1; k < nb; ++k) obj.add(prog.scalar(w, k - 1), expect[k]);
    prog.set_objective(obj);

    conic::MatExpr wexpr;
    wexpr.dim = dim;
    wexpr.add_constant(Mat::Identity(dim, dim) / dim);
    for (int k = 1; k < nb; ++k) wexpr.add_term(prog.scalar(w, k - 1), basis[k].matrix);

    auto bps = canonical_bipartitions(reg);
    std::vector<conic::VarRef> qvars;
    for (const auto& bp : bps) {
        auto q = prog.add_hermitian("Q_" + bp.to_string(), dim);
        qvars.push_back(q);
        prog.add_psd(prog.var_expr(q));
        conic::MatExpr qpt = prog.var_expr(q).mapped([&](const Mat& m) {
            return partial_transpose(HermitianOperator(reg, m), bp.m).matrix();
        });
        conic::MatExpr pexpr = wexpr;
        for (auto& [s, t] : qpt.terms) {
            for (auto& tr : t) tr.v = -tr.v;
            pexpr.terms.push_back({s, std::move(t)});
        }
        prog.add_psd(std::move(pexpr));
    }

    WitnessResult res;
    res.solution = conic::solve(prog, opt);
    res.status = res.solution.status;
    if (res.status != conic::Status::optimal) return res;
    res.value = res.solution.objective;

    Witness wit{reg, pattern, restricted, std::move(basis), {},
                HermitianOperator(reg, Mat::Identity(dim, dim) / dim), bps, {}};
    wit.coeffs.assign(nb, 0.0);
    wit.coeffs[0] = 1.0 / dim;
    for (int k = 1; k < nb; ++k) wit.coeffs[k] = res.solution.x[prog.scalar(w, k - 1)];
    Mat wm = Mat::Zero(dim, dim);
    for (int k = 0; k < nb; ++k) wm += wit.coeffs[k] * wit.basis[k].matrix;
    wit.op = HermitianOperator(reg, wm);
    for (size_t i = 0; i < bps.size(); ++i) {
        Mat q = prog.hermitian_value(qvars[i], res.solution.x);
        q = 0.5 * (q + q.adjoint()).eval();
        Mat p = wm - partial_transpose(HermitianOperator(reg, q), bps[i].m).matrix();
        wit.certificates.push_back({std::move(p), std::move(q)});
    }
    res.witness = std::move(wit);
    return res;
}

}  // namespace witness_detail

// Optimal pattern-supported PPT-mixture witness for a fully known state.
inline WitnessResult min_witness_value(const DensityOperator& rho, const MarginalPattern& pattern,
                                       const conic::SolveOptions& opt = {}) {
    if (rho.reg() != pattern.reg) throw std::invalid_argument("state/pattern register mismatch");
    auto basis = two_body_subspace(pattern.reg, pattern.pairs);
    std::vector<double> expect(basis.size());
    for (size_t k = 0; k < basis.size(); ++k) expect[k] = hs_inner(basis[k].matrix, rho.matrix());
    return witness_detail::solve_witness(pattern.reg, pattern, true, std::move(basis), expect, opt);
}

// Same program with the objective evaluated from marginal data alone.
inline WitnessResult min_witness_value(const MarginalSet& marginals,
                                       const conic::SolveOptions& opt = {}) {
    const auto& pattern = marginals.pattern;
    auto basis = two_body_subspace(pattern.reg, pattern.pairs);
    std::vector<double> expect(basis.size());
    for (size_t k = 0; k < basis.size(); ++k)
        expect[k] = witness_detail::expectation_from_marginals(basis[k], marginals);
    return witness_detail::solve_witness(pattern.reg, pattern, true, std::move(basis), expect, opt);
}

// PPT-mixture witness without the two-body support restriction; the plain
// genuine-multiparticle-entanglement test for the full state.
inline WitnessResult min_witness_value_unrestricted(const DensityOperator& rho,
                                                    const conic::SolveOptions& opt = {}) {
    auto pattern = MarginalPattern::all_pairs(rho.reg());
    auto basis = full_product_basis(rho.reg());
    std::vector<double> expect(basis.size());
    for (size_t k = 0; k < basis.size(); ++k) expect[k] = hs_inner(basis[k].matrix, rho.matrix());
    return witness_detail::solve_witness(rho.reg(), pattern, false, std::move(basis), expect, opt);
}

// Evaluates tr(W rho) for any global rho consistent with the marginals.
inline double witness_value(const Witness& w, const MarginalSet& marginals) {
    for (auto [a, b] : w.pattern.pairs)
        if (!marginals.pattern.contains_pair(a, b))
            throw std::invalid_argument("witness pattern not covered by marginal set");
    double v = 0.0;
    for (size_t k = 0; k < w.basis.size(); ++k) {
        if (w.coeffs[k] == 0.0) continue;
        v += w.coeffs[k] * witness_detail::expectation_from_marginals(w.basis[k], marginals);
    }
    return v;
}

// Re-verifies every witness invariant with plain eigensolvers, independently
// of whatever the SDP backend reported.
inline WitnessValidation validate_witness(const Witness& w) {
    WitnessValidation v;
    v.trace_error = std::abs(w.op.trace() - 1.0);

    Mat proj = Mat::Zero(w.op.dim(), w.op.dim());
    for (const auto& el : w.basis) proj += (hs_inner(el.matrix, w.op.matrix()) / el.norm2) * el.matrix;
    v.subspace_residual = (proj - w.op.matrix()).cwiseAbs().maxCoeff();

    bool ok = v.trace_error <= 1e-8 && v.subspace_residual <= 1e-8;
    for (size_t i = 0; i < w.bipartitions.size(); ++i) {
        const auto& [p, q] = w.certificates[i];
        WitnessValidation::PerBipartition r;
        r.m = w.bipartitions[i].to_string();
        r.p_min_eig = min_eigenvalue(HermitianOperator(w.reg, p));
        r.q_min_eig = min_eigenvalue(HermitianOperator(w.reg, q));
        Mat recon = p + partial_transpose(HermitianOperator(w.reg, q), w.bipartitions[i].m).matrix();
        r.decomposition_residual = (w.op.matrix() - recon).cwiseAbs().maxCoeff();
        ok = ok && r.p_min_eig >= -1e-7 && r.q_min_eig >= -1e-7 && r.decomposition_residual <= 1e-7;
        v.bipartitions.push_back(std::move(r));
    }
    v.pass = ok;
    return v;
}

}  // namespace gmarg
