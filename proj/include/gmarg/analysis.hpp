#pragma once

#include <random>

#include "gmarg/statesearch.hpp"

// Robustness and structure analysis: white-noise tolerances by bisection,
// marginal PPT audits, uniqueness of the global state given its marginals,
// and the post-measurement separability sweep.

namespace gmarg {

//------------------------------------------------------------------------------
// White-noise tolerance
//------------------------------------------------------------------------------

struct ToleranceResult {
    double p_star = 0.0;
    double bracket = 0.0;  // half-width of the final bisection interval
    bool detected = false;
    std::string mode;  // "marginal" or "unrestricted"
    double value_at_zero = std::numeric_limits<double>::quiet_NaN();
    double value_lo = std::numeric_limits<double>::quiet_NaN();  // at p_star - bracket
    double value_hi = std::numeric_limits<double>::quiet_NaN();  // at p_star + bracket
    int solves = 0;
    std::string notes;
};

// Largest white-noise fraction at which the witness stays negative. The
// detection value V(p) is a pointwise minimum of affine functions of p, hence
// concave, and V(1) = 1/D > 0; a sign bisection is exact.
inline ToleranceResult noise_tolerance(const DensityOperator& rho, const MarginalPattern& pattern,
                                       bool restricted, double bracket_width = 1e-4,
                                       const conic::SolveOptions& opt = {}) {
    ToleranceResult out;
    out.mode = restricted ? "marginal" : "unrestricted";
    auto value_at = [&](double p) {
        auto mixed = mix_with_white_noise(rho, p);
        auto r = restricted ? min_witness_value(mixed, pattern, opt)
                            : min_witness_value_unrestricted(mixed, opt);
        if (r.status != conic::Status::optimal)
            throw std::runtime_error("tolerance bisection: solver failed at p = " +
                                     std::to_string(p));
        ++out.solves;
        return r.value;
    };

    out.value_at_zero = value_at(0.0);
    if (out.value_at_zero >= kDetectionThreshold) {
        out.notes = "not detected at p = 0";
        return out;
    }
    out.detected = true;

    double lo = 0.0, hi = 1.0;
    double vlo = out.value_at_zero;
    double vhi = 1.0 / rho.dim();  // every unit-trace witness gives 1/D on white noise
    bool hi_evaluated = false;
    while (hi - lo > 2.0 * bracket_width) {
        const double mid = 0.5 * (lo + hi);
        const double v = value_at(mid);
        if (v < kDetectionThreshold) {
            lo = mid;
            vlo = v;
        } else {
            hi = mid;
            vhi = v;
            hi_evaluated = true;
        }
    }
    out.p_star = 0.5 * (lo + hi);
    out.bracket = 0.5 * (hi - lo);
    out.value_lo = vlo;
    out.value_hi = vhi;
    if (!hi_evaluated) out.notes = "upper endpoint value analytic (1/D at p = 1)";
    return out;
}

// Detection values on an equispaced grid of noise fractions; used to check
// concavity and the single sign change of V(p).
inline std::vector<double> detection_profile(const DensityOperator& rho,
                                             const MarginalPattern& pattern, bool restricted,
                                             int points = 10, const conic::SolveOptions& opt = {}) {
    std::vector<double> v;
    for (int i = 0; i < points; ++i) {
        const double p = static_cast<double>(i) / (points - 1);
        auto mixed = mix_with_white_noise(rho, p);
        auto r = restricted ? min_witness_value(mixed, pattern, opt)
                            : min_witness_value_unrestricted(mixed, opt);
        if (r.status != conic::Status::optimal)
            throw std::runtime_error("detection profile: solver failed");
        v.push_back(r.value);
    }
    return v;
}

//------------------------------------------------------------------------------
// Marginal audit
//------------------------------------------------------------------------------

struct PairAudit {
    std::pair<int, int> pair;
    double pt_min_eig = 0.0;
    bool ppt = false;
    std::string separability;  // verdict, exact only for two-qubit pairs
};

struct TripleAudit {
    std::array<int, 3> triple;
    double pt_min_eig = 0.0;  // min over the three internal bipartitions
    bool ppt = false;
};

struct AuditReport {
    std::vector<PairAudit> pairs;
    std::vector<TripleAudit> triples;
    bool all_pairs_ppt = true;
    bool all_triples_ppt = true;
};

inline AuditReport marginal_audit(const DensityOperator& rho, const MarginalPattern& pattern,
                                  bool include_triples = false) {
    constexpr double kPptTol = -1e-9;
    AuditReport out;
    for (auto [a, b] : pattern.pairs) {
        auto red = partial_trace(rho, PartySet{a, b});
        PairAudit pa{{a, b}, min_eigenvalue(partial_transpose(red, {0})), false, ""};
        pa.ppt = pa.pt_min_eig >= kPptTol;
        const bool two_qubits = rho.reg().dim(a) == 2 && rho.reg().dim(b) == 2;
        if (two_qubits)
            pa.separability = pa.ppt ? "separable" : "entangled";
        else
            pa.separability = pa.ppt ? "PPT-certified, separability unverified" : "entangled";
        out.all_pairs_ppt = out.all_pairs_ppt && pa.ppt;
        out.pairs.push_back(std::move(pa));
    }
    if (include_triples) {
        std::vector<std::array<int, 3>> triples = pattern.triples;
        if (triples.empty()) {
            const int n = rho.reg().num_parties();
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    for (int c = b + 1; c < n; ++c) triples.push_back({a, b, c});
        }
        for (const auto& t : triples) {
            auto red = partial_trace(rho, PartySet{t[0], t[1], t[2]});
            double worst = std::numeric_limits<double>::infinity();
            for (int pos = 0; pos < 3; ++pos)
                worst = std::min(worst, min_eigenvalue(partial_transpose(red, {pos})));
            TripleAudit ta{t, worst, worst >= kPptTol};
            out.all_triples_ppt = out.all_triples_ppt && ta.ppt;
            out.triples.push_back(std::move(ta));
        }
    }
    return out;
}

//------------------------------------------------------------------------------
// Uniqueness of the global state given the marginals
//------------------------------------------------------------------------------

enum class UniquenessVerdict { unique, non_unique, inconclusive };

inline std::string verdict_name(UniquenessVerdict v) {
    switch (v) {
        case UniquenessVerdict::unique: return "unique";
        case UniquenessVerdict::non_unique: return "non-unique";
        default: return "inconclusive";
    }
}

struct UniquenessReport {
    UniquenessVerdict verdict = UniquenessVerdict::inconclusive;
    double max_range = 0.0;
    int directions_tested = 0;
    int face_dim = 0;        // free directions inside the face of the center
    int center_rank = 0;
    double center_min_eig = 0.0;  // optimal slack of the max-min-eigenvalue solve
    Mat direction;           // complement direction attaining max_range
    std::string notes;
};

namespace analysis_detail {

struct CompatSlice {
    QuditRegister reg;
    std::vector<ProductBasisElement> complement;  // free directions
    Mat fixed_part;                               // component determined by the marginals
};

inline CompatSlice build_slice(const MarginalSet& ms) {
    const QuditRegister& reg = ms.pattern.reg;
    std::set<int> covered;
    for (auto [a, b] : ms.pattern.pairs) {
        covered.insert(a);
        covered.insert(b);
    }
    CompatSlice slice{reg, {}, Mat::Zero(reg.total_dim(), reg.total_dim())};
    for (auto& el : full_product_basis(reg)) {
        bool in_pattern = false;
        if (el.support.empty()) {
            in_pattern = true;
        } else if (el.support.size() == 1) {
            in_pattern = covered.count(el.support[0]) > 0;
        } else if (el.support.size() == 2) {
            in_pattern = ms.pattern.contains_pair(el.support[0], el.support[1]);
        }
        if (in_pattern) {
            const double c = witness_detail::expectation_from_marginals(el, ms);
            slice.fixed_part += (c / el.norm2) * el.matrix;
        } else {
            slice.complement.push_back(std::move(el));
        }
    }
    return slice;
}

// The compatible set lives on the face of a relative-interior completion:
// every compatible state is supported on range(rho_hat). Compressed to that
// face the slice has a strictly positive center, so the extremization SDPs
// satisfy Slater's condition even when the full-space slice has empty
// interior (always the case for pure-state marginals).
struct FaceSlice {
    QuditRegister reg = QuditRegister::qubits(1);
    Mat rho_hat;               // relative-interior completion
    Mat face;                  // dim x r isometry onto range(rho_hat)
    double center_min_eig = 0.0;
    double outside_face = 0.0;  // verified bound on mass outside the face
    std::vector<Mat> free_dirs;  // full-space Hermitian directions that may vary
    std::vector<Mat> free_dirs_compressed;  // the same, as r x r blocks
    Mat sigma_hat;             // compressed center, strictly positive
};

// max/min of tr(X rho) over the compatible set, solved on the face.
inline std::pair<double, double> extremize_on_face(const FaceSlice& fs, const Mat& x,
                                                   const conic::SolveOptions& opt) {
    const int k = static_cast<int>(fs.free_dirs.size());
    const Mat xc = fs.face.adjoint() * x * fs.face;
    std::pair<double, double> out{hs_inner(x, fs.rho_hat), hs_inner(x, fs.rho_hat)};
    if (k == 0) return out;
    for (int sense = 0; sense < 2; ++sense) {
        conic::ConicProgram prog;
        auto u = prog.add_scalars("u", k);
        conic::LinExpr obj;
        obj.constant = hs_inner(x, fs.rho_hat);
        for (int j = 0; j < k; ++j) {
            const double c = hs_inner(xc, fs.free_dirs_compressed[j]);
            if (std::abs(c) > 1e-14) obj.add(prog.scalar(u, j), c);
        }
        if (sense == 0) {  // maximize
            for (auto& term : obj.terms) term.second = -term.second;
            obj.constant = -obj.constant;
        }
        prog.set_objective(obj);
        conic::MatExpr sigma;
        sigma.dim = static_cast<int>(fs.sigma_hat.rows());
        sigma.add_constant(fs.sigma_hat);
        for (int j = 0; j < k; ++j) sigma.add_term(prog.scalar(u, j), fs.free_dirs_compressed[j]);
        prog.add_psd(std::move(sigma));
        auto sol = conic::solve(prog, opt);
        if (sol.status != conic::Status::optimal)
            throw std::runtime_error("compatibility extremization failed: " + sol.message);
        (sense == 0 ? out.first : out.second) = sense == 0 ? -sol.objective : sol.objective;
    }
    return out;  // (max, min)
}

inline FaceSlice build_face_slice(const MarginalSet& ms, const conic::SolveOptions& opt) {
    const QuditRegister& reg = ms.pattern.reg;
    const int dim = reg.total_dim();
    CompatSlice slice = build_slice(ms);
    const int nz = static_cast<int>(slice.complement.size());

    FaceSlice fs;
    fs.reg = reg;

    // relative-interior completion: maximize the least eigenvalue
    conic::ConicProgram center;
    auto z = center.add_scalars("z", nz);
    auto t = center.add_scalars("t", 1);
    conic::LinExpr obj;
    obj.add(center.scalar(t, 0), -1.0);
    center.set_objective(obj);
    conic::MatExpr rho;
    rho.dim = dim;
    rho.add_constant(slice.fixed_part);
    for (int j = 0; j < nz; ++j) rho.add_term(center.scalar(z, j), slice.complement[j].matrix);
    rho.add_term(center.scalar(t, 0), -Mat::Identity(dim, dim));
    center.add_psd(std::move(rho));
    conic::MatExpr cap;
    cap.dim = 1;
    cap.add_constant(Mat::Identity(1, 1));
    cap.add_term(center.scalar(t, 0), -Mat::Identity(1, 1));
    center.add_psd(std::move(cap));
    auto csol = conic::solve(center, opt);
    if (csol.status != conic::Status::optimal)
        throw std::runtime_error("compatibility center solve failed: " + csol.message);
    fs.center_min_eig = -csol.objective;
    if (fs.center_min_eig < -1e-8)
        throw std::invalid_argument("marginals admit no PSD completion");

    fs.rho_hat = slice.fixed_part;
    for (int j = 0; j < nz; ++j)
        fs.rho_hat += csol.x[center.scalar(z, j)] * slice.complement[j].matrix;
    Eigen::SelfAdjointEigenSolver<Mat> es(fs.rho_hat);
    const double tau = std::max(1e-6 * es.eigenvalues().maxCoeff(), 1e-7);
    std::vector<int> face_idx;
    for (int i = 0; i < dim; ++i)
        if (es.eigenvalues()(i) > tau) face_idx.push_back(i);
    const int r = static_cast<int>(face_idx.size());
    fs.face.resize(dim, r);
    for (int i = 0; i < r; ++i) fs.face.col(i) = es.eigenvectors().col(face_idx[i]);
    fs.sigma_hat = fs.face.adjoint() * fs.rho_hat * fs.face;
    fs.sigma_hat = 0.5 * (fs.sigma_hat + fs.sigma_hat.adjoint()).eval();

    // verify the face: maximize the mass outside it over a slightly relaxed
    // slice (the relaxation restores strict feasibility; the bound is safe)
    if (r < dim && nz > 0) {
        const double eps = 1e-7;
        Mat outside = Mat::Identity(dim, dim) - fs.face * fs.face.adjoint();
        conic::ConicProgram pr;
        auto pz = pr.add_scalars("z", nz);
        conic::LinExpr pobj;
        for (int j = 0; j < nz; ++j) {
            const double c = hs_inner(outside, slice.complement[j].matrix);
            if (std::abs(c) > 1e-14) pobj.add(pr.scalar(pz, j), -c);  // maximize
        }
        pr.set_objective(pobj);
        conic::MatExpr prho;
        prho.dim = dim;
        prho.add_constant(slice.fixed_part + eps * Mat::Identity(dim, dim));
        for (int j = 0; j < nz; ++j) prho.add_term(pr.scalar(pz, j), slice.complement[j].matrix);
        pr.add_psd(std::move(prho));
        auto psol = conic::solve(pr, opt);
        if (psol.status == conic::Status::optimal)
            fs.outside_face = -psol.objective + hs_inner(outside, slice.fixed_part);
        else
            fs.outside_face = std::numeric_limits<double>::quiet_NaN();
    }

    // free directions: Hermitian on the face, orthogonal to the fixed span
    std::vector<Mat> fbasis;
    for (int i = 0; i < r; ++i) {
        const Vec ui = fs.face.col(i);
        fbasis.push_back(ui * ui.adjoint());
        for (int j = i + 1; j < r; ++j) {
            const Vec uj = fs.face.col(j);
            fbasis.push_back((ui * uj.adjoint() + uj * ui.adjoint()) / std::sqrt(2.0));
            fbasis.push_back((cxd(0, 1) * ui * uj.adjoint() - cxd(0, 1) * uj * ui.adjoint()) /
                             std::sqrt(2.0));
        }
    }
    std::vector<Mat> sbasis;
    for (auto& el : two_body_subspace(reg, ms.pattern.pairs)) sbasis.push_back(el.matrix);
    Eigen::MatrixXd cons(sbasis.size(), fbasis.size());
    for (size_t s = 0; s < sbasis.size(); ++s)
        for (size_t f = 0; f < fbasis.size(); ++f) cons(s, f) = hs_inner(sbasis[s], fbasis[f]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cons, Eigen::ComputeFullV);
    int rank = 0;
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-9 * std::max(1.0, smax)) ++rank;
    const int free_dim = static_cast<int>(fbasis.size()) - rank;
    for (int k = 0; k < free_dim; ++k) {
        Eigen::VectorXd coeff = svd.matrixV().col(svd.matrixV().cols() - 1 - k);
        Mat v = Mat::Zero(dim, dim);
        for (size_t f = 0; f < fbasis.size(); ++f) v += coeff[f] * fbasis[f];
        fs.free_dirs.push_back(v);
        Mat vc = fs.face.adjoint() * v * fs.face;
        fs.free_dirs_compressed.push_back(0.5 * (vc + vc.adjoint()).eval());
    }
    return fs;
}

}  // namespace analysis_detail

// Range of tr(X rho) over all states compatible with the marginal set.
inline std::pair<double, double> range_along(const MarginalSet& ms, const Mat& x,
                                             const conic::SolveOptions& opt = {}) {
    auto fs = analysis_detail::build_face_slice(ms, opt);
    return analysis_detail::extremize_on_face(fs, x, opt);
}

// Decides whether the marginal set pins down the global state. One SDP finds
// the max-min-eigenvalue completion (a relative-interior point); linear
// algebra on its face identifies the directions that may vary; those are
// extremized explicitly and the face itself is validated by a relaxed solve.
inline UniquenessReport compatibility_range(const MarginalSet& ms,
                                            const conic::SolveOptions& opt = {}) {
    using namespace analysis_detail;
    const int dim = ms.pattern.reg.total_dim();
    UniquenessReport rep;
    rep.direction = Mat::Zero(dim, dim);

    FaceSlice fs = build_face_slice(ms, opt);
    rep.center_min_eig = fs.center_min_eig;
    rep.center_rank = static_cast<int>(fs.face.cols());
    rep.face_dim = static_cast<int>(fs.free_dirs.size());

    double max_range = 0.0;
    for (int k = 0; k < rep.face_dim; ++k) {
        auto [mx, mn] = extremize_on_face(fs, fs.free_dirs[k], opt);
        rep.directions_tested += 2;
        if (mx - mn > max_range) {
            max_range = mx - mn;
            rep.direction = fs.free_dirs[k];
        }
    }
    rep.max_range = max_range;

    if (max_range < 1e-6)
        rep.verdict = UniquenessVerdict::unique;
    else if (max_range > 1e-4)
        rep.verdict = UniquenessVerdict::non_unique;
    else
        rep.verdict = UniquenessVerdict::inconclusive;

    // a face that leaks compatible mass outside itself would invalidate a
    // "unique" verdict obtained by pruning
    if (!(fs.outside_face != fs.outside_face)) {  // not NaN
        rep.notes += "mass outside face <= " + std::to_string(fs.outside_face) + "; ";
        if (fs.outside_face > 1e-4 && rep.verdict == UniquenessVerdict::unique) {
            rep.verdict = UniquenessVerdict::inconclusive;
            rep.notes += "face validation failed; ";
        }
    }
    return rep;
}

//------------------------------------------------------------------------------
// Localizable-entanglement sweep
//------------------------------------------------------------------------------

struct SweepResult {
    double min_value = 0.0;            // least PT eigenvalue over all directions
    MeasurementDirection worst;
    int evaluations = 0;
};

// Minimum over projective measurements on `party` of the least PT eigenvalue
// of the (unnormalized) post-measurement state: a grid scan plus a bounded
// simplex refinement. Reported as a sampled minimum, not a certified bound.
inline SweepResult localizable_sweep(const DensityOperator& rho, int party, int grid_theta = 60,
                                     int grid_phi = 120, int refine_budget = 200) {
    SweepResult out;
    auto f = [&](double theta, double phi) {
        MeasurementDirection d{party, theta, phi};
        auto pm = post_measurement_state(static_cast<const HermitianOperator&>(rho), d);
        ++out.evaluations;
        return min_eigenvalue(partial_transpose(pm, {0}));
    };

    double best = std::numeric_limits<double>::infinity();
    double bt = 0, bp = 0;
    for (int i = 0; i < grid_theta; ++i) {
        const double theta = M_PI * (i + 0.5) / grid_theta;
        for (int j = 0; j < grid_phi; ++j) {
            const double phi = 2 * M_PI * j / grid_phi;
            const double v = f(theta, phi);
            if (v < best) {
                best = v;
                bt = theta;
                bp = phi;
            }
        }
    }

    // Nelder-Mead on (theta, phi); the objective is smooth and periodic
    using P = std::array<double, 2>;
    std::array<std::pair<double, P>, 3> simplex;
    const double h = M_PI / grid_theta;
    simplex[0] = {best, {bt, bp}};
    simplex[1] = {f(bt + h, bp), {bt + h, bp}};
    simplex[2] = {f(bt, bp + h), {bt, bp + h}};
    int used = 2;
    while (used < refine_budget) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        P centroid{(simplex[0].second[0] + simplex[1].second[0]) / 2,
                   (simplex[0].second[1] + simplex[1].second[1]) / 2};
        P refl{2 * centroid[0] - simplex[2].second[0], 2 * centroid[1] - simplex[2].second[1]};
        double fr = f(refl[0], refl[1]);
        ++used;
        if (fr < simplex[0].first) {
            P exp_{3 * centroid[0] - 2 * simplex[2].second[0],
                   3 * centroid[1] - 2 * simplex[2].second[1]};
            double fe = f(exp_[0], exp_[1]);
            ++used;
            simplex[2] = fe < fr ? std::make_pair(fe, exp_) : std::make_pair(fr, refl);
        } else if (fr < simplex[1].first) {
            simplex[2] = {fr, refl};
        } else {
            P con{(centroid[0] + simplex[2].second[0]) / 2,
                  (centroid[1] + simplex[2].second[1]) / 2};
            double fc = f(con[0], con[1]);
            ++used;
            if (fc < simplex[2].first) {
                simplex[2] = {fc, con};
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[i].second = {(simplex[i].second[0] + simplex[0].second[0]) / 2,
                                         (simplex[i].second[1] + simplex[0].second[1]) / 2};
                    simplex[i].first = f(simplex[i].second[0], simplex[i].second[1]);
                    ++used;
                }
            }
        }
        const double spread = std::abs(simplex[0].first - simplex[2].first);
        if (spread < 1e-13) break;
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    out.min_value = std::min(best, simplex[0].first);
    out.worst = {party, simplex[0].second[0], simplex[0].second[1]};
    return out;
}

}  // namespace gmarg
