#pragma once

#include "gmarg/witness.hpp"

// Step 2 of the search: minimize tr(W rho) over global states whose
// constrained marginals stay PPT, optionally with three-body PPT conditions
// and strict-positivity constraints on post-measurement states.

namespace gmarg {

struct MeasurementDirection {
    int party = 0;
    double theta = 0.0, phi = 0.0;

    Vec ket() const {
        Vec c(2);
        c[0] = std::cos(theta / 2);
        c[1] = std::polar(std::sin(theta / 2), phi);
        return c;
    }
    Mat projector() const {
        Vec c = ket();
        return c * c.adjoint();
    }
};

// Deterministic quasi-uniform Bloch-sphere point set (Fibonacci lattice).
inline std::vector<MeasurementDirection> sample_measurement_directions(const QuditRegister& reg,
                                                                       int party, int count) {
    if (count < 1) throw std::invalid_argument("direction count must be positive");
    if (reg.dim(party) != 2)
        throw std::invalid_argument("measurement directions are defined for qubit parties");
    std::vector<MeasurementDirection> out;
    if (count == 1) return {{party, 0.0, 0.0}};
    if (count == 2) return {{party, 0.0, 0.0}, {party, M_PI, 0.0}};
    const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / count;
        out.push_back({party, std::acos(z), std::fmod(i * golden_angle, 2 * M_PI)});
    }
    return out;
}

// <c| op |c> at one party; the result lives on the remaining parties and its
// trace is the outcome probability when op is a state.
inline HermitianOperator contract_party(const HermitianOperator& op, int party, const Vec& c) {
    const QuditRegister& reg = op.reg();
    if (c.size() != reg.dim(party)) throw std::invalid_argument("contract_party: ket dimension");
    if (reg.num_parties() < 2)
        throw std::invalid_argument("contract_party: need at least two parties");
    const PartySet rest = reg.complement({party});
    const auto po = detail::subset_offsets(reg, {party});
    const auto ro = detail::subset_offsets(reg, rest);
    const int n = static_cast<int>(ro.size());
    Mat out = Mat::Zero(n, n);
    const Mat& m = op.matrix();
    for (int a = 0; a < c.size(); ++a)
        for (int b = 0; b < c.size(); ++b) {
            const cxd w = std::conj(c[a]) * c[b];
            if (std::abs(w) < 1e-16) continue;
            for (int r = 0; r < n; ++r)
                for (int q = 0; q < n; ++q) out(r, q) += w * m(po[a] + ro[r], po[b] + ro[q]);
        }
    return HermitianOperator(reg.sub(rest), std::move(out));
}

inline HermitianOperator post_measurement_state(const HermitianOperator& op,
                                                const MeasurementDirection& dir) {
    return contract_party(op, dir.party, dir.ket());
}

struct PostMeasurementConstraint {
    MeasurementDirection direction;
    double eps = 1e-4;
};

struct ConstraintSet {
    QuditRegister reg;
    std::vector<std::pair<int, int>> two_body_ppt;      // default: all pairs
    std::vector<std::array<int, 3>> three_body_ppt;
    std::vector<PostMeasurementConstraint> post_measurement;

    static ConstraintSet all_pairs(const QuditRegister& reg) {
        ConstraintSet cs{reg, {}, {}, {}};
        for (int a = 0; a < reg.num_parties(); ++a)
            for (int b = a + 1; b < reg.num_parties(); ++b) cs.two_body_ppt.push_back({a, b});
        return cs;
    }

    static ConstraintSet all_pairs_and_triples(const QuditRegister& reg) {
        ConstraintSet cs = all_pairs(reg);
        for (int a = 0; a < reg.num_parties(); ++a)
            for (int b = a + 1; b < reg.num_parties(); ++b)
                for (int c = b + 1; c < reg.num_parties(); ++c)
                    cs.three_body_ppt.push_back({a, b, c});
        return cs;
    }

    // Splits `total` directions across all qubit parties, round-robin.
    ConstraintSet& add_post_measurement(int total, double eps) {
        if (eps <= 0) throw std::invalid_argument("post-measurement eps must be positive");
        std::vector<int> parties;
        for (int p = 0; p < reg.num_parties(); ++p)
            if (reg.dim(p) == 2) parties.push_back(p);
        if (parties.empty()) throw std::invalid_argument("no qubit parties to measure");
        const int base = total / static_cast<int>(parties.size());
        int rem = total % static_cast<int>(parties.size());
        for (int p : parties) {
            const int count = base + (rem > 0 ? 1 : 0);
            if (rem > 0) --rem;
            for (const auto& d : sample_measurement_directions(reg, p, count))
                post_measurement.push_back({d, eps});
        }
        return *this;
    }
};

struct StateSearchResult {
    conic::Status status = conic::Status::numerical_failure;
    double value = std::numeric_limits<double>::quiet_NaN();
    std::optional<DensityOperator> state;
    // residuals re-verified on the returned state, independent of the solver
    double worst_pair_pt = std::numeric_limits<double>::quiet_NaN();
    double worst_triple_pt = std::numeric_limits<double>::quiet_NaN();
    double worst_post_measurement = std::numeric_limits<double>::quiet_NaN();
    double objective_recomputed = std::numeric_limits<double>::quiet_NaN();
    conic::SdpSolution solution;
    std::string notes;
};

namespace statesearch_detail {

struct AssembledConstraints {
    std::vector<conic::MatExpr> exprs;  // all PSD blocks, rho >= 0 first
};

inline AssembledConstraints assemble(const QuditRegister& reg,
                                     const std::vector<ProductBasisElement>& basis,
                                     const ConstraintSet& cs) {
    const int dim = reg.total_dim();
    const int nb = static_cast<int>(basis.size());
    AssembledConstraints out;

    conic::MatExpr rho;
    rho.dim = dim;
    rho.add_constant(Mat::Identity(dim, dim) / dim);
    for (int k = 1; k < nb; ++k) rho.add_term(k - 1, basis[k].matrix);
    out.exprs.push_back(std::move(rho));

    auto supported_inside = [](const ProductBasisElement& el, const PartySet& set) {
        for (int p : el.support)
            if (!std::binary_search(set.begin(), set.end(), p)) return false;
        return true;
    };

    auto add_marginal_pt = [&](const PartySet& keep, int transpose_pos) {
        int kd = 1;
        for (int p : keep) kd *= reg.dim(p);
        conic::MatExpr e;
        e.dim = kd;
        e.add_constant(Mat::Identity(kd, kd) * (1.0 / kd));
        for (int k = 1; k < nb; ++k) {
            if (!supported_inside(basis[k], keep)) continue;
            HermitianOperator red = partial_trace(HermitianOperator(reg, basis[k].matrix), keep);
            e.add_term(k - 1, partial_transpose(red, {transpose_pos}).matrix());
        }
        out.exprs.push_back(std::move(e));
    };

    for (auto [a, b] : cs.two_body_ppt) {
        require_party_set(reg, {a, b});
        add_marginal_pt({a, b}, 0);
    }
    for (const auto& t : cs.three_body_ppt) {
        PartySet keep{t[0], t[1], t[2]};
        require_party_set(reg, keep);
        for (int pos = 0; pos < 3; ++pos) add_marginal_pt(keep, pos);
    }
    for (const auto& pm : cs.post_measurement) {
        const Vec c = pm.direction.ket();
        const int rd = reg.total_dim() / reg.dim(pm.direction.party);
        conic::MatExpr e;
        e.dim = rd;
        e.add_constant(Mat::Identity(rd, rd) * (1.0 / reg.total_dim()) -
                       pm.eps * Mat::Identity(rd, rd));
        for (int k = 1; k < nb; ++k) {
            HermitianOperator pmop =
                contract_party(HermitianOperator(reg, basis[k].matrix), pm.direction.party, c);
            Mat coeff = partial_transpose(pmop, {0}).matrix();
            e.add_term(k - 1, coeff);
        }
        out.exprs.push_back(std::move(e));
    }
    return out;
}

}  // namespace statesearch_detail

// Minimizes tr(W rho) subject to rho psd, tr(rho) = 1, and the constraint
// set's PPT and post-measurement conditions. Infeasibility (e.g. an eps too
// large for any state) is certified by an auxiliary max-min-eigenvalue solve.
inline StateSearchResult min_state_for_witness(const HermitianOperator& w, const ConstraintSet& cs,
                                               const conic::SolveOptions& opt = {}) {
    const QuditRegister& reg = w.reg();
    if (reg != cs.reg) throw std::invalid_argument("witness/constraint register mismatch");
    const int dim = reg.total_dim();
    auto basis = full_product_basis(reg);
    const int nb = static_cast<int>(basis.size());

    auto assembled = statesearch_detail::assemble(reg, basis, cs);

    conic::ConicProgram prog;
    auto y = prog.add_scalars("rho", nb - 1);
    conic::LinExpr obj;
    obj.constant = w.trace() / dim;
    for (int k = 1; k < nb; ++k) {
        const double c = hs_inner(w.matrix(), basis[k].matrix);
        if (std::abs(c) > 1e-14) obj.add(prog.scalar(y, k - 1), c);
    }
    prog.set_objective(obj);
    for (const auto& e : assembled.exprs) prog.add_psd(e);

    StateSearchResult res;
    res.solution = conic::solve(prog, opt);
    res.status = res.solution.status;

    if (res.status != conic::Status::optimal) {
        // classify: is the constraint set feasible at all? The assembled
        // expressions reference scalars 0..nb-2, which line up with the
        // phase-1 program because its rho block is declared first.
        conic::ConicProgram phase1;
        auto y1 = phase1.add_scalars("rho", nb - 1);
        auto t = phase1.add_scalars("t", 1);
        conic::LinExpr o1;
        o1.add(phase1.scalar(t, 0), -1.0);
        phase1.set_objective(o1);
        for (auto e : assembled.exprs) {
            e.add_term(phase1.scalar(t, 0), -Mat::Identity(e.dim, e.dim));
            phase1.add_psd(std::move(e));
        }
        conic::MatExpr cap;
        cap.dim = 1;
        cap.add_constant(Mat::Identity(1, 1));
        cap.add_term(phase1.scalar(t, 0), -Mat::Identity(1, 1));
        phase1.add_psd(std::move(cap));
        (void)y1;
        auto p1 = conic::solve(phase1, opt);
        if (p1.status == conic::Status::optimal && -p1.objective < 1e-9) {
            res.status = conic::Status::infeasible;
            res.notes = "constraint set admits no strictly feasible state (max slack " +
                        std::to_string(-p1.objective) + ")";
        } else {
            res.notes = "solver failed on a feasible-looking constraint set";
        }
        return res;
    }

    res.value = res.solution.objective;

    // rebuild the state, clip solver round-off, and re-verify everything
    Mat m = Mat::Identity(dim, dim) / dim;
    for (int k = 1; k < nb; ++k) m += res.solution.x[prog.scalar(y, k - 1)] * basis[k].matrix;
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    m /= m.trace().real();
    res.state = DensityOperator(reg, m);

    res.worst_pair_pt = std::numeric_limits<double>::infinity();
    for (auto [a, b] : cs.two_body_ppt) {
        auto red = partial_trace(*res.state, PartySet{a, b});
        res.worst_pair_pt =
            std::min(res.worst_pair_pt, min_eigenvalue(partial_transpose(red, {0})));
    }
    res.worst_triple_pt = std::numeric_limits<double>::infinity();
    for (const auto& t : cs.three_body_ppt)
        for (int pos = 0; pos < 3; ++pos) {
            auto red = partial_trace(*res.state, PartySet{t[0], t[1], t[2]});
            res.worst_triple_pt =
                std::min(res.worst_triple_pt, min_eigenvalue(partial_transpose(red, {pos})));
        }
    res.worst_post_measurement = std::numeric_limits<double>::infinity();
    for (const auto& pm : cs.post_measurement) {
        auto pmst = post_measurement_state(*res.state, pm.direction);
        res.worst_post_measurement =
            std::min(res.worst_post_measurement,
                     min_eigenvalue(partial_transpose(pmst, {0})) - pm.eps);
    }
    res.objective_recomputed = hs_inner(w.matrix(), res.state->matrix());
    return res;
}

}  // namespace gmarg
