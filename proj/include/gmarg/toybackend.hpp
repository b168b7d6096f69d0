#pragma once

#include "gmarg/conic.hpp"

// Brute-force backend for tiny programs: at most two free scalars and LMI
// blocks of embedded size four (one complex 2x2 block). Feasibility is checked
// by direct eigenvalue computation on a shrinking grid, which makes the result
// verifiable without any interior-point machinery. Used by tests to
// cross-check the default backend.

namespace gmarg::conic {

class ToyBackend final : public Backend {
public:
    std::string name() const override { return "toy"; }

    RawSolution solve_lmi(const LmiProgram& p, const SolveOptions& opt) override {
        RawSolution out;
        if (p.num_vars > 2) {
            out.message = "toy backend handles at most 2 variables";
            return out;
        }
        for (int s : p.block_sizes)
            if (s > 4) {
                out.message = "toy backend handles blocks up to embedded size 4";
                return out;
            }

        const int m = p.num_vars;
        Eigen::VectorXd center = Eigen::VectorXd::Zero(m);
        double span = 16.0;
        Eigen::VectorXd best;
        double best_obj = std::numeric_limits<double>::infinity();

        const int steps = 33;
        for (int round = 0; round < 10; ++round) {
            bool found = false;
            Eigen::VectorXd x(m), round_best;
            double round_obj = std::numeric_limits<double>::infinity();
            const int n0 = m >= 1 ? steps : 1;
            const int n1 = m >= 2 ? steps : 1;
            for (int i = 0; i < n0; ++i) {
                if (m >= 1) x[0] = center[0] + span * (2.0 * i / (n0 - 1) - 1.0);
                for (int j = 0; j < n1; ++j) {
                    if (m >= 2) x[1] = center[1] + span * (2.0 * j / (n1 - 1) - 1.0);
                    if (!feasible(p, x)) continue;
                    const double obj = p.c.dot(x);
                    found = true;
                    if (obj < round_obj) {
                        round_obj = obj;
                        round_best = x;
                    }
                }
            }
            if (found && round_obj < best_obj) {
                best_obj = round_obj;
                best = round_best;
            }
            if (!best.size()) {
                // no feasible point in the widest grid
                if (round >= 1) break;
                span *= 4.0;
                continue;
            }
            center = best;
            span *= 2.0 / (steps - 1);  // zoom into one old grid cell
            if (span < 1e-9) break;
        }

        if (!best.size()) {
            out.status = Status::infeasible;
            out.message = "no feasible grid point";
            return out;
        }
        out.status = Status::optimal;
        out.x = best;
        out.obj = best_obj + p.obj_const;
        out.dual_obj = std::numeric_limits<double>::quiet_NaN();
        out.gap = std::numeric_limits<double>::quiet_NaN();
        out.iterations = 0;
        (void)opt;
        return out;
    }

private:
    static bool feasible(const LmiProgram& p, const Eigen::VectorXd& x) {
        for (size_t b = 0; b < p.block_sizes.size(); ++b) {
            const int n = p.block_sizes[b];
            Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
            for (const auto& t : p.f0[b]) f(t.r, t.c) += t.v;
            for (const auto& bv : p.block_vars[b])
                for (const auto& t : bv.t) f(t.r, t.c) += x[bv.var] * t.v;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -1e-9) return false;
        }
        return true;
    }
};

inline Backend& toy_backend() {
    static ToyBackend be;
    return be;
}

}  // namespace gmarg::conic
