#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "gmarg/conic.hpp"

// Default SDP backend: an infeasible-start primal-dual path-following method
// with HKM search directions and Mehrotra predictor-corrector, specialized to
// the block LMI form produced by conic::lower. The Schur complement is stored
// and factored blockwise over variable groups (variables sharing the same set
// of LMI blocks), which keeps the hub-and-spoke programs built by the witness
// module inside memory and time budgets.

namespace gmarg::conic {

namespace ipm_detail {

struct Groups {
    std::vector<int> group_of;               // var -> group id
    std::vector<int> local_of;               // var -> offset within its group
    std::vector<std::vector<int>> members;   // group -> vars, ascending
    std::vector<int> order;                  // group ids in elimination order
    std::vector<int> pos_of;                 // group id -> position in order
};

inline Groups build_groups(const LmiProgram& p) {
    const int m = p.num_vars;
    std::vector<std::vector<int>> sig(m);
    for (size_t b = 0; b < p.block_vars.size(); ++b)
        for (const auto& bv : p.block_vars[b]) sig[bv.var].push_back(static_cast<int>(b));

    Groups g;
    g.group_of.assign(m, -1);
    std::map<std::vector<int>, int> ids;
    for (int v = 0; v < m; ++v) {
        if (sig[v].empty()) throw std::invalid_argument("variable appears in no PSD block");
        auto [it, fresh] = ids.try_emplace(sig[v], static_cast<int>(ids.size()));
        g.group_of[v] = it->second;
        if (fresh) g.members.emplace_back();
        g.members[it->second].push_back(v);
    }
    g.local_of.assign(m, 0);
    for (const auto& mem : g.members)
        for (size_t i = 0; i < mem.size(); ++i) g.local_of[mem[i]] = static_cast<int>(i);

    // adjacency between groups (shared LMI block)
    const int ng = static_cast<int>(g.members.size());
    std::vector<std::set<int>> adj(ng);
    for (size_t b = 0; b < p.block_vars.size(); ++b) {
        std::set<int> present;
        for (const auto& bv : p.block_vars[b]) present.insert(g.group_of[bv.var]);
        for (int a : present)
            for (int c : present)
                if (a != c) adj[a].insert(c);
    }
    // eliminate low-degree groups first; hubs go last
    std::vector<int> ord(ng);
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(),
                     [&](int a, int b) { return adj[a].size() < adj[b].size(); });
    g.order = ord;
    g.pos_of.assign(ng, 0);
    for (int i = 0; i < ng; ++i) g.pos_of[ord[i]] = i;
    return g;
}

// Symmetric matrix stored as dense blocks over group pairs, with a block
// Cholesky factorization in elimination order. Diagonal blocks are valid in
// their lower triangle only.
class SchurMatrix {
public:
    SchurMatrix(const Groups& g) : g_(&g) {
        const int ng = static_cast<int>(g.members.size());
        sizes_.resize(ng);
        for (int k = 0; k < ng; ++k) sizes_[g.pos_of[k]] = static_cast<int>(g.members[k].size());
    }

    void clear() {
        for (auto& [key, m] : blocks_) m.setZero();
    }

    // Dense block for ordered position pair (pa <= pb); created on first use.
    Eigen::MatrixXd& block(int pa, int pb) {
        auto it = blocks_.find({pa, pb});
        if (it == blocks_.end())
            it = blocks_.emplace(std::make_pair(pa, pb),
                                 Eigen::MatrixXd::Zero(sizes_[pa], sizes_[pb])).first;
        return it->second;
    }
    bool has_block(int pa, int pb) const { return blocks_.count({pa, pb}) > 0; }

    // In-place block Cholesky M = L L^T. Returns false on breakdown.
    bool factor() {
        const int ng = static_cast<int>(sizes_.size());
        for (int k = 0; k < ng; ++k) {
            auto dit = blocks_.find({k, k});
            if (dit == blocks_.end()) return false;
            Eigen::MatrixXd& dkk = dit->second;
            Eigen::LLT<Eigen::MatrixXd> llt(dkk.selfadjointView<Eigen::Lower>());
            double reg = 1e-13 * std::max(1.0, dkk.diagonal().cwiseAbs().maxCoeff());
            while (llt.info() != Eigen::Success && reg < 1e-2) {
                llt.compute(Eigen::MatrixXd(dkk.selfadjointView<Eigen::Lower>()) +
                            reg * Eigen::MatrixXd::Identity(dkk.rows(), dkk.cols()));
                reg *= 100.0;
            }
            if (llt.info() != Eigen::Success) return false;
            dkk = llt.matrixL();

            std::vector<int> nbrs;
            for (int h = k + 1; h < ng; ++h)
                if (has_block(k, h)) nbrs.push_back(h);
            for (int h : nbrs) {
                Eigen::MatrixXd& bkh = block(k, h);
                dkk.triangularView<Eigen::Lower>().solveInPlace(bkh);  // W_h = L_kk^{-1} B_kh
            }
            for (size_t i = 0; i < nbrs.size(); ++i) {
                const Eigen::MatrixXd& wi = block(k, nbrs[i]);
                for (size_t j = i; j < nbrs.size(); ++j) {
                    const Eigen::MatrixXd& wj = block(k, nbrs[j]);
                    block(nbrs[i], nbrs[j]).noalias() -= wi.transpose() * wj;
                }
            }
        }
        return true;
    }

    // Solves L L^T u = r after factor(); r is indexed by lowered variables.
    Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
        const int ng = static_cast<int>(sizes_.size());
        std::vector<Eigen::VectorXd> u(ng);
        for (int gid = 0; gid < ng; ++gid) {
            const int pos = g_->pos_of[gid];
            u[pos].resize(g_->members[gid].size());
            for (size_t i = 0; i < g_->members[gid].size(); ++i) u[pos][i] = r[g_->members[gid][i]];
        }
        for (int k = 0; k < ng; ++k) {
            const Eigen::MatrixXd& lkk = blocks_.at({k, k});
            lkk.triangularView<Eigen::Lower>().solveInPlace(u[k]);
            for (int h = k + 1; h < ng; ++h) {
                auto it = blocks_.find({k, h});
                if (it != blocks_.end()) u[h].noalias() -= it->second.transpose() * u[k];
            }
        }
        for (int k = ng - 1; k >= 0; --k) {
            for (int h = k + 1; h < ng; ++h) {
                auto it = blocks_.find({k, h});
                if (it != blocks_.end()) u[k].noalias() -= it->second * u[h];
            }
            const Eigen::MatrixXd& lkk = blocks_.at({k, k});
            lkk.triangularView<Eigen::Lower>().transpose().solveInPlace(u[k]);
        }
        Eigen::VectorXd out(r.size());
        for (int gid = 0; gid < ng; ++gid) {
            const int pos = g_->pos_of[gid];
            for (size_t i = 0; i < g_->members[gid].size(); ++i) out[g_->members[gid][i]] = u[pos][i];
        }
        return out;
    }

private:
    const Groups* g_;
    std::vector<int> sizes_;  // by elimination position
    std::map<std::pair<int, int>, Eigen::MatrixXd> blocks_;
};

inline double sparse_dot(const std::vector<RTriplet>& f, const Eigen::MatrixXd& g) {
    double acc = 0.0;
    for (const auto& t : f) acc += t.v * g(t.c, t.r);
    return acc;
}

inline void sparse_axpy(Eigen::MatrixXd& m, const std::vector<RTriplet>& f, double a) {
    for (const auto& t : f) m(t.r, t.c) += a * t.v;
}

}  // namespace ipm_detail

class IpmBackend final : public Backend {
public:
    std::string name() const override { return "ipm"; }

    RawSolution solve_lmi(const LmiProgram& p, const SolveOptions& opt) override {
        using Eigen::MatrixXd;
        using Eigen::VectorXd;
        namespace id = ipm_detail;

        RawSolution out;
        const int m = p.num_vars;
        const int nb = static_cast<int>(p.block_sizes.size());
        if (m == 0 || nb == 0) {
            out.status = Status::numerical_failure;
            out.message = "empty program";
            return out;
        }
        double ntot = 0;
        for (int s : p.block_sizes) ntot += s;

        const id::Groups groups = id::build_groups(p);
        id::SchurMatrix schur(groups);

        // consecutive same-group spans of each block's variable list, so the
        // Schur accumulation resolves its target block once per span
        struct Run {
            int begin = 0, end = 0, pos = 0;
        };
        std::vector<std::vector<Run>> runs(p.block_vars.size());
        for (size_t b = 0; b < p.block_vars.size(); ++b) {
            const auto& bvs = p.block_vars[b];
            for (int i = 0; i < static_cast<int>(bvs.size());) {
                const int pos = groups.pos_of[groups.group_of[bvs[i].var]];
                int j = i + 1;
                while (j < static_cast<int>(bvs.size()) &&
                       groups.pos_of[groups.group_of[bvs[j].var]] == pos)
                    ++j;
                runs[b].push_back({i, j, pos});
                i = j;
            }
        }

        // data norms for scaling and stopping rules
        VectorXd fnorm = VectorXd::Zero(m);
        for (int b = 0; b < nb; ++b)
            for (const auto& bv : p.block_vars[b]) {
                double s = 0;
                for (const auto& t : bv.t) s += t.v * t.v;
                fnorm[bv.var] += s;
            }
        fnorm = fnorm.cwiseSqrt();
        double f0norm = 0;
        for (int b = 0; b < nb; ++b)
            for (const auto& t : p.f0[b]) f0norm += t.v * t.v;
        f0norm = std::sqrt(f0norm);
        const double cnorm = p.c.norm();

        double xi = 10.0, eta = 10.0;
        for (int i = 0; i < m; ++i)
            xi = std::max(xi, std::sqrt(ntot) * (1.0 + std::abs(p.c[i])) / (1.0 + fnorm[i]));
        eta = std::max({eta, f0norm, fnorm.maxCoeff()});
        xi = std::min(xi, 1e8);
        eta = std::min(eta, 1e8);

        // iterates
        std::vector<MatrixXd> X(nb), Z(nb), Zinv(nb), Rd(nb), XRZ(nb), G(nb), V(nb);
        std::vector<MatrixXd> dX(nb), dZ(nb), dXa(nb), dZa(nb), W1(nb), W2(nb), U(nb);
        std::vector<Eigen::LLT<MatrixXd>> lltx(nb), lltz(nb);
        for (int b = 0; b < nb; ++b) {
            const int n = p.block_sizes[b];
            X[b] = xi * MatrixXd::Identity(n, n);
            Z[b] = eta * MatrixXd::Identity(n, n);
        }
        VectorXd x = VectorXd::Zero(m);

        const double inf = std::numeric_limits<double>::infinity();
        double best_score = inf;
        VectorXd best_x = x;
        double best_obj = 0, best_dobj = 0, best_gap = 0;
        int stall = 0;

        auto assemble_dual = [&](int b, MatrixXd& target, const VectorXd& xv) {
            const int n = p.block_sizes[b];
            target.setZero(n, n);
            id::sparse_axpy(target, p.f0[b], 1.0);
            for (const auto& bv : p.block_vars[b]) id::sparse_axpy(target, bv.t, xv[bv.var]);
        };

        // largest alpha with M + alpha dM psd, via eigenvalues of L^-1 dM L^-T
        auto max_step = [&](const std::vector<MatrixXd>& mats, const std::vector<MatrixXd>& dirs,
                            const std::vector<Eigen::LLT<MatrixXd>>& llts) {
            double alpha = inf;
            for (int b = 0; b < nb; ++b) {
                MatrixXd w = llts[b].matrixL().solve(dirs[b]);
                w = llts[b].matrixL().solve(w.transpose()).eval();
                Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (w + w.transpose()),
                                                           Eigen::EigenvaluesOnly);
                const double lmin = es.eigenvalues().minCoeff();
                if (lmin < -1e-14) alpha = std::min(alpha, -1.0 / lmin);
            }
            return alpha;
        };

        int iter = 0;
        for (; iter < opt.max_iterations; ++iter) {
            // residuals and merit numbers
            VectorXd rp = p.c;
            for (int b = 0; b < nb; ++b)
                for (const auto& bv : p.block_vars[b]) rp[bv.var] -= id::sparse_dot(bv.t, X[b]);
            double dinf = 0, gap = 0, dobj_raw = 0;
            for (int b = 0; b < nb; ++b) {
                assemble_dual(b, Rd[b], x);
                Rd[b] -= Z[b];
                dinf = std::max(dinf, Rd[b].norm() / (1.0 + f0norm));
                gap += X[b].cwiseProduct(Z[b]).sum();
                for (const auto& t : p.f0[b]) dobj_raw -= t.v * X[b](t.r, t.c);
            }
            const double pobj = p.c.dot(x);
            const double pinf = rp.norm() / (1.0 + cnorm);
            const double relgap = std::abs(gap) / (1.0 + std::abs(pobj) + std::abs(dobj_raw));
            const double mu = gap / ntot;

            if (opt.verbose)
                std::printf("it %3d  pobj %+.8e  gap %.2e  pinf %.2e  dinf %.2e\n", iter,
                            pobj + p.obj_const, relgap, pinf, dinf);

            const double score = std::max({relgap, pinf, dinf});
            if (score < best_score) {
                best_score = score;
                best_x = x;
                best_obj = pobj;
                best_dobj = dobj_raw;
                best_gap = relgap;
                stall = 0;
            } else if (++stall > 12) {
                break;
            }
            if (relgap <= opt.gap_tol && pinf <= opt.feas_tol && dinf <= opt.feas_tol) break;

            // divergence of the dual certificate signals an infeasible LMI
            double trx = 0;
            for (int b = 0; b < nb; ++b) trx += X[b].trace();
            if (trx > 1e11 * xi * ntot && pinf < 1e-4) {
                out.status = Status::infeasible;
                out.message = "dual certificate diverged; LMI appears infeasible";
                out.iterations = iter;
                out.x = VectorXd();
                return out;
            }
            if (x.cwiseAbs().maxCoeff() > 1e12) {
                out.status = Status::numerical_failure;
                out.message = "iterate diverged (problem may be unbounded)";
                out.iterations = iter;
                out.x = VectorXd();
                return out;
            }

            // factorizations
            bool ok = true;
            for (int b = 0; b < nb; ++b) {
                lltx[b].compute(X[b]);
                lltz[b].compute(Z[b]);
                if (lltx[b].info() != Eigen::Success || lltz[b].info() != Eigen::Success) ok = false;
            }
            if (!ok) break;
            for (int b = 0; b < nb; ++b)
                Zinv[b] = lltz[b].solve(MatrixXd::Identity(p.block_sizes[b], p.block_sizes[b]));

            // Schur complement O_ij = sum_b tr(F_i X F_j Z^-1)
            schur.clear();
            for (int b = 0; b < nb; ++b) {
                const auto& bvs = p.block_vars[b];
                const auto& brs = runs[b];
                for (size_t rj = 0; rj < brs.size(); ++rj) {
                    for (int jj = brs[rj].begin; jj < brs[rj].end; ++jj) {
                        U[b].setZero(p.block_sizes[b], p.block_sizes[b]);
                        for (const auto& t : bvs[jj].t)
                            U[b].noalias() += t.v * X[b].col(t.r) * Zinv[b].row(t.c);
                        const int pj = brs[rj].pos;
                        const int lj = groups.local_of[bvs[jj].var];
                        for (size_t ri = 0; ri <= rj; ++ri) {
                            const int pi = brs[ri].pos;
                            const int hi = (ri == rj) ? jj : brs[ri].end - 1;
                            if (pi == pj) {
                                // same group: fill the lower triangle
                                Eigen::MatrixXd& blk = schur.block(pi, pi);
                                for (int ii = brs[ri].begin; ii <= hi; ++ii)
                                    blk(lj, groups.local_of[bvs[ii].var]) +=
                                        id::sparse_dot(bvs[ii].t, U[b]);
                            } else if (pi < pj) {
                                Eigen::MatrixXd& blk = schur.block(pi, pj);
                                for (int ii = brs[ri].begin; ii <= hi; ++ii)
                                    blk(groups.local_of[bvs[ii].var], lj) +=
                                        id::sparse_dot(bvs[ii].t, U[b]);
                            } else {
                                Eigen::MatrixXd& blk = schur.block(pj, pi);
                                for (int ii = brs[ri].begin; ii <= hi; ++ii)
                                    blk(lj, groups.local_of[bvs[ii].var]) +=
                                        id::sparse_dot(bvs[ii].t, U[b]);
                            }
                        }
                    }
                }
            }
            if (!schur.factor()) break;

            // common pieces: X Rd Z^-1 and the predictor right-hand side
            VectorXd rhs(m);
            for (int b = 0; b < nb; ++b) {
                W1[b].noalias() = Rd[b] * Zinv[b];
                XRZ[b].noalias() = X[b] * W1[b];
                G[b] = -X[b] - XRZ[b];
            }
            // rhs_i = <F_i, G> - rp_i
            auto build_rhs = [&](VectorXd& r) {
                r = -rp;
                for (int b = 0; b < nb; ++b)
                    for (const auto& bv : p.block_vars[b]) r[bv.var] += id::sparse_dot(bv.t, G[b]);
            };
            // predictor (affine direction, sigma = 0)
            build_rhs(rhs);
            VectorXd dya = schur.solve(rhs);
            for (int b = 0; b < nb; ++b) {
                dZa[b] = Rd[b];
                for (const auto& bv : p.block_vars[b]) id::sparse_axpy(dZa[b], bv.t, dya[bv.var]);
                W2[b].noalias() = X[b] * (dZa[b] * Zinv[b]).eval();
                dXa[b] = G[b] - W2[b];
                dXa[b] = 0.5 * (dXa[b] + dXa[b].transpose()).eval();
            }
            const double apa = std::min(1.0, 0.98 * max_step(X, dXa, lltx));
            const double ada = std::min(1.0, 0.98 * max_step(Z, dZa, lltz));
            double mu_aff = 0;
            for (int b = 0; b < nb; ++b)
                mu_aff += (X[b] + apa * dXa[b]).cwiseProduct(Z[b] + ada * dZa[b]).sum();
            mu_aff = std::max(mu_aff / ntot, 0.0);
            double sigma = std::pow(mu_aff / mu, 3.0);
            sigma = std::clamp(sigma, 1e-10, 1.0);

            // corrector
            for (int b = 0; b < nb; ++b) {
                V[b] = sigma * mu * Zinv[b] - X[b] - dXa[b] * (dZa[b] * Zinv[b]).eval();
                G[b] = V[b] - XRZ[b];
            }
            build_rhs(rhs);
            VectorXd dy = schur.solve(rhs);
            for (int b = 0; b < nb; ++b) {
                dZ[b] = Rd[b];
                for (const auto& bv : p.block_vars[b]) id::sparse_axpy(dZ[b], bv.t, dy[bv.var]);
                W2[b].noalias() = X[b] * (dZ[b] * Zinv[b]).eval();
                dX[b] = G[b] - W2[b];
                dX[b] = 0.5 * (dX[b] + dX[b].transpose()).eval();
            }
            const double gamma = relgap < 1e-4 ? 0.99 : 0.98;
            const double ap = std::min(1.0, gamma * max_step(X, dX, lltx));
            const double ad = std::min(1.0, gamma * max_step(Z, dZ, lltz));
            if (ap < 1e-10 && ad < 1e-10) break;

            for (int b = 0; b < nb; ++b) {
                X[b] += ap * dX[b];
                X[b] = 0.5 * (X[b] + X[b].transpose()).eval();
                Z[b] += ad * dZ[b];
                Z[b] = 0.5 * (Z[b] + Z[b].transpose()).eval();
            }
            x += ad * dy;
        }

        // classify the best point reached
        out.iterations = iter;
        out.x = best_x;
        out.obj = best_obj + p.obj_const;
        out.dual_obj = best_dobj + p.obj_const;
        out.gap = best_gap;
        if (best_score <= 10.0 * std::max(opt.gap_tol, opt.feas_tol)) {
            out.status = Status::optimal;
        } else {
            out.status = Status::numerical_failure;
            out.message = "did not converge (score " + std::to_string(best_score) + ")";
        }
        return out;
    }
};

inline Backend& default_backend() {
    static IpmBackend be;
    return be;
}

}  // namespace gmarg::conic
