#include <catch2/catch_amalgamated.hpp>

#include "gmarg/sdp.hpp"
#include "testutil.hpp"

using namespace gmarg;
using namespace gmarg::conic;
using Catch::Approx;

TEST_CASE("real embedding", "[conic]") {
    REQUIRE(real_embedding(Mat::Identity(2, 2)).isApprox(Eigen::MatrixXd::Identity(4, 4)));

    Mat sy(2, 2);
    sy << cxd(0, 0), cxd(0, -1), cxd(0, 1), cxd(0, 0);
    Eigen::MatrixXd e = real_embedding(sy);
    REQUIRE(e.isApprox(e.transpose()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues();
    REQUIRE(ev(0) == Approx(-1.0));
    REQUIRE(ev(1) == Approx(-1.0));
    REQUIRE(ev(2) == Approx(1.0));
    REQUIRE(ev(3) == Approx(1.0));

    SECTION("each eigenvalue appears twice") {
        std::mt19937_64 rng(23);
        for (int d : {2, 3, 5}) {
            Mat h = testutil::random_hermitian(d, rng);
            Eigen::SelfAdjointEigenSolver<Mat> ec(h, Eigen::EigenvaluesOnly);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(real_embedding(h),
                                                              Eigen::EigenvaluesOnly);
            for (int i = 0; i < d; ++i) {
                REQUIRE(er.eigenvalues()(2 * i) == Approx(ec.eigenvalues()(i)).margin(1e-10));
                REQUIRE(er.eigenvalues()(2 * i + 1) == Approx(ec.eigenvalues()(i)).margin(1e-10));
            }
        }
        Mat notherm(2, 2);
        notherm << 0, 1, 0, 0;
        REQUIRE_THROWS_AS(real_embedding(notherm), std::invalid_argument);
    }
}

namespace {

// min t such that t*I - sz >= 0; optimum is the top eigenvalue of sz.
ConicProgram max_eig_program() {
    ConicProgram p;
    auto t = p.add_scalars("t", 1);
    Mat sz(2, 2);
    sz << 1, 0, 0, -1;
    MatExpr e = MatExpr::constant_matrix(-sz);
    e.add_term(p.scalar(t, 0), Mat::Identity(2, 2));
    p.add_psd(e);
    LinExpr obj;
    obj.add(p.scalar(t, 0), 1.0);
    p.set_objective(obj);
    return p;
}

}  // namespace

TEST_CASE("scalar lmi against known optimum", "[conic]") {
    auto p = max_eig_program();
    auto sol = solve(p);
    REQUIRE(sol.status == Status::optimal);
    REQUIRE(sol.objective == Approx(1.0).margin(1e-6));
    REQUIRE(sol.min_psd_eigenvalue > -1e-7);

    SECTION("toy backend agrees") {
        auto toy = solve(p, {}, &toy_backend());
        REQUIRE(toy.status == Status::optimal);
        REQUIRE(toy.objective == Approx(1.0).margin(1e-4));
    }

    SECTION("deterministic across repeated solves") {
        auto again = solve(p);
        REQUIRE(again.objective == Approx(sol.objective).margin(1e-8));
    }
}

TEST_CASE("hermitian variable with equality", "[conic]") {
    // min tr(X) s.t. X >= 0, X_00 = 1  ->  1
    ConicProgram p;
    auto x = p.add_hermitian("X", 2);
    p.add_psd(p.var_expr(x));
    LinExpr fix;
    fix.add(p.scalar(x, 0), 1.0);  // diagonal (0,0) scalar
    p.add_equality(fix, 1.0);
    p.set_objective(p.trace_inner(x, Mat::Identity(2, 2)));
    auto sol = solve(p);
    REQUIRE(sol.status == Status::optimal);
    REQUIRE(sol.objective == Approx(1.0).margin(1e-6));
    REQUIRE(sol.max_equality_violation < 1e-7);
    Mat xv = p.hermitian_value(x, sol.x);
    REQUIRE(xv(0, 0).real() == Approx(1.0).margin(1e-6));
    REQUIRE(std::abs(xv(1, 1)) < 1e-6);
}

TEST_CASE("toy and ipm agree on box-constrained problems", "[conic]") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 8; ++rep) {
        ConicProgram p;
        auto v = p.add_scalars("v", 2);
        // |x_i| <= 1 via 1x1 blocks
        for (int i = 0; i < 2; ++i) {
            for (double sgn : {1.0, -1.0}) {
                MatExpr box = MatExpr::constant_matrix(Mat::Identity(1, 1));
                box.add_term(p.scalar(v, i), sgn * Mat::Identity(1, 1));
                p.add_psd(box);
            }
        }
        // one coupling 2x2 block: I + x0 A + x1 B >= 0
        MatExpr lmi = MatExpr::constant_matrix(2.0 * Mat::Identity(2, 2));
        Mat a = testutil::random_hermitian(2, rng);
        Mat b = testutil::random_hermitian(2, rng);
        lmi.add_term(p.scalar(v, 0), a);
        lmi.add_term(p.scalar(v, 1), b);
        p.add_psd(lmi);
        LinExpr obj;
        obj.add(p.scalar(v, 0), u(rng));
        obj.add(p.scalar(v, 1), u(rng));
        p.set_objective(obj);

        auto ipm = solve(p);
        auto toy = solve(p, {}, &toy_backend());
        REQUIRE(ipm.status == Status::optimal);
        REQUIRE(toy.status == Status::optimal);
        REQUIRE(ipm.objective == Approx(toy.objective).margin(2e-3));
        REQUIRE(ipm.objective <= toy.objective + 1e-6);  // grid point is feasible
        REQUIRE(ipm.objective >= ipm.dual_objective - 1e-6);
    }
}

TEST_CASE("infeasible problems are reported", "[conic]") {
    SECTION("inconsistent equalities") {
        ConicProgram p;
        auto v = p.add_scalars("v", 1);
        MatExpr e = MatExpr::constant_matrix(Mat::Identity(1, 1));
        e.add_term(p.scalar(v, 0), Mat::Identity(1, 1));
        p.add_psd(e);
        LinExpr l1, l2;
        l1.add(p.scalar(v, 0), 1.0);
        l2.add(p.scalar(v, 0), 1.0);
        p.add_equality(l1, 0.0);
        p.add_equality(l2, 1.0);
        auto sol = solve(p);
        REQUIRE(sol.status == Status::infeasible);
    }

    SECTION("infeasible lmi") {
        // needs x >= 1 and x <= -1
        ConicProgram p;
        auto v = p.add_scalars("v", 1);
        Mat c(2, 2), f(2, 2);
        c << -1, 0, 0, -1;
        f << 1, 0, 0, -1;
        MatExpr e = MatExpr::constant_matrix(c);
        e.add_term(p.scalar(v, 0), f);
        p.add_psd(e);
        LinExpr obj;
        obj.add(p.scalar(v, 0), 1.0);
        p.set_objective(obj);
        auto sol = solve(p);
        REQUIRE(sol.status != Status::optimal);
    }
}

TEST_CASE("random psd least eigenvalue programs", "[conic]") {
    // min t s.t. tI - H >= 0 over random Hermitian H of several sizes
    std::mt19937_64 rng(59);
    for (int d : {2, 4, 8}) {
        Mat h = testutil::random_hermitian(d, rng);
        ConicProgram p;
        auto t = p.add_scalars("t", 1);
        MatExpr e = MatExpr::constant_matrix(-h);
        e.add_term(p.scalar(t, 0), Mat::Identity(d, d));
        p.add_psd(e);
        LinExpr obj;
        obj.add(p.scalar(t, 0), 1.0);
        p.set_objective(obj);
        auto sol = solve(p);
        Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
        REQUIRE(sol.status == Status::optimal);
        REQUIRE(sol.objective == Approx(es.eigenvalues().maxCoeff()).margin(1e-6));
    }
}
