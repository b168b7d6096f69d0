#include <catch2/catch_amalgamated.hpp>

#include "gmarg/operators.hpp"
#include "testutil.hpp"

using namespace gmarg;
using Catch::Approx;

namespace {
HermitianOperator pauli(char which) {
    Mat m(2, 2);
    switch (which) {
        case 'x': m << 0, 1, 1, 0; break;
        case 'y': m << cxd(0, 0), cxd(0, -1), cxd(0, 1), cxd(0, 0); break;
        default: m << 1, 0, 0, -1; break;
    }
    return HermitianOperator(QuditRegister::qubits(1), m);
}
}  // namespace

TEST_CASE("register indexing", "[operators]") {
    QuditRegister reg({2, 3, 2});
    REQUIRE(reg.total_dim() == 12);
    REQUIRE(reg.stride(0) == 6);
    REQUIRE(reg.stride(1) == 2);
    REQUIRE(reg.stride(2) == 1);
    for (int i = 0; i < 12; ++i) REQUIRE(reg.pack(reg.unpack(i)) == i);
    REQUIRE_THROWS_AS(QuditRegister({1, 2}), std::invalid_argument);

    REQUIRE(canonical_bipartitions(QuditRegister::qubits(3)).size() == 3);
    REQUIRE(canonical_bipartitions(QuditRegister::qubits(4)).size() == 7);
    REQUIRE(canonical_bipartitions(QuditRegister::qubits(5)).size() == 15);
    for (const auto& bp : canonical_bipartitions(QuditRegister::qubits(4)))
        REQUIRE(bp.m[0] == 0);
}

TEST_CASE("hermitian construction", "[operators]") {
    QuditRegister q1 = QuditRegister::qubits(1);
    Mat bad(2, 2);
    bad << 0, 1, 0, 0;  // far from Hermitian
    REQUIRE_THROWS_AS(HermitianOperator(q1, bad), std::invalid_argument);

    // small asymmetry is projected away
    Mat near(2, 2);
    near << 1.0, cxd(0.5, 1e-12), cxd(0.5, 1e-12), -1.0;
    HermitianOperator h(q1, near);
    REQUIRE((h.matrix() - h.matrix().adjoint()).norm() == 0.0);
}

TEST_CASE("tensor product basics", "[operators]") {
    QuditRegister q1 = QuditRegister::qubits(1);
    HermitianOperator id2(q1, Mat::Identity(2, 2));
    auto id4 = tensor_product({id2, id2});
    REQUIRE(id4.matrix().isApprox(Mat::Identity(4, 4)));
    REQUIRE(id4.reg().num_parties() == 2);

    // <00| sz (x) sz |00> = +1
    auto zz = tensor_product({pauli('z'), pauli('z')});
    REQUIRE(zz.matrix()(0, 0).real() == Approx(1.0));

    Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    auto proj01 = tensor_product({HermitianOperator(q1, p0), HermitianOperator(q1, p1)});
    Mat expect = Mat::Zero(4, 4);
    expect(1, 1) = 1;  // |01>
    REQUIRE(proj01.matrix().isApprox(expect));
}

TEST_CASE("partial trace", "[operators]") {
    auto rho = testutil::ghz(3).to_density();
    auto ab = partial_trace(rho, {0, 1});
    Mat expect = Mat::Zero(4, 4);
    expect(0, 0) = 0.5;
    expect(3, 3) = 0.5;
    REQUIRE(ab.matrix().isApprox(expect, 1e-12));
    REQUIRE(partial_trace(rho, {0, 1, 2}).matrix().isApprox(rho.matrix()));
    REQUIRE_THROWS_AS(partial_trace(rho, PartySet{}), std::invalid_argument);

    SECTION("tensor factors reduce exactly") {
        std::mt19937_64 rng(7);
        for (int rep = 0; rep < 20; ++rep) {
            QuditRegister q1 = QuditRegister::qubits(1);
            HermitianOperator a(q1, testutil::random_density(2, rng));
            HermitianOperator b(q1, testutil::random_density(2, rng));
            auto prod = tensor_product({a, b});
            REQUIRE((partial_trace(prod, {0}).matrix() - a.matrix()).cwiseAbs().maxCoeff() < 1e-12);
            REQUIRE((partial_trace(prod, {1}).matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("partial transpose", "[operators]") {
    SECTION("bell state spectrum") {
        auto rho = testutil::bell_phi_plus().to_density();
        auto pt = partial_transpose(rho, {0});
        Eigen::VectorXd ev = spectrum(pt);
        REQUIRE(ev(0) == Approx(-0.5).margin(1e-12));
        REQUIRE(ev(1) == Approx(0.5).margin(1e-12));
        REQUIRE(ev(3) == Approx(0.5).margin(1e-12));
    }

    std::mt19937_64 rng(11);
    SECTION("product states stay psd") {
        for (int rep = 0; rep < 10; ++rep) {
            QuditRegister q1 = QuditRegister::qubits(1);
            auto prod = tensor_product({HermitianOperator(q1, testutil::random_density(2, rng)),
                                        HermitianOperator(q1, testutil::random_density(2, rng))});
            REQUIRE(min_eigenvalue(partial_transpose(prod, {0})) > -1e-12);
        }
    }

    SECTION("separable mixtures stay psd") {
        QuditRegister q1 = QuditRegister::qubits(1);
        for (int rep = 0; rep < 10; ++rep) {
            Mat m = Mat::Zero(4, 4);
            std::uniform_real_distribution<double> u;
            double wsum = 0;
            for (int k = 0; k < 4; ++k) {
                const double w = u(rng);
                wsum += w;
                m += w * kron(testutil::random_density(2, rng), testutil::random_density(2, rng));
            }
            HermitianOperator sep(QuditRegister::qubits(2), m / wsum);
            REQUIRE(min_eigenvalue(partial_transpose(sep, {0})) >= -1e-10);
        }
    }

    SECTION("involution, trace and complement spectrum") {
        for (int rep = 0; rep < 10; ++rep) {
            QuditRegister reg({2, 3, 2});
            HermitianOperator h(reg, testutil::random_hermitian(12, rng));
            for (PartySet m : {PartySet{0}, PartySet{1}, PartySet{0, 2}}) {
                auto pt = partial_transpose(h, m);
                REQUIRE(partial_transpose(pt, m).matrix().isApprox(h.matrix(), 1e-12));
                REQUIRE(pt.trace() == Approx(h.trace()).margin(1e-10));
                Eigen::VectorXd s1 = spectrum(pt);
                Eigen::VectorXd s2 = spectrum(partial_transpose(h, reg.complement(m)));
                REQUIRE((s1 - s2).cwiseAbs().maxCoeff() < 1e-9);
            }
            REQUIRE(partial_transpose(h, {}).matrix().isApprox(h.matrix()));
        }
    }
}

TEST_CASE("white noise mixing", "[operators]") {
    std::mt19937_64 rng(3);
    DensityOperator rho(QuditRegister::qubits(2), testutil::random_density(4, rng));
    REQUIRE(mix_with_white_noise(rho, 0.0).matrix().isApprox(rho.matrix()));
    REQUIRE(mix_with_white_noise(rho, 1.0).matrix().isApprox(Mat::Identity(4, 4) / 4.0));
    REQUIRE_THROWS_AS(mix_with_white_noise(rho, 1.5), std::invalid_argument);
    REQUIRE(mix_with_white_noise(rho, 0.3).trace() == Approx(1.0).margin(1e-12));
}

TEST_CASE("density and pure state invariants", "[operators]") {
    QuditRegister q2 = QuditRegister::qubits(2);
    Mat traceless = Mat::Identity(4, 4);
    REQUIRE_THROWS_AS(DensityOperator(q2, traceless), std::invalid_argument);
    Mat negative = Mat::Identity(4, 4) / 2.0;
    negative(3, 3) = -0.5;
    REQUIRE_THROWS_AS(DensityOperator(q2, negative), std::invalid_argument);

    Vec unnorm = Vec::Ones(4);
    REQUIRE_THROWS_AS(PureState(q2, unnorm), std::invalid_argument);
    std::mt19937_64 rng(5);
    PureState psi(q2, testutil::random_pure(4, rng));
    auto rho = psi.to_density();
    REQUIRE((rho.matrix() * rho.matrix()).trace().real() == Approx(1.0).margin(1e-12));
}
