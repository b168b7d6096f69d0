#include <catch2/catch_amalgamated.hpp>

#include "gmarg/basis.hpp"
#include "testutil.hpp"

using namespace gmarg;
using Catch::Approx;

TEST_CASE("local operator bases", "[basis]") {
    for (int d : {2, 3, 4}) {
        auto b = operator_basis(d);
        REQUIRE(static_cast<int>(b.elements.size()) == d * d);
        REQUIRE(b.elements[0].isApprox(Mat::Identity(d, d)));
        for (size_t i = 0; i < b.elements.size(); ++i) {
            REQUIRE((b.elements[i] - b.elements[i].adjoint()).norm() < 1e-14);
            if (i > 0) REQUIRE(std::abs(b.elements[i].trace()) < 1e-14);
            for (size_t j = 0; j < b.elements.size(); ++j) {
                const double ip = hs_inner(b.elements[i], b.elements[j]);
                if (i != j)
                    REQUIRE(std::abs(ip) < 1e-14);
                else
                    REQUIRE(ip == Approx(i == 0 ? double(d) : 2.0));
            }
        }
    }
    REQUIRE_THROWS_AS(operator_basis(1), std::invalid_argument);
}

TEST_CASE("pauli labels", "[basis]") {
    auto b = operator_basis(2);
    Mat x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << cxd(0, 0), cxd(0, -1), cxd(0, 1), cxd(0, 0);
    z << 1, 0, 0, -1;
    REQUIRE(b.elements[1].isApprox(x));
    REQUIRE(b.elements[2].isApprox(y));
    REQUIRE(b.elements[3].isApprox(z));
    REQUIRE(local_element_label(2, 2) == "Y");
    REQUIRE(local_element_label(3, 5) == "G5");
}

TEST_CASE("expansion completeness", "[basis]") {
    std::mt19937_64 rng(17);
    auto basis = full_product_basis(QuditRegister({2, 3}));
    REQUIRE(basis.size() == 36);
    Mat h = testutil::random_hermitian(6, rng);
    auto c = expand(basis, h);
    REQUIRE((synthesize(basis, c) - h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two body subspace dimensions", "[basis]") {
    auto q3 = QuditRegister::qubits(3);
    auto q4 = QuditRegister::qubits(4);

    auto all3 = two_body_subspace(q3, {{0, 1}, {1, 2}, {0, 2}});
    REQUIRE(all3.size() == 37);  // 1 + 3*3 + 3*9
    auto ab = two_body_subspace(q3, {{0, 1}});
    REQUIRE(ab.size() == 16);  // full two-qubit space on A,B
    auto all4 = two_body_subspace(q4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    REQUIRE(all4.size() == 67);  // 1 + 4*3 + 6*9
    REQUIRE_THROWS_AS(two_body_subspace(q3, {}), std::invalid_argument);

    SECTION("oracle: enumeration of supports inside some pattern pair") {
        std::vector<std::pair<int, int>> pattern = {{0, 1}, {1, 2}, {0, 2}};
        int count = 0;
        for (const auto& el : full_product_basis(q3)) {
            if (el.support.size() > 2) continue;
            bool inside = el.support.empty();
            for (auto [a, b] : pattern) {
                bool ok = true;
                for (int p : el.support) ok = ok && (p == a || p == b);
                inside = inside || ok;
            }
            if (inside) ++count;
        }
        REQUIRE(count == static_cast<int>(all3.size()));
    }

    SECTION("partially covered pattern skips uncovered singles") {
        auto e = two_body_subspace(q3, {{0, 1}, {0, 2}});
        REQUIRE(e.size() == 28);  // 1 + 3*3 + 2*9
    }
}

TEST_CASE("two body subspace elements are independent", "[basis]") {
    auto q3 = QuditRegister::qubits(3);
    auto els = two_body_subspace(q3, {{0, 1}, {1, 2}, {0, 2}});
    const int n = static_cast<int>(els.size());
    Eigen::MatrixXd gram(n, n);
    for (int i = 0; i < n; ++i) {
        REQUIRE((els[i].matrix - els[i].matrix.adjoint()).norm() < 1e-13);
        for (int j = 0; j < n; ++j) gram(i, j) = hs_inner(els[i].matrix, els[j].matrix);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    REQUIRE(lu.rank() == n);
    // trace-orthogonal with tr(E^2) as recorded
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            REQUIRE(std::abs(gram(i, j) - (i == j ? els[i].norm2 : 0.0)) < 1e-12);
}
