#pragma once

#include <random>

#include "gmarg/operators.hpp"

namespace testutil {

using gmarg::cxd;
using gmarg::Mat;
using gmarg::Vec;

inline Mat random_hermitian(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = cxd(g(rng), g(rng));
    return 0.5 * (a + a.adjoint()).eval();
}

// Wishart-distributed density matrix of rank min(d, k).
inline Mat random_density(int d, std::mt19937_64& rng, int k = 0) {
    if (k == 0) k = d;
    std::normal_distribution<double> g;
    Mat a(d, k);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < k; ++j) a(i, j) = cxd(g(rng), g(rng));
    Mat rho = a * a.adjoint();
    return rho / rho.trace().real();
}

inline Vec random_pure(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = cxd(g(rng), g(rng));
    return v / v.norm();
}

inline gmarg::PureState ghz(int n) {
    const int d = 1 << n;
    Vec v = Vec::Zero(d);
    v[0] = v[d - 1] = 1.0 / std::sqrt(2.0);
    return gmarg::PureState(gmarg::QuditRegister::qubits(n), v);
}

inline gmarg::PureState bell_phi_plus() { return ghz(2); }

}  // namespace testutil
