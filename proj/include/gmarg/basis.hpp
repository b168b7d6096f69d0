#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gmarg/operators.hpp"

namespace gmarg {

// Local Hermitian operator basis: element 0 is the identity, the remaining
// d^2 - 1 elements are traceless and mutually trace-orthogonal with
// tr(B_i B_j) = 2 delta_ij.
struct OperatorBasis {
    int dim = 0;
    std::vector<Mat> elements;
};

inline OperatorBasis operator_basis(int d) {
    if (d < 2) throw std::invalid_argument("operator basis needs dimension >= 2");
    OperatorBasis b;
    b.dim = d;
    b.elements.push_back(Mat::Identity(d, d));
    const cxd i1(0.0, 1.0);
    // symmetric and antisymmetric off-diagonal families (Paulis X,Y for d = 2)
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            Mat sym = Mat::Zero(d, d);
            sym(j, k) = 1.0;
            sym(k, j) = 1.0;
            b.elements.push_back(sym);
            Mat asym = Mat::Zero(d, d);
            asym(j, k) = -i1;
            asym(k, j) = i1;
            b.elements.push_back(asym);
        }
    }
    // diagonal family (Pauli Z for d = 2)
    for (int l = 1; l < d; ++l) {
        Mat diag = Mat::Zero(d, d);
        const double norm = std::sqrt(2.0 / (l * (l + 1.0)));
        for (int j = 0; j < l; ++j) diag(j, j) = norm;
        diag(l, l) = -l * norm;
        b.elements.push_back(diag);
    }
    return b;
}

inline std::string local_element_label(int d, int k) {
    if (d == 2) {
        static const char* pauli[] = {"I", "X", "Y", "Z"};
        return pauli[k];
    }
    return k == 0 ? "I" : "G" + std::to_string(k);
}

// One element of a product operator basis: identity everywhere except the
// parties in `support`, which carry non-identity local basis elements.
struct ProductBasisElement {
    std::string label;            // "I", "X@0", "X@0*Z@2", "G3@1", ...
    PartySet support;             // parties with a non-identity factor
    std::vector<int> local_idx;   // parallel to support; indices >= 1
    Mat matrix;                   // full-register dense matrix
    double norm2 = 0.0;           // tr(matrix^2)
};

namespace detail {

inline ProductBasisElement make_product_element(const QuditRegister& reg,
                                                const std::vector<OperatorBasis>& locals,
                                                const PartySet& support,
                                                const std::vector<int>& local_idx) {
    ProductBasisElement el;
    el.support = support;
    el.local_idx = local_idx;
    std::vector<HermitianOperator> factors;
    double norm2 = 1.0;
    size_t s = 0;
    for (int p = 0; p < reg.num_parties(); ++p) {
        const int d = reg.dim(p);
        if (s < support.size() && support[s] == p) {
            const int k = local_idx[s];
            factors.emplace_back(QuditRegister({d}), locals[p].elements[k]);
            norm2 *= 2.0;
            if (!el.label.empty()) el.label += "*";
            el.label += local_element_label(d, k) + "@" + std::to_string(p);
            ++s;
        } else {
            factors.emplace_back(QuditRegister({d}), Mat::Identity(d, d));
            norm2 *= d;
        }
    }
    if (el.label.empty()) el.label = "I";
    el.matrix = tensor_product(factors).matrix();
    el.norm2 = norm2;
    return el;
}

}  // namespace detail

// Trace-orthogonal basis of the span of all operators whose non-identity
// support is contained in one of the given party pairs: the global identity,
// single-party terms on every covered party, and two-party terms on every
// pair. Duplicates across overlapping pairs appear once.
inline std::vector<ProductBasisElement> two_body_subspace(
    const QuditRegister& reg, const std::vector<std::pair<int, int>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("two_body_subspace: empty pattern");
    std::set<int> covered;
    std::set<std::pair<int, int>> uniq;
    for (auto [a, b] : pairs) {
        if (a > b) std::swap(a, b);
        require_party_set(reg, {a, b});
        covered.insert(a);
        covered.insert(b);
        uniq.insert({a, b});
    }

    std::vector<OperatorBasis> locals;
    for (int p = 0; p < reg.num_parties(); ++p) locals.push_back(operator_basis(reg.dim(p)));

    std::vector<ProductBasisElement> out;
    out.push_back(detail::make_product_element(reg, locals, {}, {}));
    for (int p : covered) {
        const int nel = static_cast<int>(locals[p].elements.size());
        for (int k = 1; k < nel; ++k)
            out.push_back(detail::make_product_element(reg, locals, {p}, {k}));
    }
    for (const auto& [a, b] : uniq) {
        const int na = static_cast<int>(locals[a].elements.size());
        const int nb = static_cast<int>(locals[b].elements.size());
        for (int i = 1; i < na; ++i)
            for (int j = 1; j < nb; ++j)
                out.push_back(detail::make_product_element(reg, locals, {a, b}, {i, j}));
    }
    return out;
}

// Full product operator basis of the register (d^2 elements per party,
// D^2 in total); element 0 is the global identity.
inline std::vector<ProductBasisElement> full_product_basis(const QuditRegister& reg) {
    std::vector<OperatorBasis> locals;
    for (int p = 0; p < reg.num_parties(); ++p) locals.push_back(operator_basis(reg.dim(p)));

    std::vector<ProductBasisElement> out;
    std::vector<int> idx(reg.num_parties(), 0);
    while (true) {
        PartySet support;
        std::vector<int> local_idx;
        for (int p = 0; p < reg.num_parties(); ++p) {
            if (idx[p] > 0) {
                support.push_back(p);
                local_idx.push_back(idx[p]);
            }
        }
        out.push_back(detail::make_product_element(reg, locals, support, local_idx));
        int p = reg.num_parties() - 1;
        while (p >= 0) {
            if (++idx[p] < static_cast<int>(locals[p].elements.size())) break;
            idx[p] = 0;
            --p;
        }
        if (p < 0) break;
    }
    return out;
}

// Expansion coefficients of H in a product basis: c_k = tr(E_k H) / tr(E_k^2).
inline std::vector<double> expand(const std::vector<ProductBasisElement>& basis, const Mat& h) {
    std::vector<double> c(basis.size());
    for (size_t k = 0; k < basis.size(); ++k) c[k] = hs_inner(basis[k].matrix, h) / basis[k].norm2;
    return c;
}

inline Mat synthesize(const std::vector<ProductBasisElement>& basis, const std::vector<double>& c) {
    Mat h = Mat::Zero(basis[0].matrix.rows(), basis[0].matrix.cols());
    for (size_t k = 0; k < basis.size(); ++k) h += c[k] * basis[k].matrix;
    return h;
}

}  // namespace gmarg
