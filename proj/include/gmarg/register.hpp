#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmarg {

// Sorted list of party indices.
using PartySet = std::vector<int>;

// A register of qudits. Party 0 owns the most significant digit of a basis
// index, so a basis state |i_0 i_1 ... i_{N-1}> has linear index
// sum_p i_p * stride(p) with stride(N-1) = 1.
class QuditRegister {
public:
    explicit QuditRegister(std::vector<int> dims) : dims_(std::move(dims)) {
        if (dims_.empty()) throw std::invalid_argument("register needs at least one party");
        for (int d : dims_)
            if (d < 2) throw std::invalid_argument("local dimension must be >= 2");
        strides_.assign(dims_.size(), 1);
        for (int p = static_cast<int>(dims_.size()) - 2; p >= 0; --p)
            strides_[p] = strides_[p + 1] * dims_[p + 1];
        total_ = strides_[0] * dims_[0];
    }

    static QuditRegister qubits(int n) { return QuditRegister(std::vector<int>(n, 2)); }
    static QuditRegister qudits(int n, int d) { return QuditRegister(std::vector<int>(n, d)); }

    int num_parties() const { return static_cast<int>(dims_.size()); }
    int dim(int party) const { return dims_.at(party); }
    const std::vector<int>& dims() const { return dims_; }
    int total_dim() const { return total_; }
    int stride(int party) const { return strides_.at(party); }

    std::vector<int> unpack(int index) const {
        std::vector<int> digits(dims_.size());
        for (size_t p = 0; p < dims_.size(); ++p) {
            digits[p] = (index / strides_[p]) % dims_[p];
        }
        return digits;
    }

    int pack(const std::vector<int>& digits) const {
        int idx = 0;
        for (size_t p = 0; p < dims_.size(); ++p) idx += digits[p] * strides_[p];
        return idx;
    }

    // Sub-register made of the given (sorted) parties.
    QuditRegister sub(const PartySet& parties) const {
        std::vector<int> d;
        d.reserve(parties.size());
        for (int p : parties) d.push_back(dim(p));
        return QuditRegister(d);
    }

    PartySet all_parties() const {
        PartySet s(dims_.size());
        std::iota(s.begin(), s.end(), 0);
        return s;
    }

    PartySet complement(const PartySet& m) const {
        PartySet out;
        for (int p = 0; p < num_parties(); ++p)
            if (!std::binary_search(m.begin(), m.end(), p)) out.push_back(p);
        return out;
    }

    bool operator==(const QuditRegister& o) const { return dims_ == o.dims_; }
    bool operator!=(const QuditRegister& o) const { return !(*this == o); }

private:
    std::vector<int> dims_;
    std::vector<int> strides_;
    int total_ = 0;
};

inline void require_party_set(const QuditRegister& reg, const PartySet& s) {
    if (!std::is_sorted(s.begin(), s.end()))
        throw std::invalid_argument("party set must be sorted");
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw std::invalid_argument("party set has duplicates");
    for (int p : s)
        if (p < 0 || p >= reg.num_parties())
            throw std::invalid_argument("party index out of range");
}

// One half of a split M | complement(M), in canonical form: party 0 in M and
// M a proper subset. M|Mbar and Mbar|M describe the same split.
struct Bipartition {
    PartySet m;

    static Bipartition canonical(const QuditRegister& reg, PartySet m) {
        require_party_set(reg, m);
        if (m.empty() || static_cast<int>(m.size()) == reg.num_parties())
            throw std::invalid_argument("bipartition must be a nonempty proper subset");
        if (!std::binary_search(m.begin(), m.end(), 0)) m = reg.complement(m);
        return Bipartition{std::move(m)};
    }

    std::string to_string() const {
        std::string s;
        for (size_t i = 0; i < m.size(); ++i) s += (i ? "," : "") + std::to_string(m[i]);
        return s;
    }
};

// All 2^(N-1) - 1 canonical bipartitions of the register.
inline std::vector<Bipartition> canonical_bipartitions(const QuditRegister& reg) {
    const int n = reg.num_parties();
    std::vector<Bipartition> out;
    // subsets of {1..N-1}, each unioned with {0}; exclude the full set
    for (unsigned mask = 0; mask + 1 < (1u << (n - 1)); ++mask) {
        PartySet m{0};
        for (int p = 1; p < n; ++p)
            if (mask & (1u << (p - 1))) m.push_back(p);
        out.push_back(Bipartition{std::move(m)});
    }
    return out;
}

}  // namespace gmarg
