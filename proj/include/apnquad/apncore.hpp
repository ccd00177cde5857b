// apncore.hpp
//
// Differential-uniformity engines: a table-based brute-force engine, a
// linearized-kernel rank engine for quadratic maps, and the family-specific
// APN decider that walks the unit circle and rank-checks the linearized
// equation eps1 bar(x)^2 + eps2 bar(x) + eps3 x^2 + eps4 x = 0.

#pragma once

#include "apnquad/field.hpp"
#include "apnquad/quad.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace apnquad {

struct FuncTable {
    int n = 0;                        // 2^n entries
    std::vector<std::uint32_t> values; // F(x) indexed by x, packed words
};

struct DiffProfile {
    int uniformity = 0;
    std::map<int, std::uint64_t> spectrum; // solution count -> #(a,b) pairs over a != 0
};

inline FuncTable make_family_table(const FieldCtx& F, const CoeffTriple& c) {
    FuncTable t;
    t.n = F.n();
    t.values.resize(std::size_t(1) << t.n);
    for (std::uint32_t x = 0; x < t.values.size(); ++x)
        t.values[x] = F.pack(eval_f(F, c, F.unpack(x)));
    return t;
}

inline FuncTable make_power_table(const FieldCtx& F, std::uint64_t e) {
    FuncTable t;
    t.n = F.n();
    t.values.resize(std::size_t(1) << t.n);
    for (std::uint32_t x = 0; x < t.values.size(); ++x)
        t.values[x] = F.pack(F.tpow(F.unpack(x), e));
    return t;
}

inline DiffProfile differential_uniformity(const FuncTable& f) {
    const std::size_t sz = f.values.size();
    if (sz != std::size_t(1) << f.n)
        throw std::invalid_argument("function table length must be 2^n");
    std::vector<std::uint32_t> counts(sz);
    DiffProfile out;
    for (std::size_t a = 1; a < sz; ++a) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t x = 0; x < sz; ++x)
            ++counts[f.values[x] ^ f.values[x ^ a]];
        for (std::size_t b = 0; b < sz; ++b) {
            int c = int(counts[b]);
            ++out.spectrum[c];
            if (c > out.uniformity)
                out.uniformity = c;
        }
    }
    return out;
}

// uniformity only, with early exit once the bound is exceeded
inline bool uniformity_at_most(const FuncTable& f, std::uint32_t bound) {
    const std::size_t sz = f.values.size();
    std::vector<std::uint32_t> counts(sz);
    for (std::size_t a = 1; a < sz; ++a) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t x = 0; x < sz; ++x)
            if (++counts[f.values[x] ^ f.values[x ^ a]] > bound)
                return false;
    }
    return true;
}

inline bool is_apn_bruteforce(const FuncTable& f) { return uniformity_at_most(f, 2); }

inline bool is_permutation(const FuncTable& f) {
    std::vector<bool> seen(f.values.size(), false);
    for (std::uint32_t v : f.values) {
        if (v >= f.values.size() || seen[v])
            return false;
        seen[v] = true;
    }
    return true;
}

// rank of a set of GF(2) column vectors packed in words (xor basis by top bit)
inline int gf2_rank(std::span<const std::uint32_t> cols) {
    std::uint32_t basis[32] = {0};
    int rank = 0;
    for (std::uint32_t c : cols) {
        while (c) {
            int hb = 31 - __builtin_clz(c);
            if (!basis[hb]) {
                basis[hb] = c;
                ++rank;
                break;
            }
            c ^= basis[hb];
        }
    }
    return rank;
}

// Precomputed per-field data for the family APN decider: powers of every
// unit-circle element and the images of the GF(2)-basis {z^i w, z^i} under
// x -> x, x^2, bar(x), bar(x)^2.
class FamilyApnEngine {
  public:
    explicit FamilyApnEngine(const FieldCtx& F) : F_(F) {
        const auto& mu = F.unit_circle();
        pw_.reserve(mu.size());
        for (TowerElt a : mu) {
            APow p;
            p.a = a;
            TowerElt ab = FieldCtx::bar(a);
            TowerElt ab2 = F.tsqr(ab);
            p.ab3 = F.tmul(ab2, ab);
            p.ab2a = F.tmul(ab2, a);
            p.aba2 = F.tmul(ab, F.tsqr(a));
            p.a3 = F.tmul(F.tsqr(a), a);
            pw_.push_back(p);
        }
        int n = F.n();
        basis_.resize(std::size_t(n));
        for (int j = 0; j < n; ++j) {
            TowerElt e = F.unpack(1u << j);
            basis_[std::size_t(j)] = {e, F.tsqr(e), FieldCtx::bar(e), F.tsqr(FieldCtx::bar(e))};
        }
    }

    const FieldCtx& field() const { return F_; }
    std::size_t circle_size() const { return pw_.size(); }
    TowerElt circle_elt(std::size_t i) const { return pw_[i].a; }

    // kernel dimension of eps1 bar(x)^2 + eps2 bar(x) + eps3 x^2 + eps4 x
    // for the i-th unit circle element
    int kernel_dim(const CoeffTriple& c, std::size_t i) const {
        const APow& p = pw_[i];
        TowerElt u1 = F_.tmul(c.a1, p.ab2a);
        TowerElt u2 = F_.tmul(c.a2, p.aba2);
        TowerElt u3 = F_.tmul(c.a3, p.a3);
        TowerElt e1 = FieldCtx::tadd(p.ab3, u1);
        TowerElt e2 = FieldCtx::tadd(p.ab3, u2);
        TowerElt e3 = FieldCtx::tadd(u2, u3);
        TowerElt e4 = FieldCtx::tadd(u1, u3);
        int n = F_.n();
        std::uint32_t cols[32];
        for (int j = 0; j < n; ++j) {
            const Basis& b = basis_[std::size_t(j)];
            TowerElt img = F_.tmul(e1, b.barsq);
            img = FieldCtx::tadd(img, F_.tmul(e2, b.bar));
            img = FieldCtx::tadd(img, F_.tmul(e3, b.sq));
            img = FieldCtx::tadd(img, F_.tmul(e4, b.id));
            cols[j] = F_.pack(img);
        }
        return n - gf2_rank(std::span<const std::uint32_t>(cols, std::size_t(n)));
    }

    // true iff the kernel is exactly {0,1} for every a in mu_{2^m+1};
    // on failure also reports the first offending a in unit-circle order
    std::pair<bool, std::optional<TowerElt>> is_apn(const CoeffTriple& c) const {
        for (std::size_t i = 0; i < pw_.size(); ++i)
            if (kernel_dim(c, i) != 1)
                return {false, pw_[i].a};
        return {true, std::nullopt};
    }

  private:
    struct APow {
        TowerElt a, ab3, ab2a, aba2, a3;
    };
    struct Basis {
        TowerElt id, sq, bar, barsq;
    };
    const FieldCtx& F_;
    std::vector<APow> pw_;
    std::vector<Basis> basis_;
};

inline int main_eq_kernel_dim(const FieldCtx& F, const CoeffTriple& c, TowerElt a) {
    if (!F.on_unit_circle(a))
        throw std::invalid_argument("main_eq_kernel_dim requires a on the unit circle");
    FamilyApnEngine eng(F);
    for (std::size_t i = 0; i < eng.circle_size(); ++i)
        if (eng.circle_elt(i) == a)
            return eng.kernel_dim(c, i);
    throw std::logic_error("unit circle element not found");
}

inline std::pair<bool, std::optional<TowerElt>> family_is_apn(const FieldCtx& F, const CoeffTriple& c) {
    return FamilyApnEngine(F).is_apn(c);
}

// Kernel check for an arbitrary quadratic table with F(0) = 0: for every
// a != 0 the linear map x -> F(x) + F(x+a) + F(a) + F(0) must have kernel
// exactly {0, a}.  a is always in the kernel, so kernel dimension 1 suffices.
inline bool quad_is_apn_generic(const FuncTable& f) {
    const std::size_t sz = f.values.size();
    const int n = f.n;
    std::uint32_t cols[32];
    for (std::size_t a = 1; a < sz; ++a) {
        std::uint32_t fa = f.values[a] ^ f.values[0];
        for (int j = 0; j < n; ++j) {
            std::size_t e = std::size_t(1) << j;
            cols[j] = f.values[e] ^ f.values[e ^ a] ^ fa;
        }
        if (n - gf2_rank(std::span<const std::uint32_t>(cols, std::size_t(n))) != 1)
            return false;
    }
    return true;
}

} // namespace apnquad
