// field.hpp
//
// Exact arithmetic in GF(2^m) (log/antilog tables, 2 <= m <= 16) and in the
// quadratic tower GF(2^{2m}) = GF(2^m)(w) with w^2 + w + k = 0, tr(k) = 1.
// Tower elements are coordinate pairs x = x1*w + x2.  Includes the structural
// maps used by the rest of the library: the conjugation x -> x^{2^m} ("bar"),
// traces, the unit circle mu_{2^m+1}, its A-parametrization, and an
// Artin-Schreier solver for y^2 + y = c over the subfield.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace apnquad {

using FldElt = std::uint16_t; // element of GF(2^m), bit i = coeff of z^i

struct TowerElt {
    FldElt x1 = 0; // coefficient of w
    FldElt x2 = 0; // constant coordinate
    friend bool operator==(TowerElt a, TowerElt b) { return a.x1 == b.x1 && a.x2 == b.x2; }
    friend bool operator!=(TowerElt a, TowerElt b) { return !(a == b); }
    bool is_zero() const { return x1 == 0 && x2 == 0; }
    bool in_subfield() const { return x1 == 0; }
};

namespace gf2x {

// Polynomial arithmetic over GF(2) on bit-word encodings; used only for field
// construction (irreducibility checks, generator search), never in hot loops.

inline int degree(std::uint64_t p) {
    return p == 0 ? -1 : 63 - __builtin_clzll(p);
}

inline std::uint64_t mod(std::uint64_t a, std::uint64_t b) {
    int db = degree(b);
    while (a && degree(a) >= db)
        a ^= b << (degree(a) - db);
    return a;
}

inline std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
    while (b) {
        std::uint64_t t = mod(a, b);
        a = b;
        b = t;
    }
    return a;
}

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t poly, int m) {
    std::uint64_t r = 0;
    while (b) {
        if (b & 1)
            r ^= a;
        b >>= 1;
        a <<= 1;
        if ((a >> m) & 1)
            a ^= poly;
    }
    return r;
}

inline bool is_irreducible(std::uint64_t poly, int m) {
    if (degree(poly) != m || (poly & 1) == 0)
        return false;
    // x^(2^m) = x mod poly, and gcd(x^(2^(m/q)) + x, poly) = 1 for prime q | m
    const std::uint64_t x = 2;
    std::uint64_t t = x;
    for (int i = 0; i < m; ++i)
        t = mulmod(t, t, poly, m);
    if (t != x)
        return false;
    int rest = m;
    std::vector<int> qs;
    for (int q = 2; q * q <= rest; ++q)
        if (rest % q == 0) {
            qs.push_back(q);
            while (rest % q == 0)
                rest /= q;
        }
    if (rest > 1)
        qs.push_back(rest);
    for (int q : qs) {
        std::uint64_t s = x;
        for (int i = 0; i < m / q; ++i)
            s = mulmod(s, s, poly, m);
        if (gcd(s ^ x, poly) != 1)
            return false;
    }
    return true;
}

} // namespace gf2x

class FieldCtx {
  public:
    // Lowest-weight irreducible of each degree, smallest word among those.
    static std::uint32_t default_poly(int m) {
        static constexpr std::array<std::uint32_t, 17> tab = {
            0,       0,       0x7,    0xb,    0x13,   0x25,   0x43,    0x83,   0x11b,
            0x203,   0x409,   0x805,  0x1009, 0x201b, 0x4021, 0x8003,  0x1002b};
        if (m < 2 || m > 16)
            throw std::invalid_argument("unsupported m (need 2 <= m <= 16)");
        return tab[static_cast<std::size_t>(m)];
    }

    static FieldCtx make(int m) { return FieldCtx(m, default_poly(m), std::nullopt); }

    // Override hooks: a custom reduction polynomial and/or a custom k with tr(k)=1.
    static FieldCtx make(int m, std::uint32_t reduction_poly, std::optional<FldElt> k = std::nullopt) {
        return FieldCtx(m, reduction_poly, k);
    }

    static FieldCtx make_with_k(int m, FldElt k) { return FieldCtx(m, default_poly(m), k); }

    int m() const { return m_; }
    int n() const { return 2 * m_; }
    std::uint32_t reduction_poly() const { return poly_; }
    FldElt k() const { return k_; }
    std::uint32_t field_size() const { return size_; }    // 2^m
    std::uint32_t tower_size() const { return size_ * size_; } // 2^{2m}

    // ---- GF(2^m) ----

    static FldElt add(FldElt a, FldElt b) { return a ^ b; }

    FldElt mul(FldElt a, FldElt b) const {
        if (a == 0 || b == 0)
            return 0;
        return alog_[log_[a] + log_[b]];
    }

    FldElt sqr(FldElt a) const { return a ? alog_[2 * std::uint32_t(log_[a])] : FldElt(0); }

    FldElt inv(FldElt a) const {
        if (a == 0)
            throw std::domain_error("inversion of zero in GF(2^m)");
        return alog_[ord_ - log_[a]];
    }

    FldElt div(FldElt a, FldElt b) const { return mul(a, inv(b)); }

    FldElt pow(FldElt a, std::uint64_t e) const {
        if (a == 0)
            return e == 0 ? FldElt(1) : FldElt(0);
        std::uint64_t le = (std::uint64_t(log_[a]) * (e % ord_)) % ord_;
        return alog_[le];
    }

    FldElt sqrt(FldElt a) const { return pow(a, std::uint64_t(size_) / 2); } // squaring is bijective

    int tr(FldElt a) const { return trbit_[a]; }

    // Solves y^2 + y = c in GF(2^m): {y, y+1} if tr(c)=0, empty otherwise.
    // Odd m uses the half-trace sum; even m back-substitutes a row-reduced
    // m x m GF(2) system fixed at construction.
    std::vector<FldElt> solve_artin_schreier(FldElt c) const {
        if (trbit_[c])
            return {};
        FldElt y;
        if (m_ & 1) {
            // half trace: y = sum_{i=0..(m-1)/2} c^{2^{2i}}
            FldElt acc = 0, t = c;
            for (int i = 0; i <= (m_ - 1) / 2; ++i) {
                acc ^= t;
                t = sqr(sqr(t));
            }
            y = acc;
        } else {
            // d = E*c, then read the solution off the reduced system
            // (free coordinate fixed to 0, so y[pivot_r] = d_r)
            FldElt d = 0;
            for (int i = 0; i < m_; ++i)
                d |= FldElt(__builtin_parity(std::uint32_t(as_rowops_[i] & c)) << i);
            y = 0;
            for (int r = 0; r < m_; ++r)
                if (as_pivot_[r] >= 0 && ((d >> r) & 1))
                    y |= FldElt(1u << as_pivot_[r]);
        }
        if (FldElt(mul(y, y) ^ y) != c)
            throw std::logic_error("artin-schreier solver failure");
        FldElt y2 = y ^ 1;
        return y < y2 ? std::vector<FldElt>{y, y2} : std::vector<FldElt>{y2, y};
    }

    // ---- GF(2^{2m}) in the w-basis ----

    static TowerElt tadd(TowerElt a, TowerElt b) { return {FldElt(a.x1 ^ b.x1), FldElt(a.x2 ^ b.x2)}; }

    TowerElt tmul(TowerElt a, TowerElt b) const {
        // (a1 w + a2)(b1 w + b2) with w^2 = w + k
        FldElt t = mul(a.x1, b.x1);
        FldElt u = mul(a.x2, b.x2);
        FldElt v = mul(FldElt(a.x1 ^ a.x2), FldElt(b.x1 ^ b.x2));
        return {FldElt(v ^ u), FldElt(u ^ (k_ == 1 ? t : mul(k_, t)))};
    }

    TowerElt tsqr(TowerElt a) const {
        FldElt s1 = sqr(a.x1);
        return {s1, FldElt(sqr(a.x2) ^ (k_ == 1 ? s1 : mul(k_, s1)))};
    }

    // scalar (subfield) times tower element
    TowerElt smul(FldElt s, TowerElt a) const { return {mul(s, a.x1), mul(s, a.x2)}; }

    static TowerElt bar(TowerElt a) { return {a.x1, FldElt(a.x1 ^ a.x2)}; } // x^{2^m}

    FldElt norm(TowerElt a) const {
        // x * bar(x) = k*x1^2 + x1*x2 + x2^2, always in the subfield
        FldElt s1 = sqr(a.x1);
        return FldElt((k_ == 1 ? s1 : mul(k_, s1)) ^ mul(a.x1, a.x2) ^ sqr(a.x2));
    }

    TowerElt tinv(TowerElt a) const {
        if (a.is_zero())
            throw std::domain_error("inversion of zero in GF(2^{2m})");
        FldElt ni = inv(norm(a));
        return smul(ni, bar(a));
    }

    TowerElt tdiv(TowerElt a, TowerElt b) const { return tmul(a, tinv(b)); }

    TowerElt tpow(TowerElt a, std::uint64_t e) const {
        TowerElt r{0, 1};
        TowerElt base = a;
        while (e) {
            if (e & 1)
                r = tmul(r, base);
            base = tsqr(base);
            e >>= 1;
        }
        return r;
    }

    TowerElt tsqrt(TowerElt a) const {
        // x^(2^{2m-1}), so tsqrt(x)^2 = x
        TowerElt r = a;
        for (int i = 0; i < 2 * m_ - 1; ++i)
            r = tsqr(r);
        return r;
    }

    int tr_n(TowerElt a) const { return trbit_[FldElt(a.x1)]; } // absolute trace of GF(2^{2m}): tr(x + bar x)

    TowerElt omega() const { return {1, 0}; }
    TowerElt omega_bar() const { return {1, 1}; }
    static TowerElt one() { return {0, 1}; }
    static TowerElt from_sub(FldElt a) { return {0, a}; }

    bool on_unit_circle(TowerElt a) const { return !a.is_zero() && norm(a) == 1; }

    // All 2^m + 1 elements with x*bar(x) = 1; deterministic order: 1 first,
    // then a_from_A(A) for A = 0, 1, ..., 2^m - 1.
    const std::vector<TowerElt>& unit_circle() const { return mu_; }

    // The unique a with a^2 = (A + w)/(A + w + 1); lies in mu_{2^m+1} \ {1}.
    TowerElt a_from_A(FldElt A) const {
        TowerElt num{1, A};
        TowerElt den{1, FldElt(A ^ 1)};
        return tsqrt(tmul(num, tinv(den)));
    }

    FldElt A_from_a(TowerElt a) const {
        if (!on_unit_circle(a) || a == one())
            throw std::invalid_argument("A_from_a needs a in mu \\ {1}");
        TowerElt a2 = tsqr(a);
        TowerElt num = tadd(omega(), tmul(a2, omega_bar()));
        TowerElt den = tadd(a2, one());
        TowerElt A = tmul(num, tinv(den));
        if (!A.in_subfield())
            throw std::logic_error("A_from_a produced a non-subfield value");
        return A.x2;
    }

    // ---- element text encoding ----

    static std::string enc(FldElt a) {
        static const char d[] = "0123456789abcdef";
        std::string s;
        do {
            s.insert(s.begin(), d[a & 0xf]);
            a >>= 4;
        } while (a);
        return s;
    }

    static std::string enc(TowerElt a) { return enc(a.x1) + ":" + enc(a.x2); }

    FldElt parse_sub(const std::string& s) const {
        if (s.empty() || s.size() > 4)
            throw std::invalid_argument("bad field element '" + s + "'");
        std::uint32_t v = 0;
        for (char c : s) {
            int dig;
            if (c >= '0' && c <= '9')
                dig = c - '0';
            else if (c >= 'a' && c <= 'f')
                dig = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F')
                dig = c - 'A' + 10;
            else
                throw std::invalid_argument("bad field element '" + s + "'");
            v = v << 4 | std::uint32_t(dig);
        }
        if (v >= size_)
            throw std::invalid_argument("element '" + s + "' out of range for m=" + std::to_string(m_));
        return FldElt(v);
    }

    TowerElt parse_tower(const std::string& s) const {
        auto colon = s.find(':');
        if (colon == std::string::npos)
            return from_sub(parse_sub(s)); // bare scalars accepted as subfield values
        return {parse_sub(s.substr(0, colon)), parse_sub(s.substr(colon + 1))};
    }

    std::uint32_t pack(TowerElt a) const { return std::uint32_t(a.x1) << m_ | a.x2; }
    TowerElt unpack(std::uint32_t w) const { return {FldElt(w >> m_), FldElt(w & (size_ - 1))}; }

  private:
    FieldCtx(int m, std::uint32_t poly, std::optional<FldElt> k) : m_(m), poly_(poly) {
        if (m < 2 || m > 16)
            throw std::invalid_argument("unsupported m (need 2 <= m <= 16)");
        if (!gf2x::is_irreducible(poly, m))
            throw std::invalid_argument("reduction polynomial is not irreducible of degree m");
        size_ = 1u << m;
        ord_ = size_ - 1;
        build_log_tables();
        build_trace_table();
        if (k) {
            if (tr(*k) != 1)
                throw std::invalid_argument("k must satisfy tr(k) = 1");
            k_ = *k;
        } else if (m & 1) {
            k_ = 1; // tr(1) = m mod 2
        } else {
            k_ = 0;
            for (std::uint32_t c = 1; c < size_; ++c)
                if (trbit_[c]) {
                    k_ = FldElt(c);
                    break;
                }
        }
        if (!(m_ & 1))
            build_artin_schreier();
        build_unit_circle();
    }

    void build_log_tables() {
        log_.assign(size_, 0);
        alog_.assign(2 * std::size_t(ord_), 0);
        // factor 2^m - 1, then search the smallest generator
        std::vector<std::uint32_t> primes;
        std::uint32_t r = ord_;
        for (std::uint32_t q = 2; q * q <= r; ++q)
            if (r % q == 0) {
                primes.push_back(q);
                while (r % q == 0)
                    r /= q;
            }
        if (r > 1)
            primes.push_back(r);
        auto soft_pow = [&](std::uint32_t base, std::uint32_t e) {
            std::uint64_t acc = 1, b = base;
            while (e) {
                if (e & 1)
                    acc = gf2x::mulmod(acc, b, poly_, m_);
                b = gf2x::mulmod(b, b, poly_, m_);
                e >>= 1;
            }
            return std::uint32_t(acc);
        };
        std::uint32_t g = 0;
        for (std::uint32_t cand = 2; cand < size_; ++cand) {
            bool ok = true;
            for (std::uint32_t q : primes)
                if (soft_pow(cand, ord_ / q) == 1) {
                    ok = false;
                    break;
                }
            if (ok) {
                g = cand;
                break;
            }
        }
        if (g == 0)
            throw std::logic_error("no generator found");
        std::uint32_t acc = 1;
        for (std::uint32_t i = 0; i < ord_; ++i) {
            alog_[i] = FldElt(acc);
            alog_[i + ord_] = FldElt(acc);
            log_[acc] = FldElt(i);
            acc = std::uint32_t(gf2x::mulmod(acc, g, poly_, m_));
        }
        if (acc != 1)
            throw std::logic_error("generator order mismatch");
    }

    void build_trace_table() {
        trbit_.assign(size_, 0);
        for (std::uint32_t a = 1; a < size_; ++a) {
            FldElt s = 0, t = FldElt(a);
            for (int i = 0; i < m_; ++i) {
                s ^= t;
                t = mul(t, t);
            }
            if (s != 0 && s != 1)
                throw std::logic_error("trace out of GF(2)");
            trbit_[a] = std::uint8_t(s);
        }
    }

    void build_artin_schreier() {
        // row-reduce the matrix of y -> y^2 + y over the z^i basis,
        // recording the row operations for later back-substitution
        std::array<std::uint32_t, 16> cols{};
        for (int j = 0; j < m_; ++j) {
            FldElt e = FldElt(1u << j);
            cols[std::size_t(j)] = std::uint32_t(sqr(e) ^ e);
        }
        // rows[i] = bit i of each column, as an m-bit mask over columns
        as_rows_.fill(0);
        as_rowops_.fill(0);
        as_pivot_.fill(-1);
        for (int i = 0; i < m_; ++i) {
            std::uint32_t row = 0;
            for (int j = 0; j < m_; ++j)
                row |= ((cols[std::size_t(j)] >> i) & 1u) << j;
            as_rows_[i] = row;
            as_rowops_[i] = 1u << i;
        }
        int rank = 0;
        for (int col = 0; col < m_ && rank < m_; ++col) {
            int p = -1;
            for (int i = rank; i < m_; ++i)
                if ((as_rows_[i] >> col) & 1) {
                    p = i;
                    break;
                }
            if (p < 0)
                continue;
            std::swap(as_rows_[rank], as_rows_[p]);
            std::swap(as_rowops_[rank], as_rowops_[p]);
            for (int i = 0; i < m_; ++i)
                if (i != rank && ((as_rows_[i] >> col) & 1)) {
                    as_rows_[i] ^= as_rows_[rank];
                    as_rowops_[i] ^= as_rowops_[rank];
                }
            as_pivot_[rank] = col;
            ++rank;
        }
    }

    void build_unit_circle() {
        mu_.clear();
        mu_.reserve(size_ + 1);
        mu_.push_back(one());
        for (std::uint32_t A = 0; A < size_; ++A)
            mu_.push_back(a_from_A(FldElt(A)));
        for (TowerElt u : mu_)
            if (!on_unit_circle(u))
                throw std::logic_error("unit circle construction failure");
    }

    int m_ = 0;
    std::uint32_t poly_ = 0;
    std::uint32_t size_ = 0;
    std::uint32_t ord_ = 0;
    FldElt k_ = 0;
    std::vector<FldElt> log_;
    std::vector<FldElt> alog_;
    std::vector<std::uint8_t> trbit_;
    std::vector<TowerElt> mu_;
    std::array<std::uint32_t, 16> as_rows_{};
    std::array<std::uint32_t, 16> as_rowops_{};
    std::array<int, 16> as_pivot_{};
};

} // namespace apnquad
