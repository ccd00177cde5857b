#include <catch2/catch_amalgamated.hpp>

#include "apnquad/parallel.hpp"
#include "apnquad/quad.hpp"

#include <atomic>
#include <vector>

using namespace apnquad;

namespace {

// exact differential uniformity of the 2^6-entry table of f_c, plain counters
int diff_uniformity6(const FieldCtx& F, const CoeffTriple& c) {
    std::uint32_t tab[64];
    for (std::uint32_t x = 0; x < 64; ++x)
        tab[x] = F.pack(eval_f(F, c, F.unpack(x)));
    int maxc = 0;
    for (std::uint32_t a = 1; a < 64; ++a) {
        std::uint8_t cnt[64] = {0};
        for (std::uint32_t x = 0; x < 64; ++x) {
            int v = ++cnt[tab[x] ^ tab[x ^ a]];
            if (v > maxc)
                maxc = v;
        }
    }
    return maxc;
}

// every a1-normalized triple at a given m, packed iteration
template <class Fn>
void for_each_normalized_triple(const FieldCtx& F, Fn&& fn) {
    const std::uint32_t sub = F.field_size(), full = F.tower_size();
    for (std::uint32_t a1 = 0; a1 < sub; ++a1)
        for (std::uint32_t a2 = 0; a2 < full; ++a2)
            for (std::uint32_t a3 = 0; a3 < full; ++a3)
                fn(CoeffTriple::subfield(FldElt(a1), F.unpack(a2), F.unpack(a3)));
}

} // namespace

TEST_CASE("eval_f basics at m=3") {
    auto F = FieldCtx::make(3);
    SECTION("zero coefficients leave bar(x)^3") {
        CoeffTriple z = CoeffTriple::subfield(0, {0, 0}, {0, 0});
        for (std::uint32_t xw = 0; xw < 64; ++xw) {
            TowerElt x = F.unpack(xw);
            CHECK(eval_f(F, z, x) == F.tpow(FieldCtx::bar(x), 3));
        }
    }
    SECTION("f(0) = 0 and subfield homogeneity f(bx) = b^3 f(x)") {
        SplitMix64 rng(7);
        for (int i = 0; i < 64; ++i) {
            CoeffTriple c{F.unpack(std::uint32_t(rng.below(64))), F.unpack(std::uint32_t(rng.below(64))),
                          F.unpack(std::uint32_t(rng.below(64))), false};
            CHECK(eval_f(F, c, {0, 0}) == (TowerElt{0, 0}));
            for (std::uint32_t b = 0; b < 8; ++b) {
                FldElt b3 = F.mul(F.sqr(FldElt(b)), FldElt(b));
                for (std::uint32_t xw = 0; xw < 64; ++xw) {
                    TowerElt x = F.unpack(xw);
                    if (eval_f(F, c, F.smul(FldElt(b), x)) != F.smul(b3, eval_f(F, c, x))) {
                        FAIL("homogeneity violated at b=" << b << " x=" << xw);
                    }
                }
            }
        }
    }
}

TEST_CASE("normalize_a1") {
    auto F = FieldCtx::make(3);
    SECTION("a1 = 0 and subfield a1 are fixed points") {
        CoeffTriple c0{{0, 0}, {2, 5}, {1, 7}, false};
        auto [n0, b0] = normalize_a1(F, c0);
        CHECK(n0 == c0);
        CHECK(n0.a1_in_subfield);
        CHECK(b0 == FieldCtx::one());
        CoeffTriple cs{{0, 5}, {2, 5}, {1, 7}, false};
        auto [ns, bs] = normalize_a1(F, cs);
        CHECK(ns == cs);
        CHECK(bs == F.tpow(cs.a1, 4)); // a1^{2^{m-1}}
    }
    SECTION("witness identities for general a1") {
        SplitMix64 rng(11);
        for (int i = 0; i < 200; ++i) {
            CoeffTriple c{F.unpack(std::uint32_t(rng.below(64))), F.unpack(std::uint32_t(rng.below(64))),
                          F.unpack(std::uint32_t(rng.below(64))), false};
            auto [nc, b] = normalize_a1(F, c);
            CHECK(nc.a1_in_subfield);
            CHECK(nc.a1.in_subfield());
            if (!c.a1.is_zero()) {
                CHECK(b == F.tpow(c.a1, 4));
                CHECK(nc.a1 == FieldCtx::from_sub(F.norm(b))); // b^{2^m+1}
                TowerElt r = F.tdiv(b, FieldCtx::bar(b));
                CHECK(nc.a2 == F.tmul(c.a2, F.tsqr(r)));
                CHECK(nc.a3 == F.tmul(c.a3, F.tmul(F.tsqr(r), r)));
            }
        }
    }
    SECTION("differential uniformity preserved, exhaustive over GF(2^6)^3") {
        std::atomic<std::uint64_t> bad{0};
        parallel_chunks(0, 64, [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t a1 = lo; a1 < hi; ++a1) {
                for (std::uint32_t a2 = 0; a2 < 64; ++a2)
                    for (std::uint32_t a3 = 0; a3 < 64; ++a3) {
                        CoeffTriple c{F.unpack(std::uint32_t(a1)), F.unpack(a2), F.unpack(a3), false};
                        auto [nc, b] = normalize_a1(F, c);
                        if (c.a1.in_subfield()) {
                            if (!(nc == c))
                                ++bad;
                            continue;
                        }
                        if (diff_uniformity6(F, c) != diff_uniformity6(F, nc))
                            ++bad;
                    }
            }
        });
        CHECK(bad.load() == 0);
    }
}

TEST_CASE("thetas") {
    auto F = FieldCtx::make(3);
    SECTION("fixed examples") {
        ThetaSet t0 = thetas(F, CoeffTriple::subfield(0, {0, 0}, {0, 0}));
        CHECK(t0.t1 == FieldCtx::one());
        CHECK(t0.t2 == (TowerElt{0, 0}));
        CHECK(t0.t3 == (TowerElt{0, 0}));
        CHECK(t0.t4 == (TowerElt{0, 0}));

        ThetaSet t1 = thetas(F, CoeffTriple::subfield(1, {0, 0}, {0, 0}));
        CHECK(t1.t1 == (TowerElt{0, 0}));
        CHECK(t1.t2 == FieldCtx::one());
        CHECK(t1.t3 == (TowerElt{0, 0}));
        CHECK(t1.t4 == FieldCtx::one());

        for (std::uint32_t a3w = 0; a3w < 64; ++a3w) {
            TowerElt a3 = F.unpack(a3w);
            ThetaSet t = thetas(F, CoeffTriple::subfield(0, {0, 0}, a3));
            CHECK(t.t1 == FieldCtx::from_sub(FldElt(1 ^ F.norm(a3))));
            CHECK(t.t2 == (TowerElt{0, 0}));
            CHECK(t.t3 == (TowerElt{0, 0}));
            CHECK(t.t4 == (TowerElt{0, 0}));
        }
    }
    SECTION("rejects non-normalized triples") {
        CoeffTriple raw{{1, 0}, {0, 0}, {0, 0}, false};
        CHECK_THROWS_AS(thetas(F, raw), std::invalid_argument);
        CoeffTriple lie{{1, 0}, {0, 0}, {0, 0}, true}; // flag set but a1 not in subfield
        CHECK_THROWS_AS(thetas(F, lie), std::invalid_argument);
    }
}

TEST_CASE("theta identity (exhaustive m=3) and epsilon/nu structure") {
    auto F = FieldCtx::make(3);
    const auto& mu = F.unit_circle();

    std::uint64_t theta_bad = 0, eps_bad = 0, nu_bad = 0, nu1_phi_bad = 0;
    for_each_normalized_triple(F, [&](const CoeffTriple& c) {
        ThetaSet t = thetas(F, c);
        if (!theta_identity_holds(F, t))
            ++theta_bad;
        PhiSet p = varphis(F, t);
        for (TowerElt a : mu) {
            EpsilonSet e = epsilons(F, c, a);
            TowerElt sum = FieldCtx::tadd(FieldCtx::tadd(e.e1, e.e2), FieldCtx::tadd(e.e3, e.e4));
            if (!sum.is_zero())
                ++eps_bad;
            NuSet nu = nus(F, c, a); // throws if the two nu routes disagree
            if (a == FieldCtx::one() && nu.nu1 != FieldCtx::from_sub(p.phi1))
                ++nu1_phi_bad;
        }
        if (!nu_rational_check(F, c, F.k()))
            ++nu_bad;
    });
    CHECK(theta_bad == 0);
    CHECK(eps_bad == 0);
    CHECK(nu_bad == 0);
    CHECK(nu1_phi_bad == 0);

    SECTION("artificial theta set fails the identity") {
        ThetaSet badt{FieldCtx::one(), FieldCtx::one(), {0, 0}, {0, 0}};
        CHECK_FALSE(theta_identity_holds(F, badt));
    }
    SECTION("epsilon fixed examples") {
        CoeffTriple z = CoeffTriple::subfield(0, {0, 0}, {0, 0});
        EpsilonSet e = epsilons(F, z, FieldCtx::one());
        CHECK(e.e1 == FieldCtx::one());
        CHECK(e.e2 == FieldCtx::one());
        CHECK(e.e3 == (TowerElt{0, 0}));
        CHECK(e.e4 == (TowerElt{0, 0}));
        for (TowerElt a : mu) {
            TowerElt ab3 = F.tpow(FieldCtx::bar(a), 3);
            EpsilonSet ee = epsilons(F, z, a);
            CHECK(ee.e1 == ab3);
            CHECK(ee.e2 == ab3);
            CHECK(ee.e3 == (TowerElt{0, 0}));
            CHECK(ee.e4 == (TowerElt{0, 0}));
        }
        CHECK_THROWS_AS(epsilons(F, z, TowerElt{1, 3}), std::invalid_argument);
    }
    SECTION("nu fixed example: zero triple at a=1") {
        NuSet nu = nus(F, CoeffTriple::subfield(0, {0, 0}, {0, 0}), FieldCtx::one());
        CHECK(nu.nu1 == FieldCtx::one()); // theta1 = 1
    }
}

TEST_CASE("varphis") {
    auto F = FieldCtx::make(3);
    SECTION("zero triple gives (1, k, 0, 0)") {
        PhiSet p = varphis(F, thetas(F, CoeffTriple::subfield(0, {0, 0}, {0, 0})));
        CHECK(p.phi1 == 1);
        CHECK(p.phi2 == FieldCtx::from_sub(F.k()));
        CHECK(p.phi3 == (TowerElt{0, 0}));
        CHECK(p.phi4 == (TowerElt{0, 0}));
    }
    SECTION("subfield membership and coordinate views, exhaustive m=3") {
        std::uint64_t bad = 0;
        FldElt k = F.k();
        for_each_normalized_triple(F, [&](const CoeffTriple& c) {
            ThetaSet t = thetas(F, c);
            PhiSet p = varphis(F, t);
            // phi1 = theta1 + theta2 + bar(theta2) recomputed in the tower
            TowerElt p1t = FieldCtx::tadd(t.t1, FieldCtx::tadd(t.t2, FieldCtx::bar(t.t2)));
            if (!p1t.in_subfield() || p1t.x2 != p.phi1)
                ++bad;
            if (!p.phi2.in_subfield())
                ++bad;
            FldElt t4 = t.t4.x2;
            if (p.phi31() != FldElt(t.t21() ^ t.t31()))
                ++bad;
            if (p.phi32() != FldElt(t.t21() ^ t.t22() ^ t.t32() ^ t4))
                ++bad;
            if (p.phi41() != FldElt(F.mul(k, FldElt(t.t21() ^ t.t31())) ^ t.t32() ^ t4))
                ++bad;
            if (p.phi42() != FldElt(F.mul(k, FldElt(t.t21() ^ t.t22() ^ t.t31() ^ t4)) ^
                                    F.mul(FldElt(k ^ 1), t.t32())))
                ++bad;
        });
        CHECK(bad == 0);
    }
}

TEST_CASE("nu rational forms") {
    SECTION("exhaustive over (triple, A) at m=3") {
        auto F = FieldCtx::make(3);
        std::atomic<std::uint64_t> bad{0};
        parallel_chunks(0, 8, [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t a1 = lo; a1 < hi; ++a1)
                for (std::uint32_t a2 = 0; a2 < 64; ++a2)
                    for (std::uint32_t a3 = 0; a3 < 64; ++a3) {
                        CoeffTriple c = CoeffTriple::subfield(FldElt(a1), F.unpack(a2), F.unpack(a3));
                        for (std::uint32_t A = 0; A < 8; ++A)
                            if (!nu_rational_check(F, c, FldElt(A)))
                                ++bad;
                    }
        });
        CHECK(bad.load() == 0);
    }
    SECTION("random samples at m=5") {
        auto F = FieldCtx::make(5);
        SplitMix64 rng(2024);
        std::uint64_t bad = 0;
        for (int i = 0; i < 10000; ++i) {
            CoeffTriple c = CoeffTriple::subfield(FldElt(rng.below(32)),
                                                  F.unpack(std::uint32_t(rng.below(1024))),
                                                  F.unpack(std::uint32_t(rng.below(1024))));
            if (!nu_rational_check(F, c, FldElt(rng.below(32))))
                ++bad;
        }
        CHECK(bad == 0);
    }
    SECTION("zero triple: nu1 = 1 for every A") {
        auto F = FieldCtx::make(3);
        CoeffTriple z = CoeffTriple::subfield(0, {0, 0}, {0, 0});
        for (std::uint32_t A = 0; A < 8; ++A) {
            NuSet nu = nus(F, z, F.a_from_A(FldElt(A)));
            CHECK(nu.nu1 == FieldCtx::one());
        }
    }
}
