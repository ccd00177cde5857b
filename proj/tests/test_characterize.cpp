#include <catch2/catch_amalgamated.hpp>

#include "apnquad/apncore.hpp"
#include "apnquad/characterize.hpp"
#include "apnquad/parallel.hpp"

#include <atomic>
#include <cstdint>

using namespace apnquad;

namespace {

// From-scratch Gamma2 membership: independent tower arithmetic built on
// shift-and-xor subfield multiplication, no log tables, no library thetas.
struct SoftTower {
    std::uint32_t poly;
    int m;
    FldElt k;

    FldElt mul(std::uint32_t a, std::uint32_t b) const {
        std::uint32_t r = 0;
        while (b) {
            if (b & 1)
                r ^= a;
            b >>= 1;
            a <<= 1;
            if ((a >> m) & 1)
                a ^= poly;
        }
        return FldElt(r);
    }
    FldElt inv(FldElt a) const {
        // a^(2^m - 2)
        FldElt r = 1, base = a;
        std::uint32_t e = (1u << m) - 2;
        while (e) {
            if (e & 1)
                r = mul(r, base);
            base = mul(base, base);
            e >>= 1;
        }
        return r;
    }
    int tr(FldElt a) const {
        FldElt s = 0, t = a;
        for (int i = 0; i < m; ++i) {
            s ^= t;
            t = mul(t, t);
        }
        return s;
    }
    TowerElt tmul(TowerElt a, TowerElt b) const {
        FldElt t = mul(a.x1, b.x1);
        FldElt u = mul(a.x2, b.x2);
        FldElt v = mul(FldElt(a.x1 ^ a.x2), FldElt(b.x1 ^ b.x2));
        return {FldElt(v ^ u), FldElt(u ^ mul(k, t))};
    }
    static TowerElt bar(TowerElt a) { return {a.x1, FldElt(a.x1 ^ a.x2)}; }

    bool in_gamma2_raw(FldElt a1, TowerElt a2, TowerElt a3) const {
        TowerElt a2b = bar(a2), a3b = bar(a3);
        FldElt n2 = tmul(a2, a2b).x2, n3 = tmul(a3, a3b).x2;
        FldElt t1 = FldElt(1 ^ mul(a1, a1) ^ n2 ^ n3);
        TowerElt t2 = tmul(a2b, a3);
        t2.x2 = FldElt(t2.x2 ^ a1);
        TowerElt t3{FldElt(mul(a1, a3b.x1) ^ a2b.x1), FldElt(mul(a1, a3b.x2) ^ a2b.x2)};
        if (t1 == 0)
            return false;
        FldElt n_t2 = tmul(t2, bar(t2)).x2;
        FldElt i1 = inv(t1);
        if (tr(mul(n_t2, mul(i1, i1))) != 0)
            return false;
        // theta1^2 theta3 + theta1 bar(theta2)^2 + theta2^2 theta3 + bar(theta2)^2 bar(theta3)
        FldElt t1sq = mul(t1, t1);
        TowerElt t2b = bar(t2), t3b = bar(t3);
        TowerElt t2sq = tmul(t2, t2), t2bsq = tmul(t2b, t2b);
        TowerElt lhs = {mul(t1sq, t3.x1), mul(t1sq, t3.x2)};
        lhs.x1 = FldElt(lhs.x1 ^ mul(t1, t2bsq.x1));
        lhs.x2 = FldElt(lhs.x2 ^ mul(t1, t2bsq.x2));
        TowerElt p = tmul(t2sq, t3);
        TowerElt q = tmul(t2bsq, t3b);
        lhs.x1 = FldElt(lhs.x1 ^ p.x1 ^ q.x1);
        lhs.x2 = FldElt(lhs.x2 ^ p.x2 ^ q.x2);
        return lhs.x1 == 0 && lhs.x2 == 0;
    }
};

} // namespace

TEST_CASE("gamma membership examples") {
    auto F = FieldCtx::make(4);
    SECTION("zero triple is in Gamma1 and Gamma2, not in Gamma") {
        ThetaSet t = thetas(F, CoeffTriple::subfield(0, {0, 0}, {0, 0}));
        GammaVerdict v = gamma_verdict(F, t);
        CHECK(v.theta1_nonzero);
        CHECK(v.trace_term == 0);
        CHECK(v.in_gamma1);
        CHECK(v.in_gamma2);
        CHECK_FALSE(v.in_gamma_perm); // tr(theta4/theta1) = tr(0) = 0
    }
    SECTION("(1,0,0) fails every set: theta1 = 0") {
        ThetaSet t = thetas(F, CoeffTriple::subfield(1, {0, 0}, {0, 0}));
        GammaVerdict v = gamma_verdict(F, t);
        CHECK_FALSE(v.theta1_nonzero);
        CHECK_FALSE(v.in_gamma1);
        CHECK_FALSE(v.in_gamma2);
        CHECK_FALSE(v.in_gamma_perm);
    }
    SECTION("(0,0,a3) with norm(a3) = 1 has theta1 = 0") {
        TowerElt a3 = F.a_from_A(3); // any unit-circle element has norm 1
        ThetaSet t = thetas(F, CoeffTriple::subfield(0, {0, 0}, a3));
        CHECK(t.t1 == (TowerElt{0, 0}));
        CHECK_FALSE(in_gamma1(F, t));
        CHECK_FALSE(in_gamma2(F, t));
    }
    SECTION("artificial theta sets with non-subfield theta1 are rejected") {
        ThetaSet bad{{1, 0}, {0, 0}, {0, 0}, {0, 0}};
        CHECK_THROWS_AS(gamma_verdict(F, bad), std::invalid_argument);
    }
}

TEST_CASE("gamma2 census matches an independent raw-coefficient re-derivation") {
    for (int m : {3, 4}) {
        auto F = FieldCtx::make(m);
        SoftTower soft{F.reduction_poly(), m, F.k()};
        const std::uint32_t sub = F.field_size(), full = F.tower_size();
        std::atomic<std::uint64_t> bad{0}, census_lib{0}, census_soft{0};
        parallel_chunks(0, sub, [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
            std::uint64_t lib = 0, sft = 0, mism = 0;
            for (std::uint64_t a1 = lo; a1 < hi; ++a1)
                for (std::uint32_t a2 = 0; a2 < full; ++a2)
                    for (std::uint32_t a3 = 0; a3 < full; ++a3) {
                        CoeffTriple c = CoeffTriple::subfield(FldElt(a1), F.unpack(a2), F.unpack(a3));
                        bool g2 = in_gamma2(F, thetas(F, c));
                        bool g2soft = soft.in_gamma2_raw(FldElt(a1), F.unpack(a2), F.unpack(a3));
                        lib += g2;
                        sft += g2soft;
                        mism += g2 != g2soft;
                    }
            census_lib += lib;
            census_soft += sft;
            bad += mism;
        });
        INFO("m=" << m << " census=" << census_lib.load());
        CHECK(bad.load() == 0);
        CHECK(census_lib.load() == census_soft.load());
        CHECK(census_lib.load() > 0);
    }
}

TEST_CASE("gamma permutation set") {
    SECTION("m=5: members found by scan are permutations, non-members never are") {
        auto F = FieldCtx::make(5);
        SplitMix64 rng(31337);
        int found = 0, tried = 0;
        while (found < 3 && tried < 200000) {
            ++tried;
            CoeffTriple c = CoeffTriple::subfield(FldElt(rng.below(32)),
                                                  F.unpack(std::uint32_t(rng.below(1024))),
                                                  F.unpack(std::uint32_t(rng.below(1024))));
            GammaVerdict v = gamma_verdict(F, thetas(F, c));
            if (v.in_gamma_perm) {
                ++found;
                CHECK(is_permutation(make_family_table(F, c)));
                CHECK_FALSE(v.in_gamma1); // Gamma and Gamma1 are disjoint
            }
        }
        REQUIRE(found == 3);
        // converse direction on a sample: permutations lie in Gamma (m odd)
        SplitMix64 rng2(414);
        for (int i = 0; i < 400; ++i) {
            CoeffTriple c = CoeffTriple::subfield(FldElt(rng2.below(32)),
                                                  F.unpack(std::uint32_t(rng2.below(1024))),
                                                  F.unpack(std::uint32_t(rng2.below(1024))));
            if (is_permutation(make_family_table(F, c)))
                CHECK(in_gamma_perm(F, thetas(F, c)));
        }
    }
    SECTION("m=4: the family contains no permutations at all") {
        auto F = FieldCtx::make(4);
        SplitMix64 rng(55);
        for (int i = 0; i < 500; ++i) {
            CoeffTriple c = CoeffTriple::subfield(FldElt(rng.below(16)),
                                                  F.unpack(std::uint32_t(rng.below(256))),
                                                  F.unpack(std::uint32_t(rng.below(256))));
            CHECK_FALSE(is_permutation(make_family_table(F, c)));
        }
    }
    SECTION("Gamma and Gamma1 never intersect, exhaustive m=4") {
        auto F = FieldCtx::make(4);
        std::atomic<std::uint64_t> overlap{0}, gamma_count{0};
        parallel_chunks(0, 16, [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
            std::uint64_t ov = 0, gc = 0;
            for (std::uint64_t a1 = lo; a1 < hi; ++a1)
                for (std::uint32_t a2 = 0; a2 < 256; ++a2)
                    for (std::uint32_t a3 = 0; a3 < 256; ++a3) {
                        GammaVerdict v = gamma_verdict(
                            F, thetas(F, CoeffTriple::subfield(FldElt(a1), F.unpack(a2), F.unpack(a3))));
                        if (v.in_gamma_perm) {
                            ++gc;
                            if (v.in_gamma1)
                                ++ov;
                        }
                    }
            overlap += ov;
            gamma_count += gc;
        });
        CHECK(overlap.load() == 0);
        CHECK(gamma_count.load() > 0); // census is non-vacuous
    }
}

TEST_CASE("theorem and final-form verdicts") {
    SECTION("zero triple is APN by the theorem at m = 4, 5, 6") {
        for (int m : {4, 5, 6}) {
            auto F = FieldCtx::make(m);
            CHECK(theorem_verdict(F, CoeffTriple::subfield(0, {0, 0}, {0, 0})));
            CHECK(final_form_verdict(F, CoeffTriple::subfield(0, {0, 0}, {0, 0})));
        }
    }
    SECTION("sampled m=4 agreement with the family decider") {
        auto F = FieldCtx::make(4);
        FamilyApnEngine eng(F);
        SplitMix64 rng(2718);
        for (int i = 0; i < 3000; ++i) {
            CoeffTriple c = CoeffTriple::subfield(FldElt(rng.below(16)),
                                                  F.unpack(std::uint32_t(rng.below(256))),
                                                  F.unpack(std::uint32_t(rng.below(256))));
            CHECK(theorem_verdict(F, c) == eng.is_apn(c).first);
        }
    }
    SECTION("final form agrees with the theorem, exhaustive m=3 and m=4") {
        for (int m : {3, 4}) {
            auto F = FieldCtx::make(m);
            const std::uint32_t sub = F.field_size(), full = F.tower_size();
            std::atomic<std::uint64_t> bad{0};
            parallel_chunks(0, sub, [&](unsigned, std::uint64_t lo, std::uint64_t hi) {
                for (std::uint64_t a1 = lo; a1 < hi; ++a1)
                    for (std::uint32_t a2 = 0; a2 < full; ++a2)
                        for (std::uint32_t a3 = 0; a3 < full; ++a3) {
                            CoeffTriple c = CoeffTriple::subfield(FldElt(a1), F.unpack(a2), F.unpack(a3));
                            if (theorem_verdict(F, c) != final_form_verdict(F, c))
                                ++bad;
                        }
            });
            INFO("m=" << m);
            CHECK(bad.load() == 0);
        }
    }
    SECTION("final form agrees with the theorem on 10^6 random triples at m=5") {
        auto F = FieldCtx::make(5);
        std::atomic<std::uint64_t> bad{0};
        parallel_chunks(0, 1000000, [&](unsigned w, std::uint64_t lo, std::uint64_t hi) {
            SplitMix64 rng(0xfeedULL * (w + 1));
            for (std::uint64_t i = lo; i < hi; ++i) {
                CoeffTriple c = CoeffTriple::subfield(FldElt(rng.below(32)),
                                                      F.unpack(std::uint32_t(rng.below(1024))),
                                                      F.unpack(std::uint32_t(rng.below(1024))));
                if (theorem_verdict(F, c) != final_form_verdict(F, c))
                    ++bad;
            }
        });
        CHECK(bad.load() == 0);
    }
}
