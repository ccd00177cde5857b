// quad.hpp
//
// The quadrinomial family f(x) = bar(x)^3 + a1 bar(x)^2 x + a2 bar(x) x^2 + a3 x^3
// over GF(2^{2m}): evaluation, the a1-normalization into the subfield, and the
// derived quantities theta, epsilon, nu, phi together with their identities.

#pragma once

#include "apnquad/field.hpp"

#include <stdexcept>
#include <utility>

namespace apnquad {

struct CoeffTriple {
    TowerElt a1, a2, a3;
    bool a1_in_subfield = false;

    static CoeffTriple subfield(FldElt a1, TowerElt a2, TowerElt a3) {
        return {FieldCtx::from_sub(a1), a2, a3, true};
    }
    friend bool operator==(const CoeffTriple& a, const CoeffTriple& b) {
        return a.a1 == b.a1 && a.a2 == b.a2 && a.a3 == b.a3;
    }
};

struct ThetaSet {
    TowerElt t1, t2, t3, t4;
    // coordinate views
    FldElt t21() const { return t2.x1; }
    FldElt t22() const { return t2.x2; }
    FldElt t31() const { return t3.x1; }
    FldElt t32() const { return t3.x2; }
};

struct EpsilonSet {
    TowerElt e1, e2, e3, e4;
};

struct NuSet {
    TowerElt nu1, nu2, nu3;
};

struct PhiSet {
    FldElt phi1;
    TowerElt phi2, phi3, phi4;
    // coordinate views
    FldElt phi31() const { return phi3.x1; }
    FldElt phi32() const { return phi3.x2; }
    FldElt phi41() const { return phi4.x1; }
    FldElt phi42() const { return phi4.x2; }
};

inline TowerElt eval_f(const FieldCtx& F, const CoeffTriple& c, TowerElt x) {
    TowerElt xb = FieldCtx::bar(x);
    TowerElt x_2 = F.tsqr(x);
    TowerElt xb2 = F.tsqr(xb);
    TowerElt r = F.tmul(xb2, xb);                       // bar(x)^3
    r = FieldCtx::tadd(r, F.tmul(c.a1, F.tmul(xb2, x))); // a1 bar(x)^2 x
    r = FieldCtx::tadd(r, F.tmul(c.a2, F.tmul(xb, x_2))); // a2 bar(x) x^2
    r = FieldCtx::tadd(r, F.tmul(c.a3, F.tmul(x_2, x)));  // a3 x^3
    return r;
}

// Moves a1 into the subfield: with b = a1^{2^{m-1}}, f(bx) = bar(b)^3 f'(x)
// where f' has coefficients (b^{2^m+1}, a2 (b/bar b)^2, a3 (b/bar b)^3), so
// the differential uniformity is unchanged.  Returns (f', b).
inline std::pair<CoeffTriple, TowerElt> normalize_a1(const FieldCtx& F, const CoeffTriple& c) {
    if (c.a1.is_zero())
        return {CoeffTriple{c.a1, c.a2, c.a3, true}, FieldCtx::one()};
    TowerElt b = c.a1;
    for (int i = 0; i < F.m() - 1; ++i)
        b = F.tsqr(b); // a1^{2^{m-1}}
    TowerElt r = F.tmul(b, F.tinv(FieldCtx::bar(b)));
    TowerElt r2 = F.tsqr(r);
    TowerElt r3 = F.tmul(r2, r);
    CoeffTriple out{FieldCtx::from_sub(F.norm(b)), F.tmul(c.a2, r2), F.tmul(c.a3, r3), true};
    return {out, b};
}

inline ThetaSet thetas(const FieldCtx& F, const CoeffTriple& c) {
    if (!c.a1_in_subfield || !c.a1.in_subfield())
        throw std::invalid_argument("thetas requires an a1-normalized triple");
    FldElt s = c.a1.x2;
    FldElt s2 = F.sqr(s);
    FldElt n2 = F.norm(c.a2);
    FldElt n3 = F.norm(c.a3);
    ThetaSet t;
    t.t1 = FieldCtx::from_sub(FldElt(1 ^ s2 ^ n2 ^ n3));            // 1 + a1^2 + a2 bar(a2) + a3 bar(a3)
    t.t2 = FieldCtx::tadd(c.a1, F.tmul(FieldCtx::bar(c.a2), c.a3)); // a1 + bar(a2) a3
    t.t3 = FieldCtx::tadd(FieldCtx::bar(c.a2), F.smul(s, FieldCtx::bar(c.a3))); // bar(a2) + a1 bar(a3)
    t.t4 = FieldCtx::from_sub(FldElt(s2 ^ n2));                     // a1^2 + a2 bar(a2)
    return t;
}

inline bool theta_identity_holds(const FieldCtx& F, const ThetaSet& t) {
    // theta2 bar(theta2) + theta3 bar(theta3) + theta1 theta4 + theta4^2 = 0
    TowerElt lhs = F.tmul(t.t2, FieldCtx::bar(t.t2));
    lhs = FieldCtx::tadd(lhs, F.tmul(t.t3, FieldCtx::bar(t.t3)));
    lhs = FieldCtx::tadd(lhs, F.tmul(t.t1, t.t4));
    lhs = FieldCtx::tadd(lhs, F.tsqr(t.t4));
    return lhs.is_zero();
}

inline EpsilonSet epsilons(const FieldCtx& F, const CoeffTriple& c, TowerElt a) {
    if (!F.on_unit_circle(a))
        throw std::invalid_argument("epsilons requires a on the unit circle");
    TowerElt ab = FieldCtx::bar(a);
    TowerElt ab2 = F.tsqr(ab);
    TowerElt ab3 = F.tmul(ab2, ab);
    TowerElt a2 = F.tsqr(a);
    TowerElt a3 = F.tmul(a2, a);
    TowerElt ab2a = F.tmul(ab2, a);
    TowerElt aba2 = F.tmul(ab, a2);
    TowerElt u1 = F.tmul(c.a1, ab2a); // a1 bar(a)^2 a
    TowerElt u2 = F.tmul(c.a2, aba2); // a2 bar(a) a^2
    TowerElt u3 = F.tmul(c.a3, a3);   // a3 a^3
    return {FieldCtx::tadd(ab3, u1), FieldCtx::tadd(ab3, u2), FieldCtx::tadd(u2, u3),
            FieldCtx::tadd(u1, u3)};
}

// The two nu routes: products of epsilons, and the theta form reduced with
// a bar(a) = 1 (nu1 = a^2 t2 + t1 + bar(a)^2 bar(t2), etc.).  Both are
// computed and compared; disagreement means an implementation bug.
inline NuSet nus(const FieldCtx& F, const CoeffTriple& c, TowerElt a) {
    EpsilonSet e = epsilons(F, c, a);
    TowerElt e1b = FieldCtx::bar(e.e1), e2b = FieldCtx::bar(e.e2), e3b = FieldCtx::bar(e.e3),
             e4b = FieldCtx::bar(e.e4);
    NuSet byEps{FieldCtx::tadd(F.tmul(e.e3, e3b), F.tmul(e1b, e.e1)),
                FieldCtx::tadd(F.tmul(e.e2, e3b), F.tmul(e4b, e.e1)),
                FieldCtx::tadd(F.tmul(e.e4, e3b), F.tmul(e2b, e.e1))};

    ThetaSet t = thetas(F, c);
    TowerElt a2 = F.tsqr(a);
    TowerElt ab2 = F.tsqr(FieldCtx::bar(a));
    TowerElt ab4 = F.tsqr(ab2);
    TowerElt t2b = FieldCtx::bar(t.t2);
    NuSet byTheta{
        FieldCtx::tadd(FieldCtx::tadd(F.tmul(a2, t.t2), t.t1), F.tmul(ab2, t2b)),
        FieldCtx::tadd(FieldCtx::tadd(t.t4, F.tmul(ab2, t2b)), F.tmul(ab4, t.t3)),
        FieldCtx::tadd(FieldCtx::tadd(F.tmul(a2, t.t2), FieldCtx::tadd(t.t1, t.t4)),
                       F.tmul(ab4, t.t3))};

    if (byEps.nu1 != byTheta.nu1 || byEps.nu2 != byTheta.nu2 || byEps.nu3 != byTheta.nu3)
        throw std::logic_error("nu computation routes disagree");
    return byEps;
}

inline PhiSet varphis(const FieldCtx& F, const ThetaSet& t) {
    if (!t.t1.in_subfield())
        throw std::invalid_argument("varphis requires theta1 in the subfield");
    TowerElt t2b = FieldCtx::bar(t.t2);
    TowerElt p1t = FieldCtx::tadd(t.t1, FieldCtx::tadd(t.t2, t2b));
    // theta2 + bar(theta2) = theta21, so phi1 is always subfield here
    PhiSet p;
    p.phi1 = p1t.x2;
    TowerElt kphi1 = FieldCtx::from_sub(F.mul(F.k(), p.phi1));
    p.phi2 = FieldCtx::tadd(kphi1, FieldCtx::tadd(F.tmul(F.omega(), t.t2), F.tmul(F.omega_bar(), t2b)));
    p.phi3 = FieldCtx::tadd(t.t3, FieldCtx::tadd(t2b, t.t4));
    TowerElt kphi3 = F.smul(F.k(), p.phi3);
    p.phi4 = FieldCtx::tadd(kphi3, FieldCtx::tadd(F.tmul(F.omega(), t.t4), F.tmul(F.omega_bar(), t.t3)));
    return p;
}

// Rational forms over the A-line (a^2 = (A+w)/(A+w+1)):
//   nu1 = (phi1 A^2 + theta1 A + phi2) / (A^2 + A + k)
//   nu2 = (phi3 A^2 + bar(theta2) A + phi4) / (A^2 + k + w)
inline bool nu_rational_check(const FieldCtx& F, const CoeffTriple& c, FldElt A) {
    TowerElt a = F.a_from_A(A);
    NuSet nu = nus(F, c, a);
    ThetaSet t = thetas(F, c);
    PhiSet p = varphis(F, t);

    FldElt A2 = F.sqr(A);
    TowerElt num1 = FieldCtx::tadd(F.smul(A2, FieldCtx::from_sub(p.phi1)),
                                   FieldCtx::tadd(F.smul(A, t.t1), p.phi2));
    FldElt den1 = FldElt(A2 ^ A ^ F.k()); // nonzero: the roots of Y^2+Y+k are w, w+1
    TowerElt nu1r = F.smul(F.inv(den1), num1);

    TowerElt num2 = FieldCtx::tadd(F.smul(A2, p.phi3),
                                   FieldCtx::tadd(F.smul(A, FieldCtx::bar(t.t2)), p.phi4));
    TowerElt den2{1, FldElt(A2 ^ F.k())}; // A^2 + k + w
    TowerElt nu2r = F.tmul(num2, F.tinv(den2));

    return nu.nu1 == nu1r && nu.nu2 == nu2r;
}

} // namespace apnquad
