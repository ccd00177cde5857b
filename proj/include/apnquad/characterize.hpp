// characterize.hpp
//
// Membership tests for the coefficient sets Gamma1 / Gamma2 (APN
// characterization) and Gamma (permutation characterization), the main
// theorem verdict, and the equivalent pre-simplification form.  All Gamma
// polynomials are evaluated division-free, exactly as written.

#pragma once

#include "apnquad/field.hpp"
#include "apnquad/quad.hpp"

#include <stdexcept>

namespace apnquad {

struct GammaVerdict {
    bool theta1_nonzero = false;
    int trace_term = 0; // tr(theta2 bar(theta2) / theta1^2), meaningful when theta1 != 0
    bool gamma1_poly_zero = false;
    bool gamma2_poly_zero = false;
    bool in_gamma1 = false;
    bool in_gamma2 = false;
    bool in_gamma_perm = false;
};

namespace detail {

// trace of a value that must be bar-fixed; misuse of tr on a proper tower
// element is the transcription-bug class this guards against
inline int tr_checked(const FieldCtx& F, TowerElt v) {
    if (!v.in_subfield())
        throw std::logic_error("trace argument is not bar-fixed");
    return F.tr(v.x2);
}

// theta1^2 theta4 + theta1 theta2 bar(theta2) + theta2^2 theta3 + bar(theta2)^2 bar(theta3),
// a bar-fixed value, returned as a subfield scalar
inline FldElt gamma1_poly(const FieldCtx& F, const ThetaSet& t) {
    FldElt s1 = t.t1.x2, s4 = t.t4.x2;
    TowerElt g = F.tmul(F.tsqr(t.t2), t.t3);
    // g + bar(g) equals the w-coordinate of g as a subfield value
    return FldElt(F.mul(F.sqr(s1), s4) ^ F.mul(s1, F.norm(t.t2)) ^ g.x1);
}

// theta1^2 theta3 + theta1 bar(theta2)^2 + theta2^2 theta3 + bar(theta2)^2 bar(theta3)
inline TowerElt gamma2_poly(const FieldCtx& F, const ThetaSet& t) {
    FldElt s1 = t.t1.x2;
    TowerElt g = F.tmul(F.tsqr(t.t2), t.t3);
    TowerElt r = F.smul(F.sqr(s1), t.t3);
    r = FieldCtx::tadd(r, F.smul(s1, F.tsqr(FieldCtx::bar(t.t2))));
    r = FieldCtx::tadd(r, FieldCtx::from_sub(g.x1));
    return r;
}

} // namespace detail

inline GammaVerdict gamma_verdict(const FieldCtx& F, const ThetaSet& t) {
    if (!t.t1.in_subfield() || !t.t4.in_subfield())
        throw std::invalid_argument("gamma predicates need thetas of a normalized triple");
    GammaVerdict v;
    FldElt s1 = t.t1.x2;
    v.theta1_nonzero = s1 != 0;
    if (v.theta1_nonzero) {
        FldElt i1 = F.inv(s1);
        v.trace_term = F.tr(F.mul(F.norm(t.t2), F.sqr(i1)));
    }
    v.gamma1_poly_zero = detail::gamma1_poly(F, t) == 0;
    v.gamma2_poly_zero = detail::gamma2_poly(F, t).is_zero();
    bool common = v.theta1_nonzero && v.trace_term == 0;
    v.in_gamma1 = common && v.gamma1_poly_zero;
    v.in_gamma2 = common && v.gamma2_poly_zero;
    if (v.theta1_nonzero) {
        // tr(theta4 / theta1) = 1 and theta2^2 = theta1 bar(theta3)
        TowerElt q = FieldCtx::from_sub(F.div(t.t4.x2, s1));
        int trq = detail::tr_checked(F, q);
        v.in_gamma_perm = trq == 1 && F.tsqr(t.t2) == F.smul(s1, FieldCtx::bar(t.t3));
    }
    return v;
}

inline bool in_gamma1(const FieldCtx& F, const ThetaSet& t) { return gamma_verdict(F, t).in_gamma1; }
inline bool in_gamma2(const FieldCtx& F, const ThetaSet& t) { return gamma_verdict(F, t).in_gamma2; }
inline bool in_gamma_perm(const FieldCtx& F, const ThetaSet& t) {
    return gamma_verdict(F, t).in_gamma_perm;
}

// Theorem verdict: m even -> Gamma1 or Gamma2; m odd -> Gamma1.
// Stated for m >= 4; callers may apply it at m = 3 for comparison, in which
// case reports must tag the result as out of theorem range.
inline bool theorem_verdict(const FieldCtx& F, const CoeffTriple& c) {
    GammaVerdict v = gamma_verdict(F, thetas(F, c));
    return (F.m() % 2 == 0) ? (v.in_gamma1 || v.in_gamma2) : v.in_gamma1;
}

// The end-of-proof form, with the phi1 phi2 != 0 condition still present.
// Must agree with theorem_verdict everywhere; the agreement operationalizes
// the final simplification step that deletes phi1 phi2 != 0.
inline bool final_form_verdict(const FieldCtx& F, const CoeffTriple& c) {
    ThetaSet t = thetas(F, c);
    FldElt s1 = t.t1.x2;
    if (s1 == 0)
        return false;
    PhiSet p = varphis(F, t);
    if (p.phi1 == 0 || p.phi2.is_zero())
        return false;
    if (F.tr(F.mul(F.norm(t.t2), F.sqr(F.inv(s1)))) != 0)
        return false;
    bool p1 = detail::gamma1_poly(F, t) == 0;
    if (F.m() % 2 != 0)
        return p1;
    return p1 || detail::gamma2_poly(F, t).is_zero();
}

} // namespace apnquad
