#pragma once

#include "prpoint/curve.hpp"

namespace prpoint {

/// A double with an error bound that dominates the truncation error of the
/// series that produced it. `exact` marks values known exactly (e.g. zero
/// height of a torsion point).
struct RealScalar {
  double value = 0.0;
  double error = 0.0;
  bool exact = false;
};

/// Real roots of 4x^3 + b2 x^2 + 2 b4 x + b6, in decreasing order.
std::vector<double> real_two_torsion_x(const CurveQ& E);

/// Omega = integral of |dx/(2y + a1 x + a3)| over E(R).
RealScalar real_period(const CurveQ& E);

/// Sign w of the functional equation, read off the symmetry
/// g(1/t) = w t^2 g(t) of g(t) = sum a_n exp(-2 pi n t / sqrt N).
int functional_equation_sign(const CurveQ& E);

/// L'(E, 1) for a curve with root number -1. Throws WrongRankError otherwise.
RealScalar lprime_complex(const CurveQ& E, double truncation_factor = 20.0);

/// Canonical height, normalised so that hhat(P) = lim h(x(2^n P)) / 4^n with
/// h the log of the naive height of x (37a: hhat(0,0) = 0.0511...).
RealScalar neron_tate_height(const CurveQ& E, const PointQ& P);

/// Smallest m > 0 such that mP reduces to a nonsingular point at every bad prime.
long component_killer(const CurveQ& E, const PointQ& P);

struct CfResult {
  Rational c;             // reconstructed -L'(E,1) / (hhat(P) Omega)
  RealScalar raw;         // the float quotient before reconstruction
  Rational square_factor; // s^2 with c = s^2 c0 and c0 free of square denominators/numerators
};

/// c(f) for the rank-one curve E and the point P, reconstructed as a rational
/// with denominator at most 10^4.
CfResult compute_c_f(const CurveQ& E, const PointQ& P);

/// The unique rational with denominator <= max_den within `tol` of x.
/// Throws AmbiguousRational when there is none or more than one.
Rational reconstruct_real(double x, double tol, long max_den);

}  // namespace prpoint
