#pragma once

#include <vector>

#include "prpoint/crystalline.hpp"

namespace prpoint {

/// The canonical p-adic sigma function as an odd series in the formal
/// logarithm z: sigma(z) = z + ..., with -(log sigma)'' = x(z) + (b2 - e2)/12.
struct SigmaSeries {
  Int p = 0;
  int precision = 0;
  int length = 0;  // coefficients of z^0 .. z^(length-1)
  PadicNumber e2;
  std::vector<PadicNumber> coeffs;

  /// Sum of the truncated series at z (v_p(z) >= 1).
  PadicNumber operator()(const PadicNumber& z) const;
};

/// Solves the defining equation of sigma with the given e2 to length L.
/// Raises ConsistencyError if the series fails to be odd.
SigmaSeries padic_sigma(const CurveQ& E, Int p, const PadicNumber& e2, int M, int L);

/// Length of sigma needed to evaluate at v_p(z) >= 1 to absolute precision M.
int sigma_length(Int p, int M);

/// Smallest valid auxiliary multiple: lcm of the component killer at the bad
/// primes and #E~(F_p), so that m P is everywhere nonsingular and lies in the
/// formal group at p.
long height_multiplier(const CurveQ& E, const PointQ& P, Int p);

/// The unit-root cyclotomic p-adic height
///   h_alpha(P) = (2/m^2) log_p(sigma(z(mP)) / d(mP)),  x(mP) = a/d^2,
/// for an ordinary prime p. The factor 2 and the sign match the Neron-Tate
/// normalization used for c(f) (hhat(37a, (0,0)) = 0.0511...).
/// multiplier = 0 picks height_multiplier; any other value must be a
/// multiple of it. Torsion points give an exact zero.
PadicNumber height_alpha(const CurveQ& E, const PointQ& P, Int p, int M, long multiplier = 0);

/// Same with a precomputed sigma series (its prime must be p).
PadicNumber height_alpha(const CurveQ& E, const PointQ& P, const SigmaSeries& sigma, int M,
                         long multiplier = 0);

/// sigma for height_alpha at precision M (Frobenius, e2, and the series).
SigmaSeries height_sigma(const CurveQ& E, Int p, int M);

}  // namespace prpoint
