#pragma once

#include <string>
#include <vector>

#include "prpoint/curve.hpp"
#include "prpoint/modsym.hpp"

namespace prpoint {

/// A distribution on Z_p^x given by its values on the intervals a + p^n Z_p,
/// 0 <= n <= n_max, a a unit mod p^n (n = 0 is the whole unit ball).
///
/// The value on a + p^n Z_p is scale * level_scale[n] * raw[n][a], with
/// raw[n][a] a residue modulo p^precision. Non-unit slots of raw hold 0.
struct PadicMeasure {
  Int p = 0;
  int n_max = 0;
  int precision = 0;  // absolute precision of the raw residues
  int growth = 0;     // h: values on level n have valuation >= -h*n
  PadicNumber scale;
  std::vector<PadicNumber> level_scale;
  std::vector<std::vector<Int>> raw;

  PadicNumber value(Int a, int n) const;
  /// mu(Z_p^x).
  PadicNumber total() const { return value(0, 0); }
};

/// Sum of two measures on the same prime, depth and scales.
PadicMeasure operator+(const PadicMeasure& a, const PadicMeasure& b);

/// Smallest absolute precision at which the distribution relation
/// mu(a + p^n) = sum_b mu(a + b p^n + p^(n+1)) fails; INT_MAX if it holds to
/// the precision of every stored value.
int distribution_defect(const PadicMeasure& mu);

/// mu(a + p^n) = lambda^-n [a/p^n] - lambda^-(n+1) [a/p^(n-1)] with
/// [r] = c_cal * phi{r -> oo}. Requires a calibrated symbol and the unit root.
PadicMeasure stabilized_measure(const EigenSymbol& phi, const HeckeRoots& roots, int n_max, int M);
/// Same with an explicit root; a root of positive valuation raises SlopeError
/// (that measure is unbounded; use the overconvergent construction).
PadicMeasure stabilized_measure(const EigenSymbol& phi, const PadicNumber& lambda, int n_max, int M);

/// The character omega^k (conductor p unless (p - 1) | k).
struct TeichmullerCharacter {
  Int p = 0;
  int k = 0;
  bool trivial() const { return k % (p - 1) == 0; }
  PadicNumber operator()(Int a, int prec) const;
};

/// sum_{a mod p^r, p !| a} eta(a) a^(j-1) mu(a + p^r Z_p); r = 0 is the
/// total mass. Throws DepthError when r exceeds the measure depth.
PadicNumber twisted_moment(const PadicMeasure& mu, const TeichmullerCharacter& eta, int r, int j = 1);

/// L(s) = sum_j c_j (s - 1)^j around s = 1 in a fixed tame component omega^i.
struct LJet {
  Int p = 0;
  int center = 1;
  int tame = 0;
  std::vector<PadicNumber> coeffs;

  /// `1, [c0, c1, ...]`.
  std::string to_string() const;
};

/// c_j = (1/j!) int omega^tame(x) log_p<x>^j dmu by Riemann sums at depth
/// n_max. Needs n_max >= M + 2 (DepthError otherwise) and a bounded measure.
LJet lp_jet(const PadicMeasure& mu, int J, int M, int tame = 0);

/// Cauchy product of two jets at the same center.
LJet naive_base_change_jet(const LJet& f, const LJet& g);

/// A primitive root modulo p^n for odd p (n >= 1).
Int primitive_root_prime_power(Int p, int n);

}  // namespace prpoint
