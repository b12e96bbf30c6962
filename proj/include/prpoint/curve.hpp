#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "prpoint/padic.hpp"

namespace prpoint {

/// A rational elliptic curve given by a globally minimal Weierstrass model.
class CurveQ {
 public:
  /// Validates the discriminant, the conductor against the bad primes of the
  /// discriminant, and minimality at every bad prime >= 5.
  CurveQ(std::array<Int, 5> a, Int conductor);

  /// Parses `a1,a2,a3,a4,a6`.
  static CurveQ parse(const std::string& ainvs, Int conductor);

  const std::array<Int, 5>& ainvs() const { return a_; }
  Int a1() const { return a_[0]; }
  Int a2() const { return a_[1]; }
  Int a3() const { return a_[2]; }
  Int a4() const { return a_[3]; }
  Int a6() const { return a_[4]; }
  Int conductor() const { return conductor_; }

  const BigInt& b2() const { return b2_; }
  const BigInt& b4() const { return b4_; }
  const BigInt& b6() const { return b6_; }
  const BigInt& b8() const { return b8_; }
  const BigInt& c4() const { return c4_; }
  const BigInt& c6() const { return c6_; }
  const BigInt& discriminant() const { return disc_; }
  /// Primes dividing the conductor.
  const std::vector<Int>& bad_primes() const { return bad_primes_; }
  bool has_good_reduction(Int ell) const { return conductor_ % ell != 0; }

  std::string to_string() const;

 private:
  std::array<Int, 5> a_;
  Int conductor_;
  BigInt b2_, b4_, b6_, b8_, c4_, c6_, disc_;
  std::vector<Int> bad_primes_;
};

/// A rational point, or the point at infinity.
struct PointQ {
  bool infinity = true;
  Rational x, y;

  static PointQ at_infinity() { return {}; }
  static PointQ affine(Rational x, Rational y) { return {false, std::move(x), std::move(y)}; }
  /// `x_num/x_den,y_num/y_den` (denominators of 1 may be omitted) or `inf`.
  static PointQ parse(const std::string& text);
  std::string to_string() const;
  bool operator==(const PointQ& o) const;
};

bool on_curve(const CurveQ& E, const PointQ& P);
PointQ negate(const CurveQ& E, const PointQ& P);
PointQ add(const CurveQ& E, const PointQ& P, const PointQ& Q);
PointQ multiply(const CurveQ& E, const PointQ& P, long n);
/// Torsion test through Mazur's bound (order <= 12).
bool is_torsion(const CurveQ& E, const PointQ& P);
/// log max(|num x|, den x); zero at infinity.
double naive_log_height(const PointQ& P);

/// True when P reduces to a nonsingular point modulo ell.
bool nonsingular_mod(const CurveQ& E, const PointQ& P, Int ell);

/// a_ell = ell + 1 - #E(F_ell) for ell of good reduction.
Int count_points_ap(const CurveQ& E, Int ell);
/// #E~(F_ell) counted on the (possibly singular) reduction.
Int count_points(const CurveQ& E, Int ell);
/// Dirichlet coefficients a_1..a_n of L(E, s).
std::vector<Int> dirichlet_coefficients(const CurveQ& E, Int n);

/// Roots of X^2 - a_p X + p: the unit root alpha and beta = p/alpha.
struct HeckeRoots {
  Int p = 0;
  Int ap = 0;
  PadicNumber alpha;
  PadicNumber beta;
  int precision = 0;
};

HeckeRoots hecke_roots(const CurveQ& E, Int p, int prec);

/// Coefficient tables of the formal group in the parameter t = -x/y, all
/// exact rationals truncated at degree `length`.
struct FormalGroup {
  int length = 0;
  std::vector<Rational> omega;  // omega = sum omega[n] t^n dt
  std::vector<Rational> log;    // log(t) = sum log[n] t^n
  std::vector<Rational> inv_w;  // t^3 / w(t) = sum inv_w[n] t^n
};

FormalGroup formal_group(const CurveQ& E, int length);

/// A point of E(Q_p) in affine coordinates, or infinity.
struct PadicPoint {
  bool infinity = true;
  PadicNumber x, y;
};

PadicPoint add(const CurveQ& E, const PadicPoint& P, const PadicPoint& Q);
PadicPoint to_padic(const PointQ& P, Int p, int prec);

/// log_omega(P) := lambda(n P) / n, with n = #E~(F_p) * p^e placing nP in the
/// formal group. Zero on torsion.
PadicNumber formal_group_log(const CurveQ& E, const PointQ& P, Int p, int prec);

/// The formal-group point (t = -x/y) with logarithm z; requires v_p(z) >= 1.
PadicPoint formal_point(const CurveQ& E, const PadicNumber& z);

/// Finds a rational point Q with log_omega(Q) = t. Candidates are
/// exp(t) + T over the torsion lifts T of E~(F_p); x(Q) must reconstruct with
/// numerator and denominator bounded by height_bound.
std::optional<PointQ> point_from_log(const CurveQ& E, const PadicNumber& t, Int p, int prec,
                                     Int height_bound);

/// A rational point Q with log_omega(Q) = index * t.
struct IndexedPoint {
  PointQ point;
  Int index = 1;
};

/// point_from_log that also works at anomalous primes: with p^a the p-part of
/// #E~(F_p) it reconstructs the point of logarithm p^a t (index p^a), since
/// dividing by p in E(Q_p) is not available by reconstruction. index = 1 at
/// non-anomalous primes.
std::optional<IndexedPoint> recover_point(const CurveQ& E, const PadicNumber& t, Int p, int prec,
                                          Int height_bound);

/// Smallest-height non-torsion point with x = a/b^2, |a| <= bound, b^2 <= bound.
std::optional<PointQ> search_generator(const CurveQ& E, Int naive_height_bound);

}  // namespace prpoint
