#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>

#include <gmpxx.h>

namespace prpoint {

using Int = std::int64_t;
using Rational = mpq_class;
using BigInt = mpz_class;

/// n/d in lowest terms (mpq_class does not reduce on construction).
inline Rational make_rational(const BigInt& n, const BigInt& d) {
  Rational q(n, d);
  q.canonicalize();
  return q;
}

namespace modarith {

/// p^e, throwing if the result does not fit the 62-bit working range.
Int ipow(Int p, int e);
Int mulmod(Int a, Int b, Int m);
Int powmod(Int a, Int e, Int m);
/// Inverse of a modulo m; a must be coprime to m.
Int invmod(Int a, Int m);
/// Canonical residue in [0, m).
Int reduce(Int a, Int m);
Int reduce(const BigInt& a, Int m);
/// v_p(n) for n != 0.
int valuation(Int n, Int p);
int valuation(const BigInt& n, Int p);
/// Largest e with p^e < 2^62; the relative precision cap for prime p.
int max_precision(Int p);
bool is_prime(Int n);

}  // namespace modarith

/// An element of Q_p with capped relative precision.
///
/// A nonzero value is p^v * u with u a unit known modulo p^M (M is the
/// relative precision). Zero comes in two flavours: the exact zero, which
/// absorbs addition and annihilates multiplication, and an inexact zero
/// O(p^k) that only records an absolute precision.
class PadicNumber {
 public:
  PadicNumber() = default;

  /// The integer n to relative precision `prec` (capped at the prime's limit).
  PadicNumber(Int p, Int n, int prec);

  static PadicNumber exact_zero(Int p);
  /// The inexact zero O(p^absprec).
  static PadicNumber zero_mod(Int p, int absprec);
  /// p^val * unit with unit reduced modulo p^relprec. `unit` must be a p-unit.
  static PadicNumber from_unit(Int p, Int unit, int val, int relprec);
  static PadicNumber from_rational(Int p, const Rational& q, int relprec);
  /// An integer (or rational) with the maximal relative precision for p.
  static PadicNumber exact(Int p, Int n);
  static PadicNumber exact(Int p, const Rational& q);

  Int prime() const { return p_; }
  bool is_exact_zero() const { return zero_ && absprec_inf_; }
  /// True for both exact and inexact zero.
  bool is_zero() const { return zero_; }
  /// v_p; for an inexact zero this is its absolute precision.
  int valuation() const { return val_; }
  /// Relative precision (0 for zeros).
  int precision() const { return zero_ ? 0 : rel_; }
  int absolute_precision() const;
  Int unit() const { return unit_; }
  bool is_unit() const { return !zero_ && val_ == 0; }

  /// Representative in [0, p^absprec) for values of valuation >= 0.
  Int lift() const;
  /// Exact rational p^v * u with the stored representative of u.
  Rational to_rational() const;

  /// Reduce to absolute precision `absprec` (never increases precision).
  PadicNumber add_bigoh(int absprec) const;
  /// Reduce to relative precision `relprec`.
  PadicNumber with_relative_precision(int relprec) const;

  PadicNumber operator-() const;
  PadicNumber& operator+=(const PadicNumber& o);
  PadicNumber& operator-=(const PadicNumber& o);
  PadicNumber& operator*=(const PadicNumber& o);
  PadicNumber& operator/=(const PadicNumber& o);
  PadicNumber pow(long e) const;
  PadicNumber inverse() const;

  /// x == y to the precision both sides justify.
  bool equals(const PadicNumber& o) const;
  /// x == y modulo p^absprec (requires both known that far).
  bool congruent(const PadicNumber& o, int absprec) const;

  /// Digits rendering: `d0 + d1*p + ... + O(p^k)`; exact zero is `0`.
  std::string to_string() const;

 private:
  void normalize();

  Int p_ = 0;
  Int unit_ = 0;
  int val_ = 0;
  int rel_ = 0;
  bool zero_ = true;
  bool absprec_inf_ = true;
};

inline PadicNumber operator+(PadicNumber a, const PadicNumber& b) { return a += b; }
inline PadicNumber operator-(PadicNumber a, const PadicNumber& b) { return a -= b; }
inline PadicNumber operator*(PadicNumber a, const PadicNumber& b) { return a *= b; }
inline PadicNumber operator/(PadicNumber a, const PadicNumber& b) { return a /= b; }
PadicNumber operator*(const PadicNumber& a, Int n);
PadicNumber operator*(Int n, const PadicNumber& a);
PadicNumber operator+(const PadicNumber& a, Int n);
PadicNumber operator-(const PadicNumber& a, Int n);
PadicNumber operator+(Int n, const PadicNumber& a);
PadicNumber operator-(Int n, const PadicNumber& a);
PadicNumber operator/(const PadicNumber& a, Int n);
PadicNumber operator*(const PadicNumber& a, const Rational& q);

/// omega(a): the (p-1)-th root of unity congruent to a mod p.
PadicNumber teichmuller(Int a, Int p, int prec);
PadicNumber teichmuller(const PadicNumber& u);

/// Iwasawa logarithm (log p = 0) of a unit.
PadicNumber padic_log(const PadicNumber& u);
/// exp(t) for v_p(t) >= 1.
PadicNumber padic_exp(const PadicNumber& t);
/// Canonical square root (unit part in {1..(p-1)/2} mod p), if one exists.
std::optional<PadicNumber> padic_sqrt(const PadicNumber& x);

/// The unique a/b with |a| <= num_bound, 0 < b <= den_bound, p not dividing
/// b, and a/b == x to the absolute precision of x.
std::optional<Rational> rational_reconstruct(const PadicNumber& x, Int num_bound,
                                             Int den_bound);

/// Rational reconstruction of residue r modulo m (plain half-gcd walk).
std::optional<Rational> rational_reconstruct_mod(const BigInt& r, const BigInt& m,
                                                 const BigInt& num_bound,
                                                 const BigInt& den_bound);

/// Compact cache record: `Z` (exact zero), `O k` (zero mod p^k) or
/// `U v unit rel`.
std::string padic_record(const PadicNumber& x);
/// Reads one record written by padic_record; throws InvalidInput if corrupt.
PadicNumber read_padic_record(std::istream& in, Int p);

}  // namespace prpoint
