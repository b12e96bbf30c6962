#include "prpoint/padic.hpp"

#include <algorithm>
#include <climits>
#include <sstream>
#include <vector>

#include "prpoint/errors.hpp"

namespace prpoint {

namespace modarith {

namespace {
constexpr Int kLimit = Int{1} << 62;
}

Int ipow(Int p, int e) {
  if (e < 0) throw InvalidInput("ipow: negative exponent");
  Int r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > kLimit / p) throw PrecisionError("p^e exceeds the 62-bit working range");
    r *= p;
  }
  return r;
}

Int mulmod(Int a, Int b, Int m) {
  return static_cast<Int>((static_cast<__int128>(a) * b) % m);
}

Int reduce(Int a, Int m) {
  Int r = a % m;
  return r < 0 ? r + m : r;
}

Int reduce(const BigInt& a, Int m) {
  BigInt r = a % BigInt(static_cast<long>(m));
  if (r < 0) r += static_cast<long>(m);
  return static_cast<Int>(r.get_si());
}

Int powmod(Int a, Int e, Int m) {
  Int base = reduce(a, m);
  Int r = 1 % m;
  while (e > 0) {
    if (e & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    e >>= 1;
  }
  return r;
}

Int invmod(Int a, Int m) {
  Int r0 = m, r1 = reduce(a, m);
  Int t0 = 0, t1 = 1;
  while (r1 != 0) {
    Int q = r0 / r1;
    Int r2 = r0 - q * r1;
    r0 = r1;
    r1 = r2;
    __int128 t2 = static_cast<__int128>(t0) - static_cast<__int128>(q) * t1;
    t0 = t1;
    t1 = static_cast<Int>(t2 % m);
  }
  if (r0 != 1) throw InvalidInput("invmod: element not invertible");
  return reduce(t0, m);
}

int valuation(Int n, Int p) {
  if (n == 0) throw InvalidInput("valuation of zero");
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

int valuation(const BigInt& n, Int p) {
  if (n == 0) throw InvalidInput("valuation of zero");
  BigInt m = n;
  int v = 0;
  const BigInt bp(static_cast<long>(p));
  while (mpz_divisible_p(m.get_mpz_t(), bp.get_mpz_t())) {
    m /= bp;
    ++v;
  }
  return v;
}

int max_precision(Int p) {
  int e = 0;
  Int r = 1;
  while (r <= kLimit / p) {
    r *= p;
    ++e;
  }
  return e - 1;
}

bool is_prime(Int n) {
  if (n < 2) return false;
  for (Int d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace modarith

using namespace modarith;

namespace {

void check_prime(Int p) {
  if (p < 3 || p % 2 == 0) throw InvalidInput("p-adic prime must be odd and >= 3");
}

void same_prime(Int a, Int b) {
  if (a != b) throw InvalidInput("p-adic arithmetic across different primes");
}

}  // namespace

PadicNumber::PadicNumber(Int p, Int n, int prec) : p_(p) {
  check_prime(p);
  if (n == 0) return;
  zero_ = false;
  absprec_inf_ = false;
  val_ = modarith::valuation(n, p);
  Int u = n;
  for (int i = 0; i < val_; ++i) u /= p;
  rel_ = std::clamp(prec, 1, max_precision(p));
  unit_ = reduce(u, ipow(p, rel_));
}

PadicNumber PadicNumber::exact_zero(Int p) {
  check_prime(p);
  PadicNumber z;
  z.p_ = p;
  return z;
}

PadicNumber PadicNumber::zero_mod(Int p, int absprec) {
  check_prime(p);
  PadicNumber z;
  z.p_ = p;
  z.zero_ = true;
  z.absprec_inf_ = false;
  z.val_ = absprec;
  return z;
}

PadicNumber PadicNumber::from_unit(Int p, Int unit, int val, int relprec) {
  check_prime(p);
  if (relprec <= 0) return zero_mod(p, val);
  PadicNumber x;
  x.p_ = p;
  x.zero_ = false;
  x.absprec_inf_ = false;
  x.rel_ = std::min(relprec, max_precision(p));
  x.val_ = val;
  x.unit_ = reduce(unit, ipow(p, x.rel_));
  x.normalize();
  return x;
}

PadicNumber PadicNumber::from_rational(Int p, const Rational& q, int relprec) {
  check_prime(p);
  if (q == 0) return exact_zero(p);
  const int vn = modarith::valuation(q.get_num(), p);
  const int vd = modarith::valuation(q.get_den(), p);
  BigInt num = q.get_num(), den = q.get_den();
  const BigInt bp(static_cast<long>(p));
  for (int i = 0; i < vn; ++i) num /= bp;
  for (int i = 0; i < vd; ++i) den /= bp;
  const int rel = std::clamp(relprec, 1, max_precision(p));
  const Int m = ipow(p, rel);
  const Int u = mulmod(reduce(num, m), invmod(reduce(den, m), m), m);
  return from_unit(p, u, vn - vd, rel);
}

PadicNumber PadicNumber::exact(Int p, Int n) { return PadicNumber(p, n, max_precision(p)); }

PadicNumber PadicNumber::exact(Int p, const Rational& q) {
  return from_rational(p, q, max_precision(p));
}

int PadicNumber::absolute_precision() const {
  if (zero_) return absprec_inf_ ? INT_MAX : val_;
  return val_ + rel_;
}

void PadicNumber::normalize() {
  if (zero_) return;
  if (unit_ == 0) {
    *this = zero_mod(p_, val_ + rel_);
    return;
  }
  while (unit_ % p_ == 0) {
    unit_ /= p_;
    ++val_;
    --rel_;
  }
  if (rel_ <= 0) *this = zero_mod(p_, val_);
}

Int PadicNumber::lift() const {
  if (zero_) return 0;
  if (val_ < 0) throw InvalidInput("lift of a non-integral p-adic number");
  return unit_ * ipow(p_, val_);
}

Rational PadicNumber::to_rational() const {
  if (zero_) return 0;
  Rational r(static_cast<long>(unit_));
  BigInt pv;
  mpz_ui_pow_ui(pv.get_mpz_t(), static_cast<unsigned long>(p_),
                static_cast<unsigned long>(std::abs(val_)));
  if (val_ >= 0)
    r *= pv;
  else
    r /= pv;
  return r;
}

PadicNumber PadicNumber::add_bigoh(int absprec) const {
  if (absprec >= absolute_precision()) return *this;
  if (zero_ || absprec <= val_) return zero_mod(p_, absprec);
  return from_unit(p_, unit_, val_, absprec - val_);
}

PadicNumber PadicNumber::with_relative_precision(int relprec) const {
  if (zero_ || relprec >= rel_) return *this;
  return from_unit(p_, unit_, val_, relprec);
}

PadicNumber PadicNumber::operator-() const {
  if (zero_) return *this;
  PadicNumber r = *this;
  r.unit_ = reduce(-unit_, ipow(p_, rel_));
  return r;
}

PadicNumber& PadicNumber::operator+=(const PadicNumber& o) {
  if (o.p_ == 0) return *this;
  if (p_ == 0) return *this = o;
  same_prime(p_, o.p_);
  if (o.is_exact_zero()) return *this;
  if (is_exact_zero()) return *this = o;
  const int abs = std::min(absolute_precision(), o.absolute_precision());
  if (zero_) return *this = o.add_bigoh(abs);
  if (o.zero_) return *this = add_bigoh(abs);
  const int v = std::min(val_, o.val_);
  if (abs <= v) return *this = zero_mod(p_, abs);
  const int k = abs - v;
  const Int m = ipow(p_, k);
  auto part = [&](const PadicNumber& x) -> Int {
    if (x.val_ - v >= k) return 0;
    return mulmod(reduce(x.unit_, m), ipow(p_, x.val_ - v), m);
  };
  const Int s = reduce(part(*this) + part(o), m);
  if (s == 0) return *this = zero_mod(p_, abs);
  unit_ = s;
  val_ = v;
  rel_ = k;
  normalize();
  return *this;
}

PadicNumber& PadicNumber::operator-=(const PadicNumber& o) { return *this += -o; }

PadicNumber& PadicNumber::operator*=(const PadicNumber& o) {
  same_prime(p_, o.p_);
  if (is_exact_zero() || o.is_exact_zero()) return *this = exact_zero(p_);
  if (zero_ || o.zero_) return *this = zero_mod(p_, val_ + o.val_);
  const int rel = std::min(rel_, o.rel_);
  const Int m = ipow(p_, rel);
  unit_ = mulmod(reduce(unit_, m), reduce(o.unit_, m), m);
  rel_ = rel;
  val_ += o.val_;
  return *this;
}

PadicNumber PadicNumber::inverse() const {
  if (is_exact_zero()) throw InvalidInput("division by exact zero");
  if (zero_) throw PrecisionError("division by an inexact zero");
  return from_unit(p_, invmod(unit_, ipow(p_, rel_)), -val_, rel_);
}

PadicNumber& PadicNumber::operator/=(const PadicNumber& o) {
  same_prime(p_, o.p_);
  if (o.is_exact_zero()) throw InvalidInput("division by exact zero");
  if (o.zero_) throw PrecisionError("division by an inexact zero");
  if (is_exact_zero()) return *this;
  if (zero_) return *this = zero_mod(p_, val_ - o.val_);
  return *this *= o.inverse();
}

PadicNumber PadicNumber::pow(long e) const {
  if (e < 0) return inverse().pow(-e);
  PadicNumber result = exact(p_, 1);
  if (e == 0) return zero_ ? result : result.with_relative_precision(rel_);
  PadicNumber base = *this;
  while (e > 0) {
    if (e & 1) result *= base;
    e >>= 1;
    if (e) base *= base;
  }
  return result;
}

bool PadicNumber::equals(const PadicNumber& o) const { return (*this - o).is_zero(); }

bool PadicNumber::congruent(const PadicNumber& o, int absprec) const {
  const PadicNumber d = *this - o;
  if (d.is_exact_zero()) return true;
  return d.valuation() >= absprec;
}

std::string PadicNumber::to_string() const {
  if (is_exact_zero()) return "0";
  std::ostringstream out;
  auto power = [&](int e) {
    std::ostringstream s;
    if (e == 1)
      s << p_;
    else
      s << p_ << '^' << e;
    return s.str();
  };
  bool first = true;
  if (!zero_) {
    Int u = unit_;
    for (int i = 0; i < rel_; ++i) {
      const Int d = u % p_;
      u /= p_;
      if (d == 0) continue;
      if (!first) out << " + ";
      first = false;
      const int e = val_ + i;
      if (e == 0)
        out << d;
      else
        out << d << '*' << power(e);
    }
  }
  if (!first) out << " + ";
  out << "O(" << p_ << '^' << absolute_precision() << ')';
  return out.str();
}

PadicNumber operator*(const PadicNumber& a, Int n) {
  return a * PadicNumber::exact(a.prime(), n);
}
PadicNumber operator*(Int n, const PadicNumber& a) { return a * n; }
PadicNumber operator+(const PadicNumber& a, Int n) {
  return a + PadicNumber::exact(a.prime(), n);
}
PadicNumber operator-(const PadicNumber& a, Int n) {
  return a - PadicNumber::exact(a.prime(), n);
}
PadicNumber operator+(Int n, const PadicNumber& a) { return a + n; }
PadicNumber operator-(Int n, const PadicNumber& a) {
  return PadicNumber::exact(a.prime(), n) - a;
}
PadicNumber operator/(const PadicNumber& a, Int n) {
  return a / PadicNumber::exact(a.prime(), n);
}
PadicNumber operator*(const PadicNumber& a, const Rational& q) {
  return a * PadicNumber::exact(a.prime(), q);
}

PadicNumber teichmuller(Int a, Int p, int prec) {
  check_prime(p);
  if (reduce(a, p) == 0) throw InvalidInput("teichmuller: argument divisible by p");
  prec = std::clamp(prec, 1, max_precision(p));
  const Int m = ipow(p, prec);
  Int x = reduce(a, m);
  for (int i = 0; i < prec; ++i) x = powmod(x, p, m);
  return PadicNumber::from_unit(p, x, 0, prec);
}

PadicNumber teichmuller(const PadicNumber& u) {
  if (!u.is_unit()) throw InvalidInput("teichmuller: argument must be a unit");
  return teichmuller(u.unit(), u.prime(), u.precision());
}

namespace {

// floor(log_p n)
int floor_log(Int n, Int p) {
  int e = 0;
  while (n >= p) {
    n /= p;
    ++e;
  }
  return e;
}

}  // namespace

PadicNumber padic_log(const PadicNumber& u) {
  if (!u.is_unit()) throw InvalidInput("padic_log: argument must be a unit");
  const Int p = u.prime();
  const int prec = u.absolute_precision();
  const PadicNumber x = u / teichmuller(u) - 1;
  if (x.is_zero()) return PadicNumber::zero_mod(p, std::min(prec, x.absolute_precision()));
  const int vx = x.valuation();
  PadicNumber sum = PadicNumber::zero_mod(p, prec);
  PadicNumber power = x;
  for (Int n = 1; n * vx - floor_log(n, p) < prec; ++n) {
    const PadicNumber term = power / n;
    sum += (n % 2 == 1) ? term : -term;
    power *= x;
  }
  return sum;
}

PadicNumber padic_exp(const PadicNumber& t) {
  const Int p = t.prime();
  if (t.is_exact_zero()) return PadicNumber::exact(p, 1);
  const int prec = t.absolute_precision();
  if (t.is_zero()) return PadicNumber::exact(p, 1).add_bigoh(prec);
  if (t.valuation() < 1) throw DivergenceError("padic_exp: argument must have valuation >= 1");
  const int vt = t.valuation();
  PadicNumber sum = PadicNumber::exact(p, 1).add_bigoh(prec);
  PadicNumber term = PadicNumber::exact(p, 1);
  for (Int n = 1;; ++n) {
    // v(t^n/n!) >= n*v - (n-1)/(p-1)
    if (n * vt - (n - 1) / (p - 1) >= prec + 1) break;
    term = term * t / n;
    sum += term;
  }
  return sum;
}

std::optional<PadicNumber> padic_sqrt(const PadicNumber& x) {
  const Int p = x.prime();
  if (x.is_exact_zero()) return x;
  if (x.is_zero()) return PadicNumber::zero_mod(p, x.valuation() / 2);
  if (x.valuation() % 2 != 0) return std::nullopt;
  const Int u0 = reduce(x.unit(), p);
  if (powmod(u0, (p - 1) / 2, p) != 1) return std::nullopt;
  Int r = 1;
  while (mulmod(r, r, p) != u0) ++r;
  if (r > (p - 1) / 2) r = p - r;
  const int rel = x.precision();
  const Int m = ipow(p, rel);
  const Int u = reduce(x.unit(), m);
  const Int half = invmod(2, m);
  for (int i = 0; (1 << i) < 2 * rel + 2; ++i) {
    r = mulmod(reduce(r + mulmod(u, invmod(r, m), m), m), half, m);
  }
  return PadicNumber::from_unit(p, r, x.valuation() / 2, rel);
}

std::optional<Rational> rational_reconstruct_mod(const BigInt& r, const BigInt& m,
                                                 const BigInt& num_bound,
                                                 const BigInt& den_bound) {
  BigInt r0 = m, r1 = r % m;
  if (r1 < 0) r1 += m;
  BigInt s0 = 0, s1 = 1;
  while (r1 > num_bound) {
    const BigInt q = r0 / r1;
    BigInt t = r0 - q * r1;
    r0 = r1;
    r1 = t;
    t = s0 - q * s1;
    s0 = s1;
    s1 = t;
  }
  if (s1 == 0) return std::nullopt;
  BigInt a = r1, b = s1;
  if (b < 0) {
    a = -a;
    b = -b;
  }
  if (b > den_bound || abs(a) > num_bound) return std::nullopt;
  BigInt g;
  mpz_gcd(g.get_mpz_t(), b.get_mpz_t(), m.get_mpz_t());
  if (g != 1) return std::nullopt;
  BigInt check = (a - b * r) % m;
  if (check != 0) return std::nullopt;
  return make_rational(a, b);
}

std::optional<Rational> rational_reconstruct(const PadicNumber& x, Int num_bound,
                                             Int den_bound) {
  if (num_bound < 0 || den_bound < 1) throw InvalidInput("rational_reconstruct: bad bounds");
  const Int p = x.prime();
  if (x.is_exact_zero()) return Rational(0);
  int shift = 0;
  if (!x.is_zero() && x.valuation() < 0) shift = -x.valuation();
  const int abs = x.absolute_precision() + shift;
  BigInt modulus;
  mpz_ui_pow_ui(modulus.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(abs));
  BigInt pshift;
  mpz_ui_pow_ui(pshift.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(shift));
  const BigInt nb(static_cast<long>(num_bound));
  BigInt db(static_cast<long>(den_bound));
  if (2 * nb * db >= modulus) throw InvalidInput("rational_reconstruct: 2*N*D must be below p^M");
  if (shift > 0) {
    db /= pshift;
    if (db < 1) return std::nullopt;
  }
  if (x.is_zero()) return Rational(0);
  BigInt residue;
  {
    BigInt pv;
    mpz_ui_pow_ui(pv.get_mpz_t(), static_cast<unsigned long>(p),
                  static_cast<unsigned long>(x.valuation() + shift));
    residue = BigInt(static_cast<long>(x.unit())) * pv;
  }
  auto r = rational_reconstruct_mod(residue, modulus, nb, db);
  if (!r) return std::nullopt;
  Rational q = *r / Rational(pshift);
  q.canonicalize();
  return q;
}

std::string padic_record(const PadicNumber& x) {
  std::ostringstream out;
  if (x.is_exact_zero())
    out << "Z";
  else if (x.is_zero())
    out << "O " << x.absolute_precision();
  else
    out << "U " << x.valuation() << ' ' << x.unit() << ' ' << x.precision();
  return out.str();
}

PadicNumber read_padic_record(std::istream& in, Int p) {
  std::string tag;
  in >> tag;
  if (tag == "Z") return PadicNumber::exact_zero(p);
  if (tag == "O") {
    int k = 0;
    in >> k;
    return PadicNumber::zero_mod(p, k);
  }
  if (tag == "U") {
    int v = 0, rel = 0;
    Int u = 0;
    in >> v >> u >> rel;
    if (!in || u % p == 0) throw InvalidInput("corrupt p-adic field");
    return PadicNumber::from_unit(p, u, v, rel);
  }
  throw InvalidInput("corrupt p-adic field");
}


}  // namespace prpoint
