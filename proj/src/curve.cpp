#include "prpoint/curve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "prpoint/errors.hpp"

namespace prpoint {

using namespace modarith;

namespace {

std::vector<Int> prime_factors(Int n) {
  std::vector<Int> out;
  n = std::abs(n);
  for (Int d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

bool is_zero(const Rational& q) { return q == 0; }
bool is_zero(const PadicNumber& x) { return x.is_zero(); }

// Group law on a general Weierstrass model, shared by the rational and the
// p-adic point types.
template <class Point, class Field>
Point add_generic(const std::array<Field, 5>& a, const Point& P, const Point& Q) {
  if (P.infinity) return Q;
  if (Q.infinity) return P;
  const Field& a1 = a[0];
  const Field& a2 = a[1];
  const Field& a3 = a[2];
  const Field& a4 = a[3];
  const Field& a6 = a[4];
  Field lambda, nu;
  if (is_zero(Field(P.x - Q.x))) {
    const Field s = P.y + Q.y + a1 * Q.x + a3;
    if (is_zero(s)) return Point{};
    const Field den = P.y + P.y + a1 * P.x + a3;
    const Field xx = P.x * P.x;
    const Field a2x = a2 * P.x;
    lambda = (xx + xx + xx + a2x + a2x + a4 - a1 * P.y) / den;
    nu = (-(xx * P.x) + a4 * P.x + a6 + a6 - a3 * P.y) / den;
  } else {
    const Field dx = Q.x - P.x;
    lambda = (Q.y - P.y) / dx;
    nu = (P.y * Q.x - Q.y * P.x) / dx;
  }
  Point R;
  R.infinity = false;
  R.x = lambda * lambda + a1 * lambda - a2 - P.x - Q.x;
  R.y = -(lambda + a1) * R.x - nu - a3;
  return R;
}

std::array<Rational, 5> rational_ainvs(const CurveQ& E) {
  std::array<Rational, 5> a;
  for (int i = 0; i < 5; ++i) a[i] = Rational(static_cast<long>(E.ainvs()[i]));
  return a;
}

}  // namespace

CurveQ::CurveQ(std::array<Int, 5> a, Int conductor) : a_(a), conductor_(conductor) {
  if (conductor < 1) throw InvalidInput("conductor must be positive");
  const BigInt a1 = static_cast<long>(a[0]), a2 = static_cast<long>(a[1]),
               a3 = static_cast<long>(a[2]), a4 = static_cast<long>(a[3]),
               a6 = static_cast<long>(a[4]);
  b2_ = a1 * a1 + 4 * a2;
  b4_ = 2 * a4 + a1 * a3;
  b6_ = a3 * a3 + 4 * a6;
  b8_ = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
  c4_ = b2_ * b2_ - 24 * b4_;
  c6_ = -b2_ * b2_ * b2_ + 36 * b2_ * b4_ - 216 * b6_;
  disc_ = -b2_ * b2_ * b8_ - 8 * b4_ * b4_ * b4_ - 27 * b6_ * b6_ + 9 * b2_ * b4_ * b6_;
  if (disc_ == 0) throw InvalidInput("singular Weierstrass model (discriminant 0)");
  bad_primes_ = prime_factors(conductor);
  BigInt rest = abs(disc_);
  for (Int ell : bad_primes_) {
    const BigInt bl(static_cast<long>(ell));
    if (!mpz_divisible_p(disc_.get_mpz_t(), bl.get_mpz_t()))
      throw InvalidInput("conductor prime " + std::to_string(ell) + " does not divide the discriminant");
    while (mpz_divisible_p(rest.get_mpz_t(), bl.get_mpz_t())) rest /= bl;
    if (ell >= 5 && valuation(disc_, ell) >= 12 && (c4_ == 0 || valuation(c4_, ell) >= 4))
      throw InvalidInput("model is not minimal at " + std::to_string(ell));
  }
  if (rest != 1)
    throw InvalidInput("discriminant has prime factors outside the conductor (model not minimal or wrong N)");
}

CurveQ CurveQ::parse(const std::string& ainvs, Int conductor) {
  std::array<Int, 5> a{};
  std::stringstream in(ainvs);
  std::string item;
  int i = 0;
  while (std::getline(in, item, ',')) {
    if (i >= 5) throw InvalidInput("expected five a-invariants");
    try {
      size_t used = 0;
      a[i] = std::stoll(item, &used);
      if (used != item.size()) throw InvalidInput("bad a-invariant '" + item + "'");
    } catch (const std::logic_error&) {
      throw InvalidInput("bad a-invariant '" + item + "'");
    }
    ++i;
  }
  if (i != 5) throw InvalidInput("expected five a-invariants");
  return CurveQ(a, conductor);
}

std::string CurveQ::to_string() const {
  std::ostringstream out;
  out << '[' << a_[0] << ',' << a_[1] << ',' << a_[2] << ',' << a_[3] << ',' << a_[4]
      << "] N=" << conductor_;
  return out.str();
}

PointQ PointQ::parse(const std::string& text) {
  if (text == "inf") return at_infinity();
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw InvalidInput("point must be 'x,y' or 'inf'");
  try {
    Rational x(text.substr(0, comma)), y(text.substr(comma + 1));
    x.canonicalize();
    y.canonicalize();
    return affine(x, y);
  } catch (const std::invalid_argument&) {
    throw InvalidInput("bad point coordinates '" + text + "'");
  }
}

std::string PointQ::to_string() const {
  if (infinity) return "inf";
  return x.get_str() + "," + y.get_str();
}

bool PointQ::operator==(const PointQ& o) const {
  if (infinity || o.infinity) return infinity == o.infinity;
  return x == o.x && y == o.y;
}

bool on_curve(const CurveQ& E, const PointQ& P) {
  if (P.infinity) return true;
  const auto a = rational_ainvs(E);
  const Rational lhs = P.y * P.y + a[0] * P.x * P.y + a[2] * P.y;
  const Rational rhs = P.x * P.x * P.x + a[1] * P.x * P.x + a[3] * P.x + a[4];
  return lhs == rhs;
}

PointQ negate(const CurveQ& E, const PointQ& P) {
  if (P.infinity) return P;
  return PointQ::affine(P.x, -P.y - E.a1() * P.x - E.a3());
}

PointQ add(const CurveQ& E, const PointQ& P, const PointQ& Q) {
  return add_generic(rational_ainvs(E), P, Q);
}

PointQ multiply(const CurveQ& E, const PointQ& P, long n) {
  if (n < 0) return multiply(E, negate(E, P), -n);
  PointQ result = PointQ::at_infinity();
  PointQ base = P;
  while (n > 0) {
    if (n & 1) result = add(E, result, base);
    n >>= 1;
    if (n) base = add(E, base, base);
  }
  return result;
}

bool is_torsion(const CurveQ& E, const PointQ& P) {
  PointQ Q = P;
  for (int n = 1; n <= 12; ++n) {
    if (Q.infinity) return true;
    Q = add(E, Q, P);
  }
  return false;
}

double naive_log_height(const PointQ& P) {
  if (P.infinity) return 0.0;
  const BigInt num = abs(P.x.get_num());
  const BigInt& den = P.x.get_den();
  const BigInt& big = num > den ? num : den;
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, big.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * std::log(2.0);
}

bool nonsingular_mod(const CurveQ& E, const PointQ& P, Int ell) {
  if (P.infinity) return true;
  const BigInt bl(static_cast<long>(ell));
  if (mpz_divisible_p(P.x.get_den().get_mpz_t(), bl.get_mpz_t())) return true;
  auto red = [&](const Rational& q) {
    const Int n = reduce(BigInt(q.get_num()), ell);
    const Int d = reduce(BigInt(q.get_den()), ell);
    return mulmod(n, invmod(d, ell), ell);
  };
  const Int x = red(P.x), y = red(P.y);
  const Int fy = reduce(2 * y + E.a1() * x + E.a3(), ell);
  const Int fx = reduce(E.a1() * y - 3 * mulmod(x, x, ell) - 2 * E.a2() * x - E.a4(), ell);
  return fy != 0 || fx != 0;
}

Int count_points(const CurveQ& E, Int ell) {
  if (!is_prime(ell)) throw InvalidInput("count_points: ell must be prime");
  Int count = 1;  // point at infinity
  if (ell == 2) {
    for (Int x = 0; x < 2; ++x)
      for (Int y = 0; y < 2; ++y) {
        const Int lhs = y * y + E.a1() * x * y + E.a3() * y;
        const Int rhs = x * x * x + E.a2() * x * x + E.a4() * x + E.a6();
        if (reduce(lhs - rhs, 2) == 0) ++count;
      }
    return count;
  }
  const Int b2 = reduce(E.b2(), ell), b4 = reduce(E.b4(), ell), b6 = reduce(E.b6(), ell);
  for (Int x = 0; x < ell; ++x) {
    const Int x2 = mulmod(x, x, ell);
    const Int d = reduce(4 * mulmod(x2, x, ell) + mulmod(b2, x2, ell) + 2 * mulmod(b4, x, ell) + b6, ell);
    if (d == 0)
      count += 1;
    else if (powmod(d, (ell - 1) / 2, ell) == 1)
      count += 2;
  }
  return count;
}

Int count_points_ap(const CurveQ& E, Int ell) {
  if (!E.has_good_reduction(ell))
    throw BadReductionError("a_ell requested at a prime of bad reduction: " + std::to_string(ell));
  return ell + 1 - count_points(E, ell);
}

std::vector<Int> dirichlet_coefficients(const CurveQ& E, Int n) {
  std::vector<Int> an(static_cast<size_t>(n + 1), 0);
  if (n >= 1) an[1] = 1;
  std::vector<Int> spf(static_cast<size_t>(n + 1), 0);
  for (Int i = 2; i <= n; ++i)
    if (spf[i] == 0)
      for (Int j = i; j <= n; j += i)
        if (spf[j] == 0) spf[j] = i;
  std::map<Int, Int> ap;
  for (Int m = 2; m <= n; ++m) {
    const Int ell = spf[m];
    Int rest = m, k = 0;
    while (rest % ell == 0) {
      rest /= ell;
      ++k;
    }
    if (rest > 1) {
      an[m] = an[m / rest] * an[rest];
      continue;
    }
    // m = ell^k
    if (!ap.count(ell)) ap[ell] = ell + 1 - count_points(E, ell);
    const Int a = ap[ell];
    if (k == 1)
      an[m] = a;
    else if (E.has_good_reduction(ell))
      an[m] = a * an[m / ell] - ell * an[m / ell / ell];
    else
      an[m] = a * an[m / ell];
  }
  return an;
}

HeckeRoots hecke_roots(const CurveQ& E, Int p, int prec) {
  if (p < 3 || !is_prime(p)) throw InvalidInput("hecke_roots: p must be an odd prime");
  const Int ap = count_points_ap(E, p);
  if (reduce(ap, p) == 0) throw NotOrdinaryError("a_p is divisible by p: supersingular prime");
  prec = std::clamp(prec, 1, max_precision(p) - 1);
  const Int m = ipow(p, prec);
  Int alpha = reduce(ap, p);
  for (int i = 0; i < prec + 2; ++i) {
    const Int f = reduce(mulmod(alpha, alpha, m) - mulmod(reduce(ap, m), alpha, m) + p, m);
    const Int df = reduce(2 * alpha - ap, m);
    alpha = reduce(alpha - mulmod(f, invmod(df, m), m), m);
  }
  HeckeRoots roots;
  roots.p = p;
  roots.ap = ap;
  roots.precision = prec;
  roots.alpha = PadicNumber::from_unit(p, alpha, 0, prec);
  roots.beta = PadicNumber::exact(p, p) / roots.alpha;
  return roots;
}

namespace {

using Series = std::vector<Rational>;

Series mul(const Series& a, const Series& b, int len) {
  Series c(static_cast<size_t>(len), Rational(0));
  for (int i = 0; i < len && i < static_cast<int>(a.size()); ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; i + j < len && j < static_cast<int>(b.size()); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

Series inverse(const Series& a, int len) {
  Series inv(static_cast<size_t>(len), Rational(0));
  inv[0] = 1 / a[0];
  for (int n = 1; n < len; ++n) {
    Rational s = 0;
    for (int k = 1; k <= n && k < static_cast<int>(a.size()); ++k) s += a[k] * inv[n - k];
    inv[n] = -s * inv[0];
  }
  return inv;
}

}  // namespace

FormalGroup formal_group(const CurveQ& E, int length) {
  const auto a = rational_ainvs(E);
  const int L = length + 4;
  // w(t) = t^3 + a1 t w + a2 t^2 w + a3 w^2 + a4 t w^2 + a6 w^3 by fixed point
  Series w(static_cast<size_t>(L), Rational(0));
  w[3] = 1;
  for (int iter = 0; iter < L; ++iter) {
    const Series w2 = mul(w, w, L);
    const Series w3 = mul(w2, w, L);
    Series next(static_cast<size_t>(L), Rational(0));
    next[3] = 1;
    for (int n = 0; n < L; ++n) {
      if (n >= 1) next[n] += a[0] * w[n - 1] + a[3] * w2[n - 1];
      if (n >= 2) next[n] += a[1] * w[n - 2];
      next[n] += a[2] * w2[n] + a[4] * w3[n];
    }
    if (next == w) break;
    w = std::move(next);
  }
  Series W(w.begin() + 3, w.end());  // w = t^3 W
  const int len = L - 3;
  FormalGroup fg;
  fg.length = length;
  fg.inv_w = inverse(W, len);
  const Series& V = fg.inv_w;
  // omega/dt = (-2V + t V') / (-2V + a1 t V + a3 t^3)
  Series num(static_cast<size_t>(len), Rational(0)), den(static_cast<size_t>(len), Rational(0));
  for (int n = 0; n < len; ++n) {
    num[n] = -2 * V[n] + n * V[n];
    den[n] = -2 * V[n];
    if (n >= 1) den[n] += a[0] * V[n - 1];
    if (n == 3) den[n] += a[2];
  }
  fg.omega = mul(num, inverse(den, len), len);
  fg.omega.resize(static_cast<size_t>(length));
  fg.log.assign(static_cast<size_t>(length + 1), Rational(0));
  for (int n = 0; n < length; ++n) fg.log[n + 1] = fg.omega[n] / (n + 1);
  fg.inv_w.resize(static_cast<size_t>(length));
  return fg;
}

namespace {

int floor_log(Int n, Int p) {
  int e = 0;
  while (n >= p) {
    n /= p;
    ++e;
  }
  return e;
}

// Number of terms so that t^n/n (v(t) >= vt) drops below p^target.
int log_terms(int vt, int target, Int p) {
  int n = 1;
  while (static_cast<Int>(n) * vt - floor_log(n, p) < target) ++n;
  return n + 1;
}

PadicNumber eval(const std::vector<Rational>& coeffs, const PadicNumber& t, int target) {
  const Int p = t.prime();
  PadicNumber sum = PadicNumber::zero_mod(p, target);
  PadicNumber power = PadicNumber::exact(p, 1);
  for (size_t n = 0; n < coeffs.size(); ++n) {
    if (coeffs[n] != 0) sum += PadicNumber::exact(p, coeffs[n]) * power;
    power *= t;
  }
  return sum;
}

std::array<PadicNumber, 5> padic_ainvs(const CurveQ& E, Int p) {
  std::array<PadicNumber, 5> a;
  for (int i = 0; i < 5; ++i) a[i] = PadicNumber::exact(p, E.ainvs()[i]);
  return a;
}

// lambda(t) for a point of the formal group, to absolute precision `target`.
PadicNumber formal_log_of_parameter(const CurveQ& E, const PadicNumber& t, int target) {
  const Int p = t.prime();
  if (t.is_zero()) return PadicNumber::zero_mod(p, target);
  const int n = log_terms(t.valuation(), target, p);
  const FormalGroup fg = formal_group(E, n);
  return eval(fg.log, t, target).add_bigoh(target);
}

PadicPoint padic_multiply(const CurveQ& E, const PadicPoint& P, long n) {
  PadicPoint result, base = P;
  while (n > 0) {
    if (n & 1) result = add(E, result, base);
    n >>= 1;
    if (n) base = add(E, base, base);
  }
  return result;
}

PadicPoint padic_negate(const CurveQ& E, const PadicPoint& P) {
  if (P.infinity) return P;
  const Int p = P.x.prime();
  PadicPoint R = P;
  R.y = -P.y - PadicNumber::exact(p, E.a1()) * P.x - PadicNumber::exact(p, E.a3());
  return R;
}

}  // namespace

PadicPoint add(const CurveQ& E, const PadicPoint& P, const PadicPoint& Q) {
  if (P.infinity) return Q;
  if (Q.infinity) return P;
  return add_generic(padic_ainvs(E, P.x.prime()), P, Q);
}

PadicPoint to_padic(const PointQ& P, Int p, int prec) {
  PadicPoint R;
  if (P.infinity) return R;
  R.infinity = false;
  R.x = PadicNumber::from_rational(p, P.x, prec);
  R.y = PadicNumber::from_rational(p, P.y, prec);
  return R;
}

PadicNumber formal_group_log(const CurveQ& E, const PointQ& P, Int p, int prec) {
  if (P.infinity) return PadicNumber::exact_zero(p);
  if (!E.has_good_reduction(p)) throw BadReductionError("formal_group_log needs good reduction at p");
  const Int n0 = count_points(E, p);
  PointQ Q = multiply(E, P, n0);
  Int scale = n0;
  int e = 0;
  while (!Q.infinity && valuation(BigInt(Q.x.get_den()), p) == 0) {
    if (++e > 4) throw ConsistencyError("formal_group_log: multiple never entered the formal group");
    Q = multiply(E, Q, p);
    scale *= p;
  }
  if (Q.infinity) return PadicNumber::exact_zero(p);
  const int loss = valuation(scale, p);
  const Rational t = -Q.x / Q.y;
  const int target = prec + loss;
  const int vt = valuation(BigInt(t.get_num()), p) - valuation(BigInt(t.get_den()), p);
  if (target - vt + 2 > max_precision(p))
    throw PrecisionError("formal_group_log: precision beyond the working range", max_precision(p) - loss - 2);
  const PadicNumber tp = PadicNumber::from_rational(p, t, target - vt + 2);
  const PadicNumber lam = formal_log_of_parameter(E, tp, target);
  const PadicNumber result = lam / scale;
  if (result.absolute_precision() < prec)
    throw PrecisionError("formal_group_log: 1/n division exhausted the precision", prec + loss);
  return result.add_bigoh(prec);
}

PadicPoint formal_point(const CurveQ& E, const PadicNumber& z) {
  const Int p = z.prime();
  if (z.is_zero()) return PadicPoint{};
  if (z.valuation() < 1) throw DivergenceError("formal_point: v_p(z) must be >= 1");
  const int target = z.absolute_precision();
  const int n = log_terms(z.valuation(), target, p);
  const FormalGroup fg = formal_group(E, n);
  // Newton iteration for log(t) = z
  PadicNumber t = z;
  for (int iter = 0; iter < 64; ++iter) {
    const PadicNumber f = eval(fg.log, t, target) - z;
    if (f.valuation() >= target) break;
    const PadicNumber df = eval(fg.omega, t, target);
    t = t - f / df;
  }
  const int vt = t.valuation();
  const PadicNumber V = eval(fg.inv_w, t, target);
  PadicPoint S;
  S.infinity = false;
  S.x = V / (t * t);
  S.y = -V / (t * t * t);
  (void)vt;
  return S;
}

namespace {

// Lifts of the points of E~(F_p) to torsion points of E(Q_p) of order prime to p.
std::vector<PadicPoint> torsion_lifts(const CurveQ& E, Int p, int prec) {
  // prime-to-p torsion of E(Q_p), lifted from E~(F_p)
  Int n0 = count_points(E, p);
  while (n0 % p == 0) n0 /= p;
  std::vector<PadicPoint> out;
  out.push_back(PadicPoint{});
  const PadicNumber b2 = PadicNumber::exact(p, Rational(E.b2())), b4 = PadicNumber::exact(p, Rational(E.b4())),
                    b6 = PadicNumber::exact(p, Rational(E.b6()));
  const PadicNumber a1 = PadicNumber::exact(p, E.a1()), a3 = PadicNumber::exact(p, E.a3());
  auto D = [&](const PadicNumber& x) { return 4 * x * x * x + b2 * x * x + 2 * b4 * x + b6; };
  auto dD = [&](const PadicNumber& x) { return 12 * x * x + 2 * b2 * x + 2 * b4; };
  for (Int x0 = 0; x0 < p; ++x0) {
    PadicNumber x = PadicNumber(p, x0, prec);
    if (x0 == 0) x = PadicNumber::zero_mod(p, prec);
    const PadicNumber d = D(PadicNumber::exact(p, x0));
    if (d.valuation() >= 1) {
      // 2-torsion: Hensel root of D near x0
      PadicNumber r = PadicNumber::exact(p, x0).add_bigoh(prec);
      for (int i = 0; i < prec + 2; ++i) r = r - D(r) / dD(r);
      PadicPoint T;
      T.infinity = false;
      T.x = r;
      T.y = -(a1 * r + a3) / 2;
      out.push_back(T);
      continue;
    }
    const auto s = padic_sqrt(d.add_bigoh(prec));
    if (!s) continue;
    for (int sign : {1, -1}) {
      PadicPoint R;
      R.infinity = false;
      R.x = PadicNumber::exact(p, x0).add_bigoh(prec);
      R.y = (-(a1 * R.x + a3) + (sign == 1 ? *s : -*s)) / 2;
      // remove the formal-group component: T = R - exp(log(n0 R)/n0)
      const PadicPoint nR = padic_multiply(E, R, n0);
      if (nR.infinity) {
        out.push_back(R);
        continue;
      }
      if (nR.x.valuation() >= 0) continue;  // reduction has order divisible by p
      const PadicNumber t = -nR.x / nR.y;
      const PadicNumber lam = formal_log_of_parameter(E, t, prec);
      const PadicNumber z = lam / n0;
      const PadicPoint F = z.is_zero() ? PadicPoint{} : formal_point(E, z);
      out.push_back(add(E, R, padic_negate(E, F)));
    }
  }
  return out;
}

std::optional<Rational> rational_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  const BigInt& num = q.get_num();
  const BigInt& den = q.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t())) return std::nullopt;
  return Rational(sqrt(num), sqrt(den));
}

}  // namespace

namespace {

std::optional<PointQ> match_point(const CurveQ& E, const PadicNumber& t, Int p, int prec, Int height_bound) {
  if (t.is_zero() || t.valuation() < 1) return std::nullopt;
  const PadicNumber z = t.add_bigoh(prec);
  const PadicPoint S = formal_point(E, z);
  const auto lifts = torsion_lifts(E, p, prec + 2);
  const Rational b2(E.b2()), b4(E.b4()), b6(E.b6());
  for (const PadicPoint& T : lifts) {
    const PadicPoint Q = add(E, S, T);
    if (Q.infinity) continue;
    std::optional<Rational> x;
    try {
      x = rational_reconstruct(Q.x, height_bound, height_bound);
    } catch (const InvalidInput&) {
      continue;  // not enough digits for this bound
    }
    if (!x) continue;
    const Rational d = 4 * *x * *x * *x + b2 * *x * *x + 2 * b4 * *x + b6;
    const auto s = rational_sqrt(d);
    if (!s) continue;
    for (int sign : {1, -1}) {
      const Rational y = (-(E.a1() * *x + E.a3()) + sign * *s) / 2;
      const PointQ cand = PointQ::affine(*x, y);
      if (!on_curve(E, cand)) continue;
      const PadicNumber diff = PadicNumber::exact(p, y) - Q.y;
      if (diff.valuation() < std::min(Q.y.absolute_precision(), Q.y.valuation() + 2)) continue;
      if (is_torsion(E, cand)) continue;
      return cand;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<PointQ> point_from_log(const CurveQ& E, const PadicNumber& t, Int p, int prec,
                                     Int height_bound) {
  if (t.is_exact_zero()) throw InvalidInput("point_from_log: t must be nonzero");
  if (count_points(E, p) % p == 0) throw InvalidInput("anomalous prime: E~(F_p) has p-torsion");
  return match_point(E, t, p, prec, height_bound);
}

std::optional<IndexedPoint> recover_point(const CurveQ& E, const PadicNumber& t, Int p, int prec,
                                          Int height_bound) {
  if (t.is_exact_zero()) throw InvalidInput("recover_point: t must be nonzero");
  Int n0 = count_points(E, p), index = 1;
  while (n0 % p == 0) {
    n0 /= p;
    index *= p;
  }
  const auto Q = match_point(E, t * index, p, prec, height_bound);
  if (!Q) return std::nullopt;
  return IndexedPoint{*Q, index};
}

std::optional<PointQ> search_generator(const CurveQ& E, Int naive_height_bound) {
  struct Found {
    Int height;
    PointQ P;
  };
  std::optional<Found> best;
  const BigInt b2(E.b2()), b4(E.b4()), b6(E.b6());
  for (Int b = 1; b * b <= naive_height_bound; ++b) {
    const BigInt B(static_cast<long>(b));
    for (Int a = -naive_height_bound; a <= naive_height_bound; ++a) {
      if (std::gcd(a, b) != 1) continue;
      const Int h = std::max(std::abs(a), b * b);
      if (best && h > best->height) continue;
      const BigInt A(static_cast<long>(a));
      const BigInt B2 = B * B, B4 = B2 * B2, B6 = B4 * B2;
      const BigInt N = 4 * A * A * A + b2 * A * A * B2 + 2 * b4 * A * B4 + b6 * B6;
      if (N < 0 || !mpz_perfect_square_p(N.get_mpz_t())) continue;
      const Rational x = make_rational(A, B2);
      const Rational s = make_rational(sqrt(N), B * B2);
      for (int sign : {1, -1}) {
        const Rational y = (-(E.a1() * x + E.a3()) + sign * s) / 2;
        const PointQ P = PointQ::affine(x, y);
        if (!on_curve(E, P) || is_torsion(E, P)) continue;
        // ties: smaller |x|, then smaller x, then larger y
        const Rational ax = abs(x), bx = best ? Rational(abs(best->P.x)) : Rational(0);
        const bool better = !best || h < best->height ||
                            (h == best->height &&
                             (ax < bx || (ax == bx && (x < best->P.x || (x == best->P.x && y > best->P.y)))));
        if (better) best = Found{h, P};
      }
    }
  }
  if (!best) return std::nullopt;
  return best->P;
}

}  // namespace prpoint
