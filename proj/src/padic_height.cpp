#include "prpoint/padic_height.hpp"

#include <numeric>

#include "prpoint/archimedean.hpp"
#include "prpoint/errors.hpp"

namespace prpoint {

namespace {

using Series = std::vector<Rational>;

Series mul(const Series& a, const Series& b, size_t len) {
  Series c(len, Rational(0));
  for (size_t i = 0; i < len && i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (size_t j = 0; i + j < len && j < b.size(); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

Series inverse(const Series& a, size_t len) {
  Series b(len, Rational(0));
  b[0] = 1 / a[0];
  for (size_t n = 1; n < len; ++n) {
    Rational s(0);
    for (size_t k = 1; k <= n && k < a.size(); ++k) s += a[k] * b[n - k];
    b[n] = -s * b[0];
  }
  return b;
}

int floor_log(Int n, Int p) {
  int e = 0;
  for (Int r = p; r <= n; r *= p) ++e;
  return e;
}

// Lower bound for n - v_p(coefficient of z^n in sigma): exp of a series
// with denominators n(n-1) and the factor exp(-c z^2/2).
int term_valuation(Int p, int n) { return n - (n + p - 2) / (p - 1) - 2 * floor_log(n, p) - 1; }

PadicNumber eval(const Series& coeffs, const PadicNumber& t) {
  const Int p = t.prime();
  PadicNumber sum = PadicNumber::exact_zero(p);
  PadicNumber power = PadicNumber::exact(p, 1);
  for (const Rational& c : coeffs) {
    if (c != 0) sum += PadicNumber::exact(p, c) * power;
    power *= t;
  }
  return sum;
}

}  // namespace

int sigma_length(Int p, int M) {
  int L = 3;
  for (int n = 3; n < 40 * (M + 4); ++n)
    if (term_valuation(p, n) < M + 1) L = n + 1;
  return L;
}

PadicNumber SigmaSeries::operator()(const PadicNumber& z) const {
  if (z.prime() != p) throw InvalidInput("sigma: prime mismatch");
  if (z.is_zero()) return PadicNumber::zero_mod(p, precision);
  if (z.valuation() < 1) throw DivergenceError("sigma: v_p(z) must be >= 1");
  PadicNumber sum = PadicNumber::exact_zero(p);
  for (int n = length - 1; n >= 0; --n) sum = sum * z + coeffs[static_cast<size_t>(n)];
  return sum.add_bigoh(precision + length * (z.valuation() - 1));
}

SigmaSeries padic_sigma(const CurveQ& E, Int p, const PadicNumber& e2, int M, int L) {
  if (L < 3) throw InvalidInput("padic_sigma: length must be >= 3");
  if (e2.prime() != p) throw InvalidInput("padic_sigma: e2 has the wrong prime");
  const size_t len = static_cast<size_t>(L);
  const FormalGroup fg = formal_group(E, L + 2);

  // t(z) = z T(z) by Lagrange inversion of z(t): [z^n] t = (1/n) [w^(n-1)] (w/z(w))^n
  Series zt(fg.log.begin() + 1, fg.log.end());  // z(w)/w
  const Series h = inverse(zt, len);
  Series T(len, Rational(0)), hn(len, Rational(0));
  hn[0] = 1;
  for (size_t n = 1; n <= len; ++n) {
    hn = mul(hn, h, len);
    T[n - 1] = hn[n - 1] / static_cast<long>(n);
  }
  // x = t^-2 V(t) with V = t^3/w, so x(z) = z^-2 X(z), X = T^-2 V(zT)
  Series VT(len, Rational(0)), Tk(len, Rational(0));
  Tk[0] = 1;
  for (size_t k = 0; k < len && k < fg.inv_w.size(); ++k) {
    for (size_t n = k; n < len; ++n) VT[n] += fg.inv_w[k] * Tk[n - k];
    Tk = mul(Tk, T, len);
  }
  const Series Tinv = inverse(T, len);
  const Series X = mul(mul(Tinv, Tinv, len), VT, len);
  for (size_t n = 1; n < len; n += 2)
    if (X[n] != 0) throw ConsistencyError("padic_sigma: x(z) is not even");

  // log(sigma/z) = -sum_{n>=2} X_n z^n / (n(n-1)) - c z^2/2, c = (b2 - e2)/12
  Series S(len, Rational(0));
  for (size_t n = 2; n < len; ++n) S[n] = -X[n] / static_cast<long>(n * (n - 1));
  Series expS(len, Rational(0));
  expS[0] = 1;
  for (size_t n = 1; n < len; ++n) {
    Rational s(0);
    for (size_t k = 1; k <= n; ++k) s += static_cast<long>(k) * S[k] * expS[n - k];
    expS[n] = s / static_cast<long>(n);
  }
  const PadicNumber c = (PadicNumber::exact(p, Rational(E.b2())) - e2) / 12;
  std::vector<PadicNumber> G(len, PadicNumber::exact_zero(p));
  G[0] = PadicNumber::exact(p, 1);
  const PadicNumber step = -c / 2;
  for (size_t k = 1; 2 * k < len; ++k) G[2 * k] = G[2 * k - 2] * step / static_cast<Int>(k);

  SigmaSeries out;
  out.p = p;
  out.precision = M;
  out.length = L;
  out.e2 = e2;
  out.coeffs.assign(len, PadicNumber::exact_zero(p));
  for (size_t n = 1; n < len; ++n)
    for (size_t i = 0; i < n; ++i) {
      if (expS[i] == 0 || G[n - 1 - i].is_exact_zero()) continue;
      out.coeffs[n] += G[n - 1 - i] * expS[i];
    }
  for (size_t n = 0; n < len; n += 2)
    if (!out.coeffs[n].is_exact_zero()) throw ConsistencyError("padic_sigma: sigma is not odd");
  return out;
}

long height_multiplier(const CurveQ& E, const PointQ& P, Int p) {
  return std::lcm(component_killer(E, P), static_cast<long>(count_points(E, p)));
}

SigmaSeries height_sigma(const CurveQ& E, Int p, int M) {
  const FrobeniusData F = kedlaya_frobenius(E, p, M);
  const DcrisSplit split = dcris_split(E, F);
  return padic_sigma(E, p, split.e2, M, sigma_length(p, M));
}

PadicNumber height_alpha(const CurveQ& E, const PointQ& P, const SigmaSeries& sigma, int M, long multiplier) {
  const Int p = sigma.p;
  if (!on_curve(E, P)) throw InvalidInput("height_alpha: point is not on the curve");
  if (P.infinity || is_torsion(E, P)) return PadicNumber::exact_zero(p);
  const long m0 = height_multiplier(E, P, p);
  const long m = multiplier == 0 ? m0 : multiplier;
  if (m <= 0 || m % m0 != 0) throw InvalidInput("height_alpha: multiplier must be a positive multiple of " + std::to_string(m0));
  const PointQ Q = multiply(E, P, m);
  const BigInt den = Q.x.get_den();
  BigInt d;
  mpz_sqrt(d.get_mpz_t(), den.get_mpz_t());
  if (d * d != den) throw ConsistencyError("height_alpha: denominator of x is not a square");
  const int vd = modarith::valuation(d, p);
  if (vd < 1) throw ConsistencyError("height_alpha: multiple does not lie in the formal group");

  const Rational t = -Q.x / Q.y;
  const int target = sigma.precision + vd;
  int nlog = 2;
  while (nlog * vd - 2 * floor_log(nlog, p) < target + 1) ++nlog;
  const FormalGroup fg = formal_group(E, nlog);
  const PadicNumber z = eval(fg.log, PadicNumber::from_rational(p, t, target + 2)).add_bigoh(target + 1);
  const PadicNumber u = sigma(z) / PadicNumber::exact(p, Rational(d));
  if (u.is_zero() || u.valuation() != 0) throw ConsistencyError("height_alpha: sigma(z)/d is not a unit");
  const PadicNumber h = 2 * padic_log(u) / (static_cast<Int>(m) * static_cast<Int>(m));
  if (h.absolute_precision() < M)
    throw PrecisionError("height_alpha: division by m^2 exhausted the precision",
                         M + (M - h.absolute_precision()));
  return h.add_bigoh(M);
}

PadicNumber height_alpha(const CurveQ& E, const PointQ& P, Int p, int M, long multiplier) {
  if (P.infinity || is_torsion(E, P)) return PadicNumber::exact_zero(p);
  const long m = multiplier == 0 ? height_multiplier(E, P, p) : multiplier;
  const int loss = 2 * modarith::valuation(static_cast<Int>(m), p);
  const int work = M + loss + 2;
  if (work > modarith::max_precision(p) - 2)
    throw PrecisionError("height_alpha: precision beyond the working range", modarith::max_precision(p) - 4 - loss);
  return height_alpha(E, P, height_sigma(E, p, work), M, multiplier);
}

}  // namespace prpoint
