#include "prpoint/archimedean.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "prpoint/errors.hpp"

namespace prpoint {

using modarith::valuation;

namespace {

constexpr double kPi = std::numbers::pi;

double to_double(const BigInt& n) { return n.get_d(); }

double log_abs(const BigInt& n) {
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
  return std::log(std::fabs(mant)) + static_cast<double>(exp) * std::log(2.0);
}

// std::expint is Ei; E1(x) = -Ei(-x) for x > 0
double e1(double x) { return -std::expint(-x); }

double agm(double a, double b) {
  for (int i = 0; i < 64 && std::fabs(a - b) > 1e-16 * std::fabs(a); ++i) {
    const double m = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<double> real_two_torsion_x(const CurveQ& E) {
  using LD = long double;
  const LD A = to_double(E.b2()) / 4.0L, B = to_double(E.b4()) / 2.0L, C = to_double(E.b6()) / 4.0L;
  const LD p = B - A * A / 3.0L;
  const LD q = 2.0L * A * A * A / 27.0L - A * B / 3.0L + C;
  std::vector<LD> ys;
  if (sgn(E.discriminant()) > 0) {
    const LD m = 2.0L * std::sqrt(-p / 3.0L);
    LD arg = 3.0L * q / (p * m);
    arg = std::clamp(arg, -1.0L, 1.0L);
    const LD theta = std::acos(arg) / 3.0L;
    for (int k = 0; k < 3; ++k) ys.push_back(m * std::cos(theta - 2.0L * std::numbers::pi_v<LD> * k / 3.0L));
  } else {
    const LD s = std::sqrt(q * q / 4.0L + p * p * p / 27.0L);
    ys.push_back(std::cbrt(-q / 2.0L + s) + std::cbrt(-q / 2.0L - s));
  }
  std::vector<double> roots;
  for (LD y : ys) {
    LD x = y - A / 3.0L;
    for (int i = 0; i < 4; ++i) {
      const LD f = ((x + A) * x + B) * x + C;
      const LD df = (3.0L * x + 2.0L * A) * x + B;
      if (df == 0) break;
      x -= f / df;
    }
    roots.push_back(static_cast<double>(x));
  }
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

RealScalar real_period(const CurveQ& E) {
  const auto e = real_two_torsion_x(E);
  double omega;
  if (e.size() == 3) {
    omega = 2.0 * kPi / agm(std::sqrt(e[0] - e[2]), std::sqrt(e[0] - e[1]));
  } else {
    const double e1 = e[0];
    const double beta = 3.0 * e1 + to_double(E.b2()) / 4.0;
    const double alpha = std::sqrt(3.0 * e1 * e1 + to_double(E.b2()) * e1 / 2.0 + to_double(E.b4()) / 2.0);
    omega = 2.0 * kPi / agm(2.0 * std::sqrt(alpha), std::sqrt(2.0 * alpha + beta));
  }
  return {omega, 1e-12 * omega, false};
}

namespace {

double fricke_series(const std::vector<Int>& an, double N, double t) {
  double s = 0.0;
  const double c = 2.0 * kPi * t / std::sqrt(N);
  for (size_t n = 1; n < an.size(); ++n) {
    const double term = static_cast<double>(an[n]) * std::exp(-c * static_cast<double>(n));
    s += term;
    if (std::exp(-c * static_cast<double>(n)) < 1e-20) break;
  }
  return s;
}

}  // namespace

int functional_equation_sign(const CurveQ& E) {
  const double N = static_cast<double>(E.conductor());
  const Int terms = static_cast<Int>(std::ceil(12.0 * std::sqrt(N))) + 20;
  const auto an = dirichlet_coefficients(E, terms);
  // t = 1.1 keeps both evaluations well inside the convergent range
  const double t = 1.1;
  const double lhs = fricke_series(an, N, 1.0 / t);
  const double rhs = t * t * fricke_series(an, N, t);
  const double ratio = lhs / rhs;
  if (std::fabs(std::fabs(ratio) - 1.0) > 1e-6)
    throw ConsistencyError("functional equation check failed (conductor wrong?) ratio=" + std::to_string(ratio));
  return ratio > 0 ? 1 : -1;
}

RealScalar lprime_complex(const CurveQ& E, double truncation_factor) {
  if (functional_equation_sign(E) != -1) throw WrongRankError("root number is +1; L'(E,1) is not the leading term");
  const double N = static_cast<double>(E.conductor());
  const Int terms = static_cast<Int>(std::ceil(truncation_factor * std::sqrt(N)));
  const auto an = dirichlet_coefficients(E, terms);
  const double c = 2.0 * kPi / std::sqrt(N);
  double sum = 0.0;
  for (Int n = 1; n <= terms; ++n) {
    if (an[n] == 0) continue;
    sum += static_cast<double>(an[n]) / static_cast<double>(n) * e1(c * static_cast<double>(n));
  }
  // |a_n| <= d(n) sqrt(n) <= 2n, E1(x) <= exp(-x)/x
  const double M = static_cast<double>(terms);
  const double tail = 2.0 * 2.0 * std::exp(-c * M) / (c * M) / (1.0 - std::exp(-c));
  return {2.0 * sum, tail + 1e-14 * std::fabs(2.0 * sum), false};
}

long component_killer(const CurveQ& E, const PointQ& P) {
  long m = 1;
  for (Int ell : E.bad_primes()) {
    const long bound = 4L * valuation(E.discriminant(), ell) + 4;
    PointQ Q = P;
    long k = 1;
    while (!nonsingular_mod(E, Q, ell)) {
      if (++k > bound) throw ConsistencyError("component group order exceeded its bound");
      Q = add(E, Q, P);
    }
    m = std::lcm(m, k);
  }
  return m;
}

namespace {

// Archimedean local height (no discriminant term) by Tate's series, after a
// real translation of x that keeps x >= 1 on E(R).
double lambda_infinity(const CurveQ& E, const Rational& x0) {
  const auto e = real_two_torsion_x(E);
  const double r = e.back() - 1.0;
  const double b2 = to_double(E.b2()), b4 = to_double(E.b4()), b6 = to_double(E.b6()),
               b8 = to_double(E.b8());
  const double B2 = b2 + 12 * r;
  const double B4 = b4 + r * b2 + 6 * r * r;
  const double B6 = b6 + 2 * r * b4 + r * r * b2 + 4 * r * r * r;
  const double B8 = b8 + 3 * r * b6 + 3 * r * r * b4 + r * r * r * b2 + 3 * r * r * r * r;
  const double x = x0.get_d() - r;
  double t = 1.0 / x;
  double sum = 0.0, scale = 1.0;
  for (int n = 0; n < 40; ++n) {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    const double w = 4 * t + B2 * t2 + 2 * B4 * t3 + B6 * t4;
    const double z = 1 - B4 * t2 - 2 * B6 * t3 - B8 * t4;
    sum += scale * std::log(std::fabs(z));
    t = w / z;
    scale /= 4.0;
  }
  return 0.5 * std::log(std::fabs(x)) + sum / 8.0;
}

}  // namespace

RealScalar neron_tate_height(const CurveQ& E, const PointQ& P) {
  if (P.infinity || is_torsion(E, P)) return {0.0, 0.0, true};
  const long m = component_killer(E, P);
  const PointQ Q = multiply(E, P, m);
  // Q lies on the identity component everywhere: finite parts are log(den x)/2
  const double lam = lambda_infinity(E, Q.x) + 0.5 * log_abs(BigInt(Q.x.get_den()));
  const double h = 2.0 * lam / static_cast<double>(m * m);
  return {h, 1e-11 * (1.0 + std::fabs(h)), false};
}

Rational reconstruct_real(double x, double tol, long max_den) {
  std::optional<Rational> found;
  for (long q = 1; q <= max_den; ++q) {
    const double p = std::round(x * static_cast<double>(q));
    if (std::fabs(x - p / static_cast<double>(q)) > tol) continue;
    Rational cand(static_cast<long>(p), q);
    cand.canonicalize();
    if (found && *found != cand)
      throw AmbiguousRational("two rationals within the error bars: " + found->get_str() + " and " + cand.get_str());
    found = cand;
  }
  if (!found) throw AmbiguousRational("no rational with small denominator within the error bars");
  return *found;
}

namespace {

BigInt square_part(const BigInt& n) {
  BigInt rest = abs(n), s = 1;
  for (unsigned long d = 2; BigInt(d) * d <= rest; ++d) {
    while (mpz_divisible_ui_p(rest.get_mpz_t(), d * d)) {
      rest /= d * d;
      s *= d;
    }
    while (mpz_divisible_ui_p(rest.get_mpz_t(), d)) rest /= d;
  }
  return s;
}

}  // namespace

CfResult compute_c_f(const CurveQ& E, const PointQ& P) {
  const RealScalar L = lprime_complex(E);
  const RealScalar h = neron_tate_height(E, P);
  if (h.exact) throw InvalidInput("compute_c_f: P is torsion");
  const RealScalar om = real_period(E);
  CfResult out;
  out.raw.value = -L.value / (h.value * om.value);
  const double rel = L.error / std::fabs(L.value) + h.error / h.value + om.error / om.value;
  out.raw.error = std::fabs(out.raw.value) * rel;
  out.c = reconstruct_real(out.raw.value, std::max(out.raw.error, 1e-9), 10000);
  const BigInt sn = square_part(out.c.get_num()), sd = square_part(out.c.get_den());
  out.square_factor = make_rational(sn * sn, sd * sd);
  return out;
}

}  // namespace prpoint
