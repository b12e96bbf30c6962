#include <cmath>
#include <random>

#include "doctest.h"
#include "prpoint/archimedean.hpp"
#include "prpoint/errors.hpp"

using namespace prpoint;

namespace {

CurveQ curve37a() { return CurveQ({0, 0, 1, -1, 0}, 37); }
CurveQ curve43a() { return CurveQ({0, 1, 1, 0, 0}, 43); }
CurveQ curve53a() { return CurveQ({1, -1, 1, 0, 0}, 53); }
CurveQ curve11a() { return CurveQ({0, -1, 1, -10, -20}, 11); }

// Doubling limit h(x(2^n P)) / 4^n in exact arithmetic.
double doubling_oracle(const CurveQ& E, PointQ P, int n) {
  for (int i = 0; i < n; ++i) P = add(E, P, P);
  return naive_log_height(P) / std::pow(4.0, n);
}

// Period by direct quadrature of 2 * int_{e1}^{inf} dx / sqrt(D(x)) with
// the substitution x = e1 + u^2, independent of the AGM.
double quadrature_period(const CurveQ& E) {
  const auto e = real_two_torsion_x(E);
  const double b2 = E.b2().get_d(), b4 = E.b4().get_d(), b6 = E.b6().get_d();
  auto f = [&](double u) {
    const double x = e[0] + u * u;
    const double D = 4 * x * x * x + b2 * x * x + 2 * b4 * x + b6;
    if (u == 0) {
      const double d = 12 * e[0] * e[0] + 2 * b2 * e[0] + 2 * b4;
      return 2.0 / std::sqrt(d);
    }
    return 2 * u / std::sqrt(D);
  };
  // int_0^inf f(u) du, u = s/(1-s)
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) / n;
    const double u = s / (1 - s);
    sum += f(u) / ((1 - s) * (1 - s));
  }
  return 2.0 * sum / n * static_cast<double>(e.size() == 3 ? 2 : 1);
}

}  // namespace

TEST_CASE("real period") {
  const RealScalar om = real_period(curve37a());
  CHECK(om.value == doctest::Approx(5.98692).epsilon(1e-5));
  CHECK(om.error <= 1e-10);
  for (const CurveQ& E : {curve37a(), curve43a(), curve53a(), curve11a()}) {
    const double agm = real_period(E).value;
    CHECK(agm > 0);
    CHECK(agm == doctest::Approx(quadrature_period(E)).epsilon(1e-6));
  }
  // u = 2 rescaling of 37a: [0,0,8,-16,0] is rejected before any period is taken
  CHECK_THROWS_AS(CurveQ({0, 0, 8, -16, 0}, 37), InvalidInput);
}

TEST_CASE("root number and L'(E,1)") {
  CHECK(functional_equation_sign(curve37a()) == -1);
  CHECK(functional_equation_sign(curve11a()) == 1);
  CHECK_THROWS_AS(lprime_complex(curve11a()), WrongRankError);
  const RealScalar L = lprime_complex(curve37a());
  CHECK(L.value == doctest::Approx(0.30599).epsilon(1e-4));
  const RealScalar L2 = lprime_complex(curve37a(), 40.0);
  CHECK(std::fabs(L.value - L2.value) < 1e-10);
  CHECK(L.error < 1e-10);
  const auto an = dirichlet_coefficients(curve37a(), 6);
  CHECK(an[6] == an[2] * an[3]);
  CHECK(an[6] == 6);
}

TEST_CASE("Neron-Tate height") {
  const CurveQ E = curve37a();
  const PointQ P = PointQ::affine(0, 0);
  const RealScalar h = neron_tate_height(E, P);
  CHECK(h.value == doctest::Approx(0.05111).epsilon(1e-4));
  for (const CurveQ& F : {curve37a(), curve43a(), curve53a()}) {
    const PointQ G = *search_generator(F, 10);
    const double hg = neron_tate_height(F, G).value;
    CHECK(std::fabs(hg - doubling_oracle(F, G, 10)) < 1e-6);
    CHECK(neron_tate_height(F, add(F, G, G)).value / hg == doctest::Approx(4.0).epsilon(1e-9));
  }
  std::mt19937 rng(3);
  std::uniform_int_distribution<long> pick(-7, 7);
  for (int trial = 0; trial < 100; ++trial) {
    const long m = pick(rng);
    if (m == 0) continue;
    const double hm = neron_tate_height(E, multiply(E, P, m)).value;
    CHECK(hm == doctest::Approx(static_cast<double>(m * m) * h.value).epsilon(1e-9));
  }
  const RealScalar t = neron_tate_height(curve11a(), PointQ::affine(5, 5));
  CHECK(t.exact);
  CHECK(t.value == 0.0);
}

TEST_CASE("c(f)") {
  const CurveQ E = curve37a();
  const PointQ P = PointQ::affine(0, 0);
  const CfResult r = compute_c_f(E, P);
  CHECK(r.c == -1);
  CHECK(r.square_factor == 1);
  CHECK(compute_c_f(E, negate(E, P)).c == -1);
  const CfResult r2 = compute_c_f(E, add(E, P, P));
  CHECK(r2.c == make_rational(-1, 4));
  CHECK(r2.square_factor == make_rational(1, 4));
  for (const CurveQ& F : {curve43a(), curve53a()}) {
    const CfResult c = compute_c_f(F, *search_generator(F, 10));
    const double L = lprime_complex(F).value;
    const double rhs = -c.c.get_d() * neron_tate_height(F, *search_generator(F, 10)).value * real_period(F).value;
    CHECK(std::fabs(L - rhs) < 1e-9);
  }
}

TEST_CASE("real reconstruction") {
  CHECK(reconstruct_real(-0.25000000001, 1e-9, 10000) == make_rational(-1, 4));
  CHECK(reconstruct_real(2.0 / 7.0, 1e-12, 10000) == make_rational(2, 7));
  CHECK_THROWS_AS(reconstruct_real(0.5, 1e-3, 10000), AmbiguousRational);
  CHECK_THROWS_AS(reconstruct_real(std::sqrt(2.0), 1e-12, 100), AmbiguousRational);
}
