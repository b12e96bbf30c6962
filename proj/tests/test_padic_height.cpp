#include <random>

#include "doctest.h"
#include "prpoint/errors.hpp"
#include "prpoint/padic_height.hpp"

using namespace prpoint;

namespace {

CurveQ curve37a() { return CurveQ({0, 0, 1, -1, 0}, 37); }
CurveQ curve43a() { return CurveQ({0, 1, 1, 0, 0}, 43); }
CurveQ curve53a() { return CurveQ({1, -1, 1, 0, 0}, 53); }

const PointQ G = PointQ::affine(0, 0);

PadicNumber zero(Int p) { return PadicNumber::exact(p, 0); }

}  // namespace

TEST_CASE("sigma series") {
  const CurveQ E = curve37a();
  const SigmaSeries s = height_sigma(E, 5, 8);
  CHECK(s.coeffs[0].is_exact_zero());
  CHECK(s.coeffs[1].equals(PadicNumber::exact(5, 1)));
  for (int n = 0; n < s.length; n += 2) CHECK(s.coeffs[n].is_exact_zero());
  // sigma(-z) = -sigma(z)
  std::mt19937 rng(5);
  std::uniform_int_distribution<Int> unit(1, 5 * 5 * 5 * 5 - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const PadicNumber z = PadicNumber(5, unit(rng), 8) * 5;
    CHECK((s(z) + s(-z)).congruent(zero(5), 8));
    CHECK(s(z).congruent(z, 3));  // z + O(z^3)
  }
  // perturbing e2 by p^M leaves sigma unchanged mod p^M
  const SigmaSeries t = padic_sigma(E, 5, s.e2 + PadicNumber::exact(5, modarith::ipow(5, 8)), 8, s.length);
  for (int n = 0; n < s.length; ++n) {
    const int prec = std::min(s.coeffs[n].absolute_precision(), 8);
    CHECK(s.coeffs[n].congruent(t.coeffs[n], prec));
  }
  // a longer series agrees on evaluation
  const SigmaSeries longer = padic_sigma(E, 5, s.e2, 8, s.length + 10);
  CHECK(longer(PadicNumber::exact(5, 5)).congruent(s(PadicNumber::exact(5, 5)), 8));
  CHECK_THROWS_AS(padic_sigma(E, 5, s.e2, 8, 2), InvalidInput);
}

TEST_CASE("heights against an independent implementation") {
  // p * h_alpha(0,0) mod p^9 = -p * ellpadicheight from PARI
  struct Case {
    CurveQ E;
    Int p;
    Int lift;
  };
  const Case cases[] = {{curve37a(), 5, 155475},
                        {curve37a(), 7, 14917021},
                        {curve43a(), 5, 1686528},
                        {curve53a(), 7, 19236910}};
  for (const Case& c : cases) {
    const PadicNumber h = height_alpha(c.E, G, c.p, 8);
    CHECK((c.p * h).congruent(PadicNumber::exact(c.p, c.lift), 8));
    // nondegeneracy
    CHECK_FALSE(h.is_zero());
  }
}

TEST_CASE("quadraticity and independence of the multiple") {
  for (auto [E, p] : {std::pair{curve37a(), Int{5}}, {curve53a(), 7}, {curve43a(), 5}}) {
    const int M = 6;
    const SigmaSeries s = height_sigma(E, p, M + 4);
    const PadicNumber h = height_alpha(E, G, s, M);
    const PadicNumber h2 = height_alpha(E, multiply(E, G, 2), s, M);
    CHECK(h2.congruent(4 * h, M));
    const long m = height_multiplier(E, G, p);
    CHECK(height_alpha(E, G, s, M, 2 * m).congruent(h, M));
    CHECK(height_alpha(E, G, s, M - 2, p * m).congruent(h, M - 2));
    CHECK_THROWS_AS(height_alpha(E, G, s, M, m + 1), InvalidInput);
  }
}

TEST_CASE("parallelogram law on random small points") {
  // points a G, b G of 37a with p = 7 (no 7-adic loss for |a|, |b| < 7)
  const CurveQ E = curve37a();
  const Int p = 7;
  const int M = 6;
  const SigmaSeries s = height_sigma(E, p, M + 3);
  std::vector<PointQ> pts;
  for (int k = -6; k <= 6; ++k) pts.push_back(multiply(E, k >= 0 ? G : negate(E, G), std::abs(k)));
  std::vector<PadicNumber> hs;
  for (const PointQ& P : pts) hs.push_back(height_alpha(E, P, s, M));
  auto idx = [](int k) { return static_cast<size_t>(k + 6); };
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> pick(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const int a = pick(rng), b = pick(rng);
    const PadicNumber lhs = hs[idx(a + b)] + hs[idx(a - b)];
    const PadicNumber rhs = 2 * hs[idx(a)] + 2 * hs[idx(b)];
    CHECK(lhs.congruent(rhs, M));
    // computed directly on the sum point
    if (trial < 10) CHECK(height_alpha(E, add(E, pts[idx(a)], pts[idx(b)]), s, M).congruent(hs[idx(a + b)], M));
  }
}

TEST_CASE("guards") {
  const CurveQ E11({0, -1, 1, -10, -20}, 11);
  CHECK(height_alpha(E11, PointQ::affine(5, 5), 7, 6).is_exact_zero());
  CHECK(height_alpha(curve37a(), PointQ::at_infinity(), 5, 6).is_exact_zero());
  CHECK_THROWS_AS(height_alpha(curve37a(), PointQ::affine(1, 1), 5, 6), InvalidInput);
  CHECK_THROWS_AS(height_alpha(curve37a(), G, 5, 30), PrecisionError);
  CHECK_THROWS_AS(height_alpha(curve43a(), G, 7, 6), NotOrdinaryError);
}
