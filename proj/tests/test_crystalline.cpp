#include <random>

#include "doctest.h"
#include "prpoint/archimedean.hpp"
#include "prpoint/crystalline.hpp"
#include "prpoint/errors.hpp"

using namespace prpoint;

namespace {

CurveQ curve37a() { return CurveQ({0, 0, 1, -1, 0}, 37); }
CurveQ curve43a() { return CurveQ({0, 1, 1, 0, 0}, 43); }
CurveQ curve53a() { return CurveQ({1, -1, 1, 0, 0}, 53); }

bool matches(const PadicNumber& x, Int expect, int M) { return x.congruent(PadicNumber::exact(x.prime(), expect), M); }

}  // namespace

TEST_CASE("characteristic polynomial against point counts") {
  const int M = 6;
  for (const CurveQ& E : {curve37a(), curve43a(), curve53a()})
    for (Int p : {5, 7}) {
      const FrobeniusData F = kedlaya_frobenius(E, p, M);
      const Int ap = count_points_ap(E, p);
      CHECK(matches(F.trace, ap, M));
      CHECK(matches(F.det, p, M));
      CHECK(F.precision == M);
    }
  const FrobeniusData F = kedlaya_frobenius(curve37a(), 5, 2);
  CHECK(matches(F.trace, -2, 2));
  CHECK(matches(F.det, 5, 2));
}

TEST_CASE("Frobenius matrix against an independent implementation") {
  // lifts mod p^6 of the matrix on (omega, eta) from PARI's ellpadicfrobenius
  struct Case {
    CurveQ E;
    Int p;
    std::array<Int, 4> F;
  };
  const Case cases[] = {
      {curve37a(), 5, {1465, 5187, 8945, 14158}},   {curve37a(), 7, {113057, 81799, 81249, 4591}},
      {curve43a(), 5, {2085, 4487, 14515, 13536}},  {curve43a(), 7, {64799, 45726, 72247, 52850}},
      {curve53a(), 5, {7245, 4404, 6055, 8380}},    {curve53a(), 7, {81172, 58560, 82257, 36473}},
  };
  for (const Case& c : cases) {
    const FrobeniusData F = kedlaya_frobenius(c.E, c.p, 6);
    CHECK(matches(F.F[0][0], c.F[0], 6));
    CHECK(matches(F.F[0][1], c.F[1], 6));
    CHECK(matches(F.F[1][0], c.F[2], 6));
    CHECK(matches(F.F[1][1], c.F[3], 6));
  }
}

TEST_CASE("unit root agrees with hecke_roots; supersingular primes have none") {
  for (auto [E, p] : {std::pair{curve37a(), Int{5}}, {curve37a(), 7}, {curve43a(), 5}, {curve53a(), 7}}) {
    const FrobeniusData F = kedlaya_frobenius(E, p, 8);
    CHECK(F.alpha.congruent(hecke_roots(E, p, 8).alpha, 8));
    CHECK(F.apply(F.v_alpha)[0].congruent(F.alpha * F.v_alpha[0], 8));
    CHECK(F.apply(F.v_alpha)[1].congruent(F.alpha * F.v_alpha[1], 8));
    CHECK(F.apply(F.v_beta)[0].congruent(F.beta * F.v_beta[0], 7));
    CHECK(F.apply(F.v_beta)[1].congruent(F.beta * F.v_beta[1], 7));
  }
  const FrobeniusData ss = kedlaya_frobenius(curve43a(), 7, 6);
  CHECK(ss.alpha.prime() == 0);
  CHECK_THROWS_AS(dcris_split(curve43a(), ss), NotOrdinaryError);
}

TEST_CASE("pairing compatibility [Fu, Fv] = p [u, v] on random classes") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<Int> coef(-10000, 10000);
  const int M = 6;
  for (auto [E, p] : {std::pair{curve37a(), Int{5}}, {curve53a(), 7}}) {
    const FrobeniusData F = kedlaya_frobenius(E, p, M);
    for (int trial = 0; trial < 100; ++trial) {
      const DeRhamClass u{PadicNumber::exact(p, coef(rng)), PadicNumber::exact(p, coef(rng))};
      const DeRhamClass v{PadicNumber::exact(p, coef(rng)), PadicNumber::exact(p, coef(rng))};
      const PadicNumber lhs = de_rham_pairing(F.apply(u), F.apply(v));
      CHECK(lhs.congruent(p * de_rham_pairing(u, v), M));
    }
  }
}

TEST_CASE("increasing M refines the matrix") {
  for (auto [E, p] : {std::pair{curve37a(), Int{5}}, {curve43a(), 7}}) {
    const FrobeniusData a = kedlaya_frobenius(E, p, 6), b = kedlaya_frobenius(E, p, 9);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(a.F[i][j].congruent(b.F[i][j], 6));
  }
}

TEST_CASE("input guards") {
  CHECK_THROWS_AS(kedlaya_frobenius(curve37a(), 37, 4), BadReductionError);
  CHECK_THROWS_AS(kedlaya_frobenius(curve37a(), 2, 4), InvalidInput);
  CHECK_THROWS_AS(kedlaya_frobenius(curve37a(), 5, 0), InvalidInput);
}

TEST_CASE("splitting of omega and the unit-root datum") {
  // eta + s2 omega spans the unit-root line; s2 from PARI's ellpadics2
  struct Case {
    CurveQ E;
    Int p;
    Int s2;  // lift mod p^6
  };
  const Case cases[] = {{curve37a(), 5, 4 + 3 * 5 + 3 * 125 + 3 * 625 + 4 * 3125},
                        {curve37a(), 7, 3 + 7 + 343 + 2 * 2401},
                        {curve43a(), 5, 2 + 25 + 125 + 3125},
                        {curve53a(), 7, 4 + 6 * 7 + 4 * 343 + 4 * 2401 + 16807}};
  for (const Case& c : cases) {
    const FrobeniusData F = kedlaya_frobenius(c.E, c.p, 8);
    const DcrisSplit s = dcris_split(c.E, F);
    CHECK(matches(s.s2, c.s2, 6));
    CHECK(s.e2.congruent(PadicNumber::exact(c.p, Rational(c.E.b2())) - 12 * s.s2, 8));
    // omega_alpha + omega_beta = omega
    CHECK((s.omega_alpha[0] + s.omega_beta[0]).congruent(PadicNumber::exact(c.p, 1), 7));
    CHECK((s.omega_alpha[1] + s.omega_beta[1]).congruent(PadicNumber::exact(c.p, 0), 7));
    // eigenlines
    const DeRhamClass fa = F.apply(s.omega_alpha), fb = F.apply(s.omega_beta);
    for (int i = 0; i < 2; ++i) {
      CHECK(fa[i].congruent(s.alpha * s.omega_alpha[i], 6));
      CHECK(fb[i].congruent(s.beta * s.omega_beta[i], 6));
    }
    CHECK((de_rham_pairing(s.omega_alpha, s.omega_beta) + s.pairing_beta_alpha).congruent(PadicNumber::exact(c.p, 0), 7));
    CHECK(de_rham_pairing(s.omega_alpha, s.omega_star).congruent(PadicNumber::exact(c.p, 1), 6));
    CHECK_FALSE(s.pairing_beta_alpha.is_zero());
  }
}

TEST_CASE("the pairing [omega_beta, omega_alpha] is stable in M") {
  const CurveQ E = curve37a();
  const DcrisSplit a = dcris_split(E, kedlaya_frobenius(E, 5, 6));
  const DcrisSplit b = dcris_split(E, kedlaya_frobenius(E, 5, 8));
  CHECK(a.pairing_beta_alpha.valuation() == b.pairing_beta_alpha.valuation());
  CHECK(a.pairing_beta_alpha.congruent(b.pairing_beta_alpha, 5));
}

TEST_CASE("delta_A") {
  const CurveQ E = curve37a();
  const DcrisSplit s = dcris_split(E, kedlaya_frobenius(E, 5, 8));
  const Rational cf = compute_c_f(E, PointQ::affine(0, 0)).c;
  CHECK(cf == -1);
  const PadicNumber d = delta_A(s, cf);
  CHECK(d.congruent(-s.pairing_beta_alpha, 7));
  CHECK((2 * delta_A(s, 2 * cf)).congruent(d, 7));
  CHECK_THROWS_AS(delta_A(s, Rational(0)), InvalidInput);
}

TEST_CASE("serialization") {
  const FrobeniusData F = kedlaya_frobenius(curve37a(), 5, 7);
  const std::string text = serialize(F);
  const FrobeniusData back = deserialize_frobenius(text);
  CHECK(serialize(back) == text);
  CHECK(back.alpha.equals(F.alpha));
  CHECK(dcris_split(curve37a(), back).pairing_beta_alpha.equals(dcris_split(curve37a(), F).pairing_beta_alpha));
  CHECK_THROWS_AS(deserialize_frobenius("prpoint-frobenius 2\n5 7\n"), InvalidInput);
  CHECK_THROWS_AS(deserialize_frobenius(text.substr(0, text.size() / 2)), InvalidInput);
  // a corrupted entry breaks det F = p
  std::string bad = text;
  bad.replace(bad.find("U 1"), 3, "U 2");
  CHECK_THROWS_AS(deserialize_frobenius(bad), InvalidInput);
}
