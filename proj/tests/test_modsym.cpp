#include <numeric>
#include <random>

#include "doctest.h"
#include "prpoint/errors.hpp"
#include "prpoint/modsym.hpp"

using namespace prpoint;

namespace {

CurveQ curve37a() { return CurveQ({0, 0, 1, -1, 0}, 37); }
CurveQ curve43a() { return CurveQ({0, 1, 1, 0, 0}, 43); }
CurveQ curve53a() { return CurveQ({1, -1, 1, 0, 0}, 53); }
CurveQ curve11a() { return CurveQ({0, -1, 1, -10, -20}, 11); }

std::vector<Int> primes_of(Int N) {
  std::vector<Int> ps;
  for (Int q = 2; q <= N; ++q)
    if (N % q == 0) {
      ps.push_back(q);
      while (N % q == 0) N /= q;
    }
  return ps;
}

int legendre_small(Int a, Int q) {
  a = ((a % q) + q) % q;
  if (a == 0) return 0;
  for (Int x = 1; x < q; ++x)
    if (x * x % q == a) return 1;
  return -1;
}

Int euler_phi(Int n) {
  Int r = 0;
  for (Int k = 1; k <= n; ++k)
    if (std::gcd(k, n) == 1) ++r;
  return r;
}

// 2g + c - 1 from the genus formula for X_0(N).
Int expected_dimension(Int N) {
  Rational mu = N;
  for (Int q : primes_of(N)) mu *= make_rational(q + 1, q);
  Int nu2 = N % 4 == 0 ? 0 : 1, nu3 = N % 9 == 0 ? 0 : 1;
  for (Int q : primes_of(N)) {
    nu2 *= q == 2 ? 1 : 1 + legendre_small(-1, q);
    nu3 *= q == 3 ? 1 : (q == 2 ? 0 : 1 + legendre_small(-3, q));
  }
  Int cusps = 0;
  for (Int d = 1; d <= N; ++d)
    if (N % d == 0) cusps += euler_phi(std::gcd(d, N / d));
  const Rational g = 1 + mu / 12 - make_rational(nu2, 4) - make_rational(nu3, 3) - make_rational(cusps, 2);
  REQUIRE(g.get_den() == 1);
  return 2 * g.get_num().get_si() + cusps - 1;
}

Int index_formula(Int N) {
  Rational mu = N;
  for (Int q : primes_of(N)) mu *= make_rational(q + 1, q);
  return mu.get_num().get_si();
}

}  // namespace

TEST_CASE("Manin space dimensions") {
  const ManinSpace S = build_space(37);
  CHECK(S.p1.size() == 38);
  CHECK(S.dim == 5);
  CHECK(build_space(11).dim == 3);
  for (Int N : {2, 11, 12, 27, 36, 37, 43, 53, 100, 185, 259}) {
    const ManinSpace M = build_space(N);
    CHECK(M.p1.size() == index_formula(N));
    CHECK(M.dim == expected_dimension(N));
  }
}

TEST_CASE("Hecke operators") {
  const ManinSpace S = build_space(37);
  const QMatrix T2 = hecke_operator(S, 2), T3 = hecke_operator(S, 3), T5 = hecke_operator(S, 5);
  CHECK(T2 * T3 == T3 * T2);
  CHECK(T2 * T5 == T5 * T2);
  CHECK(hecke_operator(S, 37) * T2 == T2 * hecke_operator(S, 37));
  // trace on the plus part minus the Eisenstein eigenvalue 3 = a_2(37a) + a_2(37b)
  const QMatrix star = star_involution(S);
  QMatrix plus = QMatrix::identity(S.dim);
  for (int i = 0; i < S.dim; ++i)
    for (int j = 0; j < S.dim; ++j) plus(i, j) = (plus(i, j) + star(i, j)) / 2;
  CHECK((T2 * plus).trace() - 3 == -2);
  // the boundary piece carries eigenvalue ell + 1
  for (Int ell : {2, 3, 5, 7}) CHECK(hecke_operator(S, ell).scaled_identity_minus(ell + 1).rank() < S.dim);
}

TEST_CASE("eigen symbol on 37a") {
  const ManinSpace S = build_space(37);
  const CurveQ E = curve37a();
  const EigenSymbol phi = eigen_symbol(S, E, 1);
  BigInt g = 0;
  for (Int v : phi.values) g = gcd(g, BigInt(static_cast<long>(v)));
  CHECK(g == 1);
  // Manin relations on the values
  for (int i = 0; i < S.p1.size(); ++i) {
    const auto [c, d] = S.p1[i];
    CHECK(phi.value(c, d) + phi.value(d, -c) == 0);
    CHECK(phi.value(c, d) + phi.value(d, -c - d) + phi.value(-c - d, c) == 0);
    CHECK(phi.value(-c, d) == phi.value(c, d));
  }
  // eigen residual on the quotient: w T = a_ell w, evaluated on all labels
  for (Int ell : {2, 3, 5, 7, 11, 13}) {
    const QMatrix T = hecke_operator(S, ell);
    const Int a = count_points_ap(E, ell);
    for (int j = 0; j < S.dim; ++j) {
      Rational lhs = 0;
      for (int k = 0; k < S.dim; ++k) lhs += T(k, j) * Rational(static_cast<long>(phi.values[S.basis[k]]));
      CHECK(lhs == a * phi.values[S.basis[j]]);
    }
  }
  const EigenSymbol minus = eigen_symbol(S, E, -1);
  for (int i = 0; i < S.p1.size(); ++i) {
    const auto [c, d] = S.p1[i];
    CHECK(minus.value(-c, d) == -minus.value(c, d));
  }
  CHECK_THROWS_AS(eigen_symbol(S, curve43a(), 1), InvalidInput);
}

TEST_CASE("evaluation") {
  const ManinSpace S = build_space(37);
  const CurveQ E = curve37a();
  const EigenSymbol phi = eigen_symbol(S, E, 1);
  CHECK(evaluate_int(phi, 1, 0) == 0);
  CHECK(evaluate(phi, 0) == 0);  // L(E,1) = 0
  std::mt19937 rng(5);
  std::uniform_int_distribution<Int> num(-200, 200), den(1, 150);
  for (int trial = 0; trial < 100; ++trial) {
    Rational r(num(rng), den(rng));
    r.canonicalize();
    for (Int ell : {2, 3}) {
      Rational lhs = evaluate(phi, r * ell);
      for (Int b = 0; b < ell; ++b) lhs += evaluate(phi, (r + b) / ell);
      CHECK(lhs == count_points_ap(E, ell) * evaluate(phi, r));
    }
    // invariance under Gamma_0(37): phi{gamma r -> gamma oo} = phi{r -> oo}
    const Int b = num(rng), c = 37 * (den(rng) % 5 + 1);
    Int a = 1, d = 1;
    // a d - b c = 1 with d coprime to c
    for (d = 1; std::gcd(d, c) != 1 || (1 + b * c) % d != 0; ++d) {
    }
    a = (1 + b * c) / d;
    const auto act = [&](const Rational& z) -> Rational { return (a * z + b) / (c * z + d); };
    const Rational lhs = evaluate_path(phi, act(r), make_rational(a, c));
    CHECK(lhs == evaluate(phi, r));
    // translation by 1
    CHECK(evaluate(phi, r + 1) == evaluate(phi, r));
  }
}

TEST_CASE("calibration") {
  const ManinSpace S = build_space(37);
  const CurveQ E = curve37a();
  const EigenSymbol phi = eigen_symbol(S, E, 1);
  const EigenSymbol cal = calibrate(phi, E);
  REQUIRE(cal.c_cal.has_value());
  CHECK(calibrate_with(phi, E, 8).c_cal == cal.c_cal);
  CHECK(calibrate_with(phi, E, 13).c_cal == cal.c_cal);
  CHECK(calibrate(cal, E).c_cal == cal.c_cal);
  EigenSymbol scaled = phi;
  for (Int& v : scaled.values) v *= 7;
  CHECK(*calibrate(scaled, E).c_cal == *cal.c_cal / 7);
  for (const CurveQ& F : {curve43a(), curve53a()}) {
    const EigenSymbol c = calibrate(eigen_symbol(build_space(F.conductor()), F, 1), F);
    CHECK(abs(c.c_cal->get_num()) <= 1000);
    CHECK(c.c_cal->get_den() <= 1000);
  }
  // rank 0 curve: calibrate through L(E,1) twists as well
  const CurveQ T = curve11a();
  CHECK_NOTHROW(calibrate(eigen_symbol(build_space(11), T, 1), T));
}

TEST_CASE("quadratic twists") {
  const ManinSpace S = build_space(37);
  const CurveQ E = curve37a();
  const EigenSymbol phi = eigen_symbol(S, E, 1);
  const EigenSymbol same = twist_symbol(phi, 1);
  CHECK(same.values == phi.values);
  CHECK_THROWS_AS(twist_symbol(phi, -4 * 37, 0), InvalidInput);
  CHECK_THROWS_AS(twist_symbol(phi, 5, 5), InvalidInput);
  std::mt19937 rng(9);
  std::uniform_int_distribution<Int> num(-60, 60), den(1, 40);
  for (Int d : {5, -3, 8}) {
    const EigenSymbol tw = twist_symbol(phi, d);
    for (int trial = 0; trial < 20; ++trial) {
      Rational r(num(rng), den(rng));
      r.canonicalize();
      for (Int ell : {2, 3, 7}) {
        if (std::abs(d) % ell == 0) continue;
        Rational lhs = evaluate(tw, r * ell);
        for (Int b = 0; b < ell; ++b) lhs += evaluate(tw, (r + b) / ell);
        CHECK(lhs == kronecker(d, ell) * count_points_ap(E, ell) * evaluate(tw, r));
      }
    }
  }
  // double twist by a prime-conductor character: Gauss-sum identity
  for (Int q : {5, -3, 13}) {
    const EigenSymbol tt = twist_symbol(twist_symbol(phi, q), q);
    const Int Q = std::abs(q);
    const int chim1 = kronecker(q, -1);
    for (int trial = 0; trial < 20; ++trial) {
      Rational r(num(rng), den(rng));
      r.canonicalize();
      Rational rhs = Q * evaluate(phi, r);
      for (Int c = 0; c < Q; ++c) rhs -= evaluate(phi, r - make_rational(c, Q));
      CHECK(evaluate(tt, r) == chim1 * rhs);
    }
  }
}

TEST_CASE("serialization") {
  const ManinSpace S = build_space(37);
  const CurveQ E = curve37a();
  const EigenSymbol cal = calibrate(eigen_symbol(S, E, 1), E);
  const EigenSymbol back = deserialize_eigen_symbol(serialize(cal));
  CHECK(back.values == cal.values);
  CHECK(back.c_cal == cal.c_cal);
  CHECK(back.level == 37);
  for (Int a = -20; a <= 20; ++a) CHECK(evaluate(back, make_rational(a, 17)) == evaluate(cal, make_rational(a, 17)));
  CHECK_THROWS_AS(deserialize_eigen_symbol("prpoint-eigensymbol 2\n"), InvalidInput);
  CHECK_THROWS_AS(deserialize_eigen_symbol("garbage"), InvalidInput);
}

TEST_CASE("Kronecker and discriminants") {
  CHECK(is_fundamental_discriminant(5));
  CHECK(is_fundamental_discriminant(8));
  CHECK(is_fundamental_discriminant(-4));
  CHECK(is_fundamental_discriminant(-3));
  CHECK_FALSE(is_fundamental_discriminant(9));
  CHECK_FALSE(is_fundamental_discriminant(4));
  CHECK_FALSE(is_fundamental_discriminant(12 * 4));
  for (Int n = 1; n < 50; ++n) CHECK(kronecker(5, n) == legendre_small(n, 5));
}
