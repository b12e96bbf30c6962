#include <climits>
#include <random>

#include "doctest.h"
#include "prpoint/errors.hpp"
#include "prpoint/overconvergent.hpp"

using namespace prpoint;

namespace {

CurveQ curve37a() { return CurveQ({0, 0, 1, -1, 0}, 37); }
CurveQ curve43a() { return CurveQ({0, 1, 1, 0, 0}, 43); }

EigenSymbol calibrated(const CurveQ& E) {
  return calibrate(eigen_symbol(build_space(E.conductor()), E, 1), E);
}

struct Setup {
  EigenSymbol phi;
  HeckeRoots roots;
  StabilizedSymbol sa, sb;
  OCSymbol alpha, beta;  // eigenprojected lifts
};

Setup make_setup(const CurveQ& E, Int p, int M) {
  Setup s;
  s.phi = calibrated(E);
  s.roots = hecke_roots(E, p, M + 8);
  s.sa = alpha_stabilize(s.phi, s.roots, M + 6);
  s.sb = beta_stabilize(s.phi, s.roots, M + 6);
  s.alpha = up_eigenproject(lift_to_distributions(s.sa, M), 4);
  s.beta = up_eigenproject(lift_to_distributions(s.sb, M), 4);
  return s;
}

const Setup& setup37() {
  static const Setup s = make_setup(curve37a(), 5, 6);
  return s;
}

const Setup& setup43() {
  static const Setup s = make_setup(curve43a(), 5, 6);
  return s;
}

bool same_mod(const FiniteDistribution& a, const FiniteDistribution& b, int prec) {
  const Int m = modarith::ipow(a.p, prec);
  for (size_t j = 0; j < a.t.size(); ++j)
    if (modarith::reduce(a.t[j] - b.t[j], m) != 0) return false;
  return true;
}

FiniteDistribution minus(FiniteDistribution a, const FiniteDistribution& b) {
  const Int m = modarith::ipow(a.p, a.W);
  for (size_t j = 0; j < a.t.size(); ++j) a.t[j] = modarith::reduce(a.t[j] - b.t[j], m);
  return a;
}

FiniteDistribution plus(FiniteDistribution a, const FiniteDistribution& b) {
  const Int m = modarith::ipow(a.p, a.W);
  for (size_t j = 0; j < a.t.size(); ++j) a.t[j] = modarith::reduce(a.t[j] + b.t[j], m);
  return a;
}

Rational random_cusp(std::mt19937& rng) {
  std::uniform_int_distribution<Int> num(-300, 300), den(1, 250);
  return make_rational(num(rng), den(rng));
}

}  // namespace

TEST_CASE("p-stabilization") {
  const Setup& s = setup37();
  CHECK(stabilization_defect(s.sa) == INT_MAX);
  CHECK(stabilization_defect(s.sb) == INT_MAX);
  // a wrong eigenvalue is detected
  const StabilizedSymbol bad = p_stabilize(s.phi, s.roots.alpha + PadicNumber::exact(5, 1), 10);
  CHECK(stabilization_defect(bad) == 0);
  CHECK(s.sa.level() == 185);
  CHECK_THROWS_AS(p_stabilize(s.phi, PadicNumber::exact(37, 2), 5), BadReductionError);
  // phi_alpha{r} = c_cal (phi{r} - alpha^-1 phi{5r})
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Rational r = random_cusp(rng);
    const PadicNumber expect = PadicNumber::exact(5, calibrated_value(s.phi, r)) -
                               PadicNumber::exact(5, calibrated_value(s.phi, 5 * r)) / s.roots.alpha;
    CHECK(s.sa.value(r).congruent(expect, 8));
  }
}

TEST_CASE("lifting") {
  const Setup& s = setup37();
  const OCSymbol lift = lift_to_distributions(s.sa, 6);
  CHECK(lift.W == 9);
  CHECK(manin_defect(lift) == lift.W);
  CHECK(lift.ledger.floor() >= 6);
  CHECK_THROWS_AS(lift_to_distributions(s.sa, 20), PrecisionError);
  CHECK_THROWS_AS(oc_context(37, 5, 8), InvalidInput);
  // moment 0 of every path value is the stabilized symbol
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Rational r = random_cusp(rng);
    const FiniteDistribution nu = lift.evaluate(r);
    CHECK((lift.scale * nu.moment(0)).congruent(s.sa.value(r), 6));
  }
}

TEST_CASE("eigenprojection") {
  for (const Setup* s : {&setup37(), &setup43()})
    for (const OCSymbol* th : {&s->alpha, &s->beta}) {
      const int floor = th->ledger.floor();
      CHECK(floor >= 2);
      CHECK(manin_defect(*th) == th->W);
      CHECK(eigen_defect(*th) >= floor);
      CHECK_FALSE(th->ledger.residual_log.empty());
      // a fixed point: projecting again changes nothing to the floor
      const OCSymbol again = up_eigenproject(*th, 2);
      for (size_t x = 0; x < th->values.size(); ++x) {
        const FiniteDistribution a{th->p, th->W, th->values[x]}, b{th->p, th->W, again.values[x]};
        CHECK(same_mod(a, b, floor));
      }
    }
  CHECK(setup37().alpha.ledger.projection_loss == 0);
  CHECK(setup37().beta.ledger.projection_loss >= 1);
  CHECK_THROWS_AS(up_eigenproject(setup37().alpha, 0), InvalidInput);
}

TEST_CASE("invariance and U_p on random paths") {
  std::mt19937 rng(13);
  std::uniform_int_distribution<Int> small(-40, 40);
  for (const OCSymbol* th : {&setup37().alpha, &setup37().beta}) {
    const int floor = th->ledger.floor();
    const Int N = th->level, p = th->p;
    const Int lam = th->lambda.lift();
    for (int trial = 0; trial < 100; ++trial) {
      const Rational r = random_cusp(rng);
      // gamma in Gamma_0(N): theta(gamma D)|gamma = theta(D) for D = {r -> oo}
      Int b = small(rng), c = N * (1 + trial % 4), d = 1;
      while (std::gcd(c, d) != 1 || (1 + b * c) % d != 0) ++d;
      const Mat2 g{(1 + b * c) / d, b, c, d};
      const Rational gr = (g.a * r + g.b) / (g.c * r + g.d);
      const FiniteDistribution moved = minus(th->evaluate(gr), th->evaluate(make_rational(g.a, g.c)));
      CHECK(same_mod(act(moved, g), th->evaluate(r), floor));
      // U_p: sum_a theta{(r + a)/p -> oo} | [[1, a], [0, p]] = lambda theta{r -> oo}
      FiniteDistribution sum{p, th->W, std::vector<Int>(static_cast<size_t>(th->W), 0)};
      for (Int a = 0; a < p; ++a) sum = plus(sum, act(th->evaluate((r + a) / p), Mat2{1, a, 0, p}));
      FiniteDistribution rhs = th->evaluate(r);
      const Int m = modarith::ipow(p, th->W);
      for (Int& t : rhs.t) t = modarith::mulmod(t, modarith::reduce(lam, m), m);
      CHECK(same_mod(sum, rhs, floor));
    }
  }
}

TEST_CASE("alpha construction agrees with Riemann sums") {
  for (const Setup* s : {&setup37(), &setup43()}) {
    const PadicMeasure ref = stabilized_measure(s->phi, s->roots, 7, 5);
    const PadicMeasure mu = specialize_measure(s->alpha, 3);
    CHECK(mu.growth == 0);
    for (int n = 0; n <= 3; ++n) {
      const Int m = modarith::ipow(5, n);
      for (Int a = 0; a < m; ++a) {
        if (n > 0 && a % 5 == 0) continue;
        CHECK(mu.value(a, n).congruent(ref.value(a, n), 5));
      }
    }
    const LJet riemann = lp_jet(ref, 2, 5);
    const LJet oc = oc_jet(s->alpha, 2);
    for (int j = 0; j <= 2; ++j) CHECK(oc.coeffs[j].congruent(riemann.coeffs[j], 5));
  }
}

TEST_CASE("critical slope measure and jets") {
  for (const Setup* s : {&setup37(), &setup43()}) {
    const PadicMeasure ma = specialize_measure(s->alpha, 2);
    const PadicMeasure mb = specialize_measure(s->beta, 2);
    CHECK(mb.growth == 1);
    CHECK(distribution_defect(mb) == INT_MAX);
    // cross-stabilization on every character of conductor p
    for (int k = 1; k <= 3; ++k) {
      const TeichmullerCharacter eta{5, k};
      const PadicNumber lhs = s->roots.alpha * twisted_moment(ma, eta, 1);
      const PadicNumber rhs = s->roots.beta * twisted_moment(mb, eta, 1);
      CHECK(lhs.congruent(rhs, std::min(ma.precision, mb.precision) - 2));
    }
    // rank one: both jets vanish at s = 1 and have a nonzero derivative
    const LJet ja = oc_jet(s->alpha, 1), jb = oc_jet(s->beta, 1);
    CHECK(ja.coeffs[0].is_zero());
    CHECK(jb.coeffs[0].is_zero());
    CHECK_FALSE(ja.coeffs[1].is_zero());
    CHECK_FALSE(jb.coeffs[1].is_zero());
    CHECK(jb.coeffs[1].valuation() < 0);
  }
  CHECK_THROWS_AS(lp_jet(specialize_measure(setup37().beta, 3), 1, 1), SlopeError);
}

TEST_CASE("more working digits refine the critical jet") {
  const Setup& s = setup37();
  const OCSymbol wide = up_eigenproject(lift_to_distributions(s.sb, 6, 5), 4);
  const LJet a = oc_jet(s.beta, 2), b = oc_jet(wide, 2);
  for (int j = 0; j <= 2; ++j) {
    const int prec = std::min(a.coeffs[j].absolute_precision(), b.coeffs[j].absolute_precision());
    CHECK(a.coeffs[j].congruent(b.coeffs[j], prec));
  }
  CHECK(b.coeffs[1].absolute_precision() > a.coeffs[1].absolute_precision());
}

TEST_CASE("serialization") {
  const OCSymbol& th = setup37().beta;
  const std::string text = serialize(th);
  const OCSymbol back = deserialize_oc_symbol(text);
  CHECK(back.values == th.values);
  CHECK(back.W == th.W);
  CHECK(back.level == th.level);
  CHECK(back.scale.equals(th.scale));
  CHECK(back.lambda.equals(th.lambda));
  CHECK(back.ledger.to_string() == th.ledger.to_string());
  CHECK(serialize(back) == text);
  CHECK(oc_jet(back, 1).to_string() == oc_jet(th, 1).to_string());
  CHECK_THROWS_AS(deserialize_oc_symbol("prpoint-ocsymbol 9\n"), InvalidInput);
  CHECK_THROWS_AS(deserialize_oc_symbol(text.substr(0, text.size() / 2)), InvalidInput);
}
