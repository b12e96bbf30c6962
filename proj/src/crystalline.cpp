#include "prpoint/crystalline.hpp"

#include <cmath>
#include <sstream>

#include "prpoint/errors.hpp"

namespace prpoint {

namespace {

using Poly = std::vector<BigInt>;  // low degree first, residues mod q

// Fixed-modulus arithmetic for the reduction. Every coefficient is stored as
// p^shift times its true value modulo q = p^W; the reduction only divides by
// odd integers, whose p-parts Kedlaya's bound keeps below p^shift.
struct Reducer {
  Int p;
  int W, shift;
  BigInt q;

  BigInt mod(const BigInt& a) const {
    BigInt r = a % q;
    if (r < 0) r += q;
    return r;
  }

  BigInt inv(const BigInt& a) const {
    BigInt r;
    if (mpz_invert(r.get_mpz_t(), mod(a).get_mpz_t(), q.get_mpz_t()) == 0)
      throw ConsistencyError("crystalline: non-invertible unit");
    return r;
  }

  BigInt rat(const Rational& x) const { return mod(x.get_num() * inv(x.get_den())); }

  // x / n for an integer n whose p-part must divide the stored residue.
  BigInt divide(const BigInt& x, Int n) const {
    const int v = modarith::valuation(n, p);
    BigInt pv;
    mpz_ui_pow_ui(pv.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(v));
    const BigInt r = mod(x);
    if (r % pv != 0) throw ConsistencyError("crystalline: reduction denominator exceeds the working shift");
    return mod(BigInt(r / pv) * inv(BigInt(n) / pv));
  }

  Poly mul(const Poly& a, const Poly& b) const {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    }
    for (auto& x : c) x = mod(x);
    return c;
  }

  void add_into(Poly& a, const Poly& b) const {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (size_t i = 0; i < b.size(); ++i) a[i] = mod(a[i] + b[i]);
  }

  // Quotient and remainder by g, whose leading coefficient is a unit.
  std::pair<Poly, Poly> divmod(Poly a, const Poly& g) const {
    const size_t dg = g.size() - 1;
    if (a.size() <= dg) return {{}, a};
    const BigInt lead_inv = inv(g.back());
    Poly quo(a.size() - dg, 0);
    for (size_t k = a.size(); k-- > dg;) {
      const BigInt c = mod(a[k] * lead_inv);
      quo[k - dg] = c;
      if (c == 0) continue;
      for (size_t i = 0; i <= dg; ++i) a[k - dg + i] = mod(a[k - dg + i] - c * g[i]);
    }
    a.resize(dg);
    return {quo, a};
  }
};

Poly derivative(const Poly& a, const Reducer& R) {
  if (a.size() <= 1) return {};
  Poly d(a.size() - 1);
  for (size_t i = 1; i < a.size(); ++i) d[i - 1] = R.mod(a[i] * static_cast<long>(i));
  return d;
}

// R g + S g' = 1 over Q with deg R <= 1, deg S <= 2 (a 5x5 linear system).
std::pair<std::vector<Rational>, std::vector<Rational>> bezout(const std::vector<Rational>& g,
                                                               const std::vector<Rational>& dg) {
  std::vector<std::vector<Rational>> A(5, std::vector<Rational>(6, Rational(0)));
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 4; ++i) A[i + j][j] += g[i];
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) A[i + j][2 + j] += dg[i];
  A[0][5] = 1;
  for (int c = 0; c < 5; ++c) {
    int piv = c;
    while (piv < 5 && A[piv][c] == 0) ++piv;
    if (piv == 5) throw BadReductionError("crystalline: cubic has a repeated root");
    std::swap(A[c], A[piv]);
    for (int r = 0; r < 5; ++r) {
      if (r == c || A[r][c] == 0) continue;
      const Rational f = A[r][c] / A[c][c];
      for (int k = c; k < 6; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<Rational> R(2), S(3);
  for (int j = 0; j < 2; ++j) R[j] = A[j][5] / A[j][j];
  for (int j = 0; j < 3; ++j) S[j] = A[2 + j][5] / A[2 + j][2 + j];
  return {R, S};
}

PadicNumber from_residue(Int p, const BigInt& r, int prec) {
  const Int m = modarith::ipow(p, prec);
  const Int x = modarith::reduce(r, m);
  if (x == 0) return PadicNumber::zero_mod(p, prec);
  const int v = modarith::valuation(x, p);
  return PadicNumber::from_unit(p, x / modarith::ipow(p, v), v, prec - v);
}

int floor_log(Int n, Int p) {
  int e = 0;
  for (Int r = p; r <= n; r *= p) ++e;
  return e;
}

// Derived data and the internal invariant checks.
void complete(FrobeniusData& out) {
  const Int p = out.p;
  const int M = out.precision;
  out.trace = out.F[0][0] + out.F[1][1];
  out.det = out.F[0][0] * out.F[1][1] - out.F[0][1] * out.F[1][0];
  if (!out.det.congruent(PadicNumber::exact(p, p), M))
    throw ConsistencyError("crystalline: det F != p; [Fu, Fv] = p[u, v] fails");
  const Int m = modarith::ipow(p, M);
  Int t = out.trace.is_zero() ? 0 : modarith::reduce(out.trace.lift(), m);
  if (t > m / 2) t -= m;
  if (static_cast<double>(t) * static_cast<double>(t) > 4.0 * static_cast<double>(p))
    throw ConsistencyError("crystalline: trace of Frobenius outside the Hasse interval");

  if (t % p != 0) {
    // unit root by Newton on X^2 - tr X + det
    PadicNumber a(p, modarith::reduce(t, p), M);
    for (int it = 0; it < M + 2; ++it) a = a - (a * a - out.trace * a + out.det) / (2 * a - out.trace);
    out.alpha = a;
    out.beta = out.det / a;
    for (auto [lam, vec] : {std::pair{&out.alpha, &out.v_alpha}, std::pair{&out.beta, &out.v_beta}}) {
      // kernel of F - lambda: (F01, lambda - F00) or (lambda - F11, F10)
      DeRhamClass u{out.F[0][1], *lam - out.F[0][0]};
      DeRhamClass w{*lam - out.F[1][1], out.F[1][0]};
      auto val = [](const DeRhamClass& c) {
        int v = INT32_MAX;
        for (const auto& x : c)
          if (!x.is_zero()) v = std::min(v, x.valuation());
        return v;
      };
      *vec = val(u) <= val(w) ? u : w;
    }
  }
}

}  // namespace

PadicNumber de_rham_pairing(const DeRhamClass& u, const DeRhamClass& v) { return u[0] * v[1] - u[1] * v[0]; }

DeRhamClass FrobeniusData::apply(const DeRhamClass& u) const {
  return {F[0][0] * u[0] + F[0][1] * u[1], F[1][0] * u[0] + F[1][1] * u[1]};
}

std::string FrobeniusData::to_string() const {
  return "[[" + F[0][0].to_string() + ", " + F[0][1].to_string() + "], [" + F[1][0].to_string() + ", " +
         F[1][1].to_string() + "]]";
}

FrobeniusData kedlaya_frobenius(const CurveQ& E, Int p, int M) {
  if (p < 3 || !modarith::is_prime(p)) throw InvalidInput("kedlaya_frobenius: p must be an odd prime");
  if (!E.has_good_reduction(p)) throw BadReductionError("kedlaya_frobenius: bad reduction at p");
  if (M < 1 || M > modarith::max_precision(p) - 1) throw InvalidInput("kedlaya_frobenius: precision out of range");

  // Terms k < N of the binomial series carry p^(k+1); the reduction of
  // y^-(2s+1) and of x^m loses at most floor(log_p) of the largest odd
  // divisor met, so shift digits absorb every denominator.
  int N = M + 2, shift = 0;
  for (int it = 0; it < 4; ++it) {
    const Int top = p * (2 * N + 1) + 6 * p * N + 4 * p;
    shift = floor_log(top, p) + 1;
    N = M + shift + 2;
  }
  Reducer R{p, M + 3 * shift + 2, shift, 0};
  mpz_ui_pow_ui(R.q.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(R.W));

  const std::vector<Rational> gq{Rational(E.b6()), Rational(2 * E.b4()), Rational(E.b2()), Rational(4)};
  const std::vector<Rational> dgq{Rational(2 * E.b4()), Rational(2 * E.b2()), Rational(12)};
  const auto [Rq, Sq] = bezout(gq, dgq);
  for (const auto* v : {&Rq, &Sq})
    for (const Rational& c : *v)
      if (modarith::valuation(BigInt(c.get_den()), p) > 0)
        throw BadReductionError("kedlaya_frobenius: discriminant of the cubic vanishes at p");
  Poly g, dg, S;
  for (const auto& c : gq) g.push_back(R.rat(c));
  for (const auto& c : dgq) dg.push_back(R.rat(c));
  for (const auto& c : Sq) S.push_back(R.rat(c));

  // Ex = g(x^p) - g(x)^p, divisible by p.
  Poly gp(static_cast<size_t>(3 * p) + 1, 0);
  for (int i = 0; i < 4; ++i) gp[static_cast<size_t>(i * p)] = g[i];
  Poly gpow{1};
  for (Int i = 0; i < p; ++i) gpow = R.mul(gpow, g);
  Poly Ex = gp;
  for (size_t i = 0; i < gpow.size(); ++i) Ex[i] = R.mod(Ex[i] - gpow[i]);

  BigInt scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(shift + 1));

  FrobeniusData out;
  out.p = p;
  out.precision = M;
  const size_t smax = static_cast<size_t>((p * (2 * N - 1) - 1) / 2);
  for (int i = 0; i < 2; ++i) {
    // F(x^i dx/y) = p x^(p(i+1)-1) sum_k binom(-1/2, k) Ex^k y^(-p(2k+1)) dx
    std::vector<Poly> bucket(smax + 1);
    Poly Ek{1};
    Rational binom(1);
    for (int k = 0; k < N; ++k) {
      Poly term(static_cast<size_t>(p * (i + 1) - 1), 0);
      const BigInt c = R.mod(scale * R.rat(binom));
      for (const BigInt& e : Ek) term.push_back(R.mod(c * e));
      bucket[static_cast<size_t>((p * (2 * k + 1) - 1) / 2)] = std::move(term);
      Ek = R.mul(Ek, Ex);
      binom *= make_rational(-(2 * k + 1), 2 * (k + 1));
    }
    // A dx / y^(2s+1) with A = U g + V g' is cohomologous to (U + 2V'/(2s-1)) dx / y^(2s-1).
    for (size_t s = smax; s >= 1; --s) {
      Poly& A = bucket[s];
      if (A.empty()) continue;
      const Poly V = R.divmod(R.mul(A, S), g).second;
      Poly rest = A;
      const Poly Vdg = R.mul(V, dg);
      for (size_t j = 0; j < Vdg.size(); ++j) {
        if (j >= rest.size()) rest.resize(j + 1, 0);
        rest[j] = R.mod(rest[j] - Vdg[j]);
      }
      auto [U, rem] = R.divmod(rest, g);
      for (const BigInt& r : rem)
        if (r != 0) throw ConsistencyError("crystalline: Bezout decomposition failed");
      Poly dV = derivative(V, R);
      for (auto& c : dV) c = R.divide(2 * c, static_cast<Int>(2 * s - 1));
      R.add_into(U, dV);
      R.add_into(bucket[s - 1], U);
      A.clear();
    }
    // x^m dx/y for m >= 2 via d(x^(m-2) y) = ((m-2) x^(m-3) g + x^(m-2) g'/2) dx/y.
    Poly P = bucket[0];
    const BigInt half = R.inv(2);
    for (size_t m = P.size(); m-- > 2;) {
      if (P[m] == 0) continue;
      Poly Q(m + 1, 0);
      for (size_t j = 0; j < 4; ++j)
        if (m >= 3) Q[m - 3 + j] = R.mod(Q[m - 3 + j] + static_cast<long>(m - 2) * g[j]);
      for (size_t j = 0; j < 3; ++j) Q[m - 2 + j] = R.mod(Q[m - 2 + j] + half * dg[j]);
      // leading coefficient 2(2m - 1)
      const BigInt c = R.mod(R.divide(P[m], static_cast<Int>(2 * m - 1)) * half);
      for (size_t j = 0; j <= m; ++j) P[j] = R.mod(P[j] - c * Q[j]);
      if (P[m] != 0) throw ConsistencyError("crystalline: x-power reduction failed");
    }
    P.resize(2, 0);
    BigInt pe;
    mpz_ui_pow_ui(pe.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(shift));
    for (int r = 0; r < 2; ++r) {
      if (P[r] % pe != 0) throw ConsistencyError("crystalline: Frobenius matrix is not integral");
      out.F[r][i] = from_residue(p, BigInt(P[r] / pe), M);
    }
  }

  complete(out);
  return out;
}

DcrisSplit dcris_split(const CurveQ& E, const FrobeniusData& F) {
  if (F.alpha.prime() == 0 || F.alpha.is_zero() || F.alpha.valuation() != 0)
    throw NotOrdinaryError("dcris_split needs an ordinary prime");
  const Int p = F.p;
  DcrisSplit s;
  s.p = p;
  s.precision = F.precision;
  s.alpha = F.alpha;
  s.beta = F.beta;
  const DeRhamClass& va = F.v_alpha;
  const DeRhamClass& vb = F.v_beta;
  // omega = a va + b vb
  const PadicNumber D = de_rham_pairing(va, vb);
  const PadicNumber a = vb[1] / D, b = -va[1] / D;
  s.omega_alpha = {a * va[0], a * va[1]};
  s.omega_beta = {b * vb[0], b * vb[1]};
  s.pairing_beta_alpha = de_rham_pairing(s.omega_beta, s.omega_alpha);
  const PadicNumber ab = de_rham_pairing(s.omega_alpha, s.omega_beta);
  s.omega_star = {s.omega_beta[0] / ab, s.omega_beta[1] / ab};
  s.s2 = va[0] / va[1];
  s.e2 = PadicNumber::exact(p, Rational(E.b2())) - 12 * s.s2;
  return s;
}

std::string serialize(const FrobeniusData& F) {
  std::ostringstream out;
  out << "prpoint-frobenius 1\n" << F.p << ' ' << F.precision << '\n';
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out << padic_record(F.F[i][j]) << '\n';
  return out.str();
}

FrobeniusData deserialize_frobenius(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "prpoint-frobenius" || version != 1) throw InvalidInput("not a version-1 Frobenius record");
  FrobeniusData F;
  in >> F.p >> F.precision;
  if (!in || F.p < 3 || !modarith::is_prime(F.p) || F.precision < 1) throw InvalidInput("corrupt Frobenius header");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) F.F[i][j] = read_padic_record(in, F.p);
  try {
    complete(F);
  } catch (const ConsistencyError&) {
    throw InvalidInput("Frobenius record fails the det/trace check");
  }
  return F;
}

PadicNumber delta_A(const DcrisSplit& split, const Rational& c_f) {
  if (c_f == 0) throw InvalidInput("delta_A: c_f must be nonzero");
  return split.pairing_beta_alpha / PadicNumber::exact(split.p, c_f);
}

}  // namespace prpoint
