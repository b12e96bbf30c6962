#include "prpoint/lp_ordinary.hpp"

#include <climits>

#include "prpoint/errors.hpp"

namespace prpoint {

using namespace modarith;

namespace {

// The residue r mod p^prec as a p-adic number of absolute precision prec.
PadicNumber from_residue(Int p, Int r, int prec) {
  r = reduce(r, ipow(p, prec));
  if (r == 0) return PadicNumber::zero_mod(p, prec);
  const int v = valuation(r, p);
  return PadicNumber::from_unit(p, r / ipow(p, v), v, prec - v);
}

Int residue_of(const BigInt& x, Int m) { return reduce(x, m); }

std::vector<Int> prime_factors(Int n) {
  std::vector<Int> out;
  for (Int q = 2; q * q <= n; ++q)
    if (n % q == 0) {
      out.push_back(q);
      while (n % q == 0) n /= q;
    }
  if (n > 1) out.push_back(n);
  return out;
}

}  // namespace

Int primitive_root_prime_power(Int p, int n) {
  if (p < 3 || !is_prime(p) || n < 1) throw InvalidInput("primitive root: need an odd prime and n >= 1");
  const auto qs = prime_factors(p - 1);
  Int g = 2;
  for (;; ++g) {
    bool ok = true;
    for (Int q : qs)
      if (powmod(g, (p - 1) / q, p) == 1) ok = false;
    if (ok) break;
  }
  if (n >= 2 && powmod(g, p - 1, p * p) == 1) g += p;
  return g;
}

PadicNumber PadicMeasure::value(Int a, int n) const {
  if (n < 0 || n > n_max) throw DepthError("interval deeper than the measure", n);
  const Int m = ipow(p, n);
  a = reduce(a, m);
  if (n > 0 && a % p == 0) throw InvalidInput("measure is supported on units");
  return scale * level_scale[n] * from_residue(p, raw[n][a], precision);
}

PadicMeasure operator+(const PadicMeasure& a, const PadicMeasure& b) {
  if (a.p != b.p || a.n_max != b.n_max || a.growth != b.growth)
    throw InvalidInput("measures differ in prime, depth or growth");
  for (int n = 0; n <= a.n_max; ++n)
    if (!a.level_scale[n].equals(b.level_scale[n])) throw InvalidInput("measures differ in level scaling");
  // fold the global scales into the residues
  int prec = std::min(a.precision, b.precision);
  for (const PadicNumber* s : {&a.scale, &b.scale}) {
    if (s->valuation() < 0) throw InvalidInput("measure scale must be integral to add");
    if (!s->is_exact_zero()) prec = std::min(prec, s->absolute_precision());
  }
  const Int m = ipow(a.p, prec);
  const Int sa = a.scale.is_exact_zero() ? 0 : a.scale.lift();
  const Int sb = b.scale.is_exact_zero() ? 0 : b.scale.lift();
  PadicMeasure out = a;
  out.precision = prec;
  out.scale = PadicNumber::exact(a.p, 1);
  for (int n = 0; n <= a.n_max; ++n)
    for (size_t i = 0; i < a.raw[n].size(); ++i)
      out.raw[n][i] = reduce(mulmod(reduce(a.raw[n][i], m), sa % m, m) + mulmod(reduce(b.raw[n][i], m), sb % m, m), m);
  return out;
}

int distribution_defect(const PadicMeasure& mu) {
  int defect = INT_MAX;
  for (int n = 0; n < mu.n_max; ++n) {
    const Int m = ipow(mu.p, n);
    for (Int a = 0; a < m; ++a) {
      if (n > 0 && a % mu.p == 0) continue;
      PadicNumber rhs = PadicNumber::exact_zero(mu.p);
      for (Int b = 0; b < mu.p; ++b) {
        const Int c = a + b * m;
        if (c % mu.p == 0) continue;
        rhs += mu.value(c, n + 1);
      }
      const PadicNumber diff = mu.value(a, n) - rhs;
      if (!diff.is_zero()) defect = std::min(defect, diff.valuation());
    }
  }
  return defect;
}

PadicMeasure stabilized_measure(const EigenSymbol& phi, const HeckeRoots& roots, int n_max, int M) {
  return stabilized_measure(phi, roots.alpha, n_max, M);
}

PadicMeasure stabilized_measure(const EigenSymbol& phi, const PadicNumber& lambda, int n_max, int M) {
  if (lambda.is_zero() || lambda.valuation() != 0)
    throw SlopeError("Riemann sums need the unit root; build positive-slope measures with the overconvergent module");
  if (!phi.c_cal) throw InvalidInput("stabilized_measure needs a calibrated symbol");
  if (n_max < 1 || M < 1) throw InvalidInput("depth and precision must be positive");
  const Int p = lambda.prime();
  const int prec = std::min(M, lambda.absolute_precision());
  const Int mod = ipow(p, prec);
  const Int linv = invmod(reduce(lambda.lift(), mod), mod);

  PadicMeasure mu;
  mu.p = p;
  mu.n_max = n_max;
  mu.precision = prec;
  mu.growth = 0;
  mu.scale = PadicNumber::exact(p, *phi.c_cal);
  mu.level_scale.assign(static_cast<size_t>(n_max) + 1, PadicNumber::exact(p, 1));
  mu.raw.resize(static_cast<size_t>(n_max) + 1);
  mu.raw[0].assign(1, 0);

  std::vector<Int> prev{residue_of(evaluate_int(phi, 0, 1), mod)};
  Int linv_n = 1;  // lambda^-n
  for (int n = 1; n <= n_max; ++n) {
    linv_n = mulmod(linv_n, linv, mod);
    const Int linv_n1 = mulmod(linv_n, linv, mod);
    const Int m = ipow(p, n), mprev = m / p;
    std::vector<Int> cur(static_cast<size_t>(m));
    auto& row = mu.raw[n];
    row.assign(static_cast<size_t>(m), 0);
    for (Int a = 0; a < m; ++a) {
      cur[a] = residue_of(evaluate_int(phi, a, m), mod);
      if (a % p == 0) continue;
      row[a] = reduce(mulmod(linv_n, cur[a], mod) - mulmod(linv_n1, prev[a % mprev], mod), mod);
    }
    prev = std::move(cur);
  }
  Int total = 0;
  for (Int a = 1; a < p; ++a) total = (total + mu.raw[1][a]) % mod;
  mu.raw[0][0] = total;
  return mu;
}

PadicNumber TeichmullerCharacter::operator()(Int a, int prec) const {
  if (reduce(a, p) == 0) return PadicNumber::exact_zero(p);
  if (trivial()) return PadicNumber::exact(p, 1);
  const long e = ((k % (p - 1)) + (p - 1)) % (p - 1);
  return teichmuller(a, p, prec).pow(e);
}

PadicNumber twisted_moment(const PadicMeasure& mu, const TeichmullerCharacter& eta, int r, int j) {
  if (eta.p != mu.p) throw InvalidInput("character and measure have different primes");
  if (r < 0 || r > mu.n_max) throw DepthError("character conductor exceeds the measure depth", r);
  if (j < 1) throw InvalidInput("twisted_moment: j must be >= 1");
  if (r == 0) {
    if (!eta.trivial() || j != 1) throw InvalidInput("r = 0 only integrates the trivial character");
    return mu.total();
  }
  const Int m = ipow(mu.p, r);
  const int prec = mu.precision + 2;
  PadicNumber sum = PadicNumber::exact_zero(mu.p);
  for (Int a = 1; a < m; ++a) {
    if (a % mu.p == 0) continue;
    PadicNumber term = eta(a, prec) * mu.value(a, r);
    if (j > 1) term = term * PadicNumber::exact(mu.p, a).pow(j - 1);
    sum += term;
  }
  return sum;
}

std::string LJet::to_string() const {
  std::string s = std::to_string(center) + ", [";
  for (size_t i = 0; i < coeffs.size(); ++i) {
    if (i) s += ", ";
    s += coeffs[i].to_string();
  }
  return s + "]";
}

LJet lp_jet(const PadicMeasure& mu, int J, int M, int tame) {
  if (mu.growth != 0)
    throw SlopeError("Riemann sums do not converge for unbounded measures; integrate moments instead");
  if (J < 0 || M < 1) throw InvalidInput("lp_jet: need J >= 0 and M >= 1");
  if (mu.n_max < M + 2) throw DepthError("lp_jet needs n_max >= M + 2", M + 2);
  const Int p = mu.p;
  const int n = mu.n_max;
  const int prec = std::min(mu.precision, M);
  const Int mod = ipow(p, prec);
  const Int pn = ipow(p, n);

  const Int g = primitive_root_prime_power(p, n);
  const Int log_g = padic_log(PadicNumber(p, g, prec + 1)).lift() % mod;
  std::vector<Int> omega(static_cast<size_t>(p), 0);
  const TeichmullerCharacter chi{p, tame};
  for (Int a = 1; a < p; ++a) omega[a] = chi(a, prec).lift() % mod;

  std::vector<Int> sums(static_cast<size_t>(J) + 1, 0);
  const auto& row = mu.raw[n];
  Int x = 1;
  const Int order = pn / p * (p - 1);
  for (Int k = 0; k < order; ++k) {
    const Int L = mulmod(k % mod, log_g, mod);
    Int w = mulmod(reduce(row[x], mod), omega[x % p], mod);
    for (int j = 0; j <= J; ++j) {
      sums[j] = (sums[j] + w) % mod;
      w = mulmod(w, L, mod);
    }
    x = mulmod(x, g, pn);
  }

  LJet jet;
  jet.p = p;
  jet.tame = tame;
  Int fact = 1;
  for (int j = 0; j <= J; ++j) {
    if (j > 1) fact *= j;
    jet.coeffs.push_back(mu.scale * mu.level_scale[n] * from_residue(p, sums[j], prec) / fact);
  }
  return jet;
}

LJet naive_base_change_jet(const LJet& f, const LJet& g) {
  if (f.center != g.center) throw InvalidInput("jets have different centers");
  if (f.p != g.p) throw InvalidInput("jets have different primes");
  if (f.tame != g.tame) throw InvalidInput("jets lie in different tame components");
  LJet out;
  out.p = f.p;
  out.center = f.center;
  out.tame = f.tame;
  const size_t len = std::min(f.coeffs.size(), g.coeffs.size());
  for (size_t k = 0; k < len; ++k) {
    PadicNumber c = PadicNumber::exact_zero(f.p);
    for (size_t i = 0; i <= k; ++i) c += f.coeffs[i] * g.coeffs[k - i];
    out.coeffs.push_back(c);
  }
  return out;
}

}  // namespace prpoint
