#include "prpoint/verify.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "prpoint/errors.hpp"
#include "prpoint/padic_height.hpp"

namespace prpoint {

namespace fs = std::filesystem;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "PASS";
    case Verdict::Fail:
      return "FAIL";
    case Verdict::Inconclusive:
      return "INCONCLUSIVE";
  }
  return "?";
}

int exit_code(Verdict v) { return static_cast<int>(v); }

ArtifactCache::ArtifactCache(std::string dir) : dir_(std::move(dir)) {}

std::optional<std::string> ArtifactCache::load(const std::string& key) const {
  if (!enabled()) return std::nullopt;
  std::ifstream in(fs::path(dir_) / key, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void ArtifactCache::store(const std::string& key, const std::string& text) const {
  if (!enabled()) return;
  fs::create_directories(dir_);
  // write then rename so concurrent readers never see a partial file
  const fs::path target = fs::path(dir_) / key;
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw InvalidInput("cannot write cache file " + tmp.string());
  }
  fs::rename(tmp, target);
}

namespace {

std::string curve_key(const CurveQ& E) {
  std::string k = "N" + std::to_string(E.conductor());
  for (Int a : E.ainvs()) k += "_" + std::to_string(a);
  return k;
}

// Loads a cached artifact, recomputing (and overwriting) when the file is
// missing, from another format version, or corrupt.
template <class T, class Read, class Build, class Write>
T cached(const ArtifactCache& cache, const std::string& key, Read read, Build build, Write write) {
  if (auto text = cache.load(key)) {
    try {
      return read(*text);
    } catch (const InvalidInput&) {
    }
  }
  T value = build();
  cache.store(key, write(value));
  return value;
}

PadicNumber one(Int p) { return PadicNumber::exact(p, 1); }

std::string rational_text(const Rational& q) { return q.get_str(); }

// Largest B with 2 B^2 < p^k, capped so that only small rationals count.
Int reconstruction_bound(Int p, int k) {
  BigInt pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k));
  BigInt b;
  BigInt half = (pk - 1) / 2;
  mpz_sqrt(b.get_mpz_t(), half.get_mpz_t());
  while (2 * b * b >= pk && b > 0) --b;
  return b > 1000 ? 1000 : static_cast<Int>(b.get_si());
}

VerificationReport blank_report(Pipeline& pipe, const std::string& check) {
  VerificationReport r;
  r.check = check;
  r.curve = pipe.curve().to_string();
  r.conductor = pipe.curve().conductor();
  r.p = pipe.prime();
  r.M = pipe.precision();
  return r;
}

void add(VerificationReport& r, const std::string& name, const PadicNumber& x) { r.scalars.emplace_back(name, x.to_string()); }
void add(VerificationReport& r, const std::string& name, const std::string& x) { r.scalars.emplace_back(name, x); }

// kappa * X with X = delta_A ((1 - 1/alpha)^-2 L'_alpha - (1 - 1/beta)^-2 L'_beta).
PadicNumber perrin_riou_combination(Pipeline& pipe, const NegativeControl& control) {
  const Int p = pipe.prime();
  const HeckeRoots& roots = pipe.roots();
  const PadicNumber ea = one(p) - one(p) / roots.alpha, eb = one(p) - one(p) / roots.beta;
  PadicNumber delta = pipe.delta();
  if (control.corrupt_delta) {
    Int u = 2;
    while (modarith::powmod(u, (p - 1) / 2, p) == 1) ++u;  // least quadratic non-residue
    delta = delta * u;
  }
  const PadicNumber X = delta * (pipe.alpha_jet().coeffs[1] / (ea * ea) - pipe.beta_jet().coeffs[1] / (eb * eb));
  return kPairingOrientation * X;
}

int ledger_floor(Pipeline& pipe) { return std::min(pipe.alpha_symbol().ledger.floor(), pipe.beta_symbol().ledger.floor()); }

void fill_common(VerificationReport& r, Pipeline& pipe) {
  r.ledger_alpha = pipe.alpha_symbol().ledger.to_string();
  r.ledger_beta = pipe.beta_symbol().ledger.to_string();
  add(r, "alpha", pipe.roots().alpha);
  add(r, "beta", pipe.roots().beta);
  add(r, "generator", pipe.generator().to_string());
  add(r, "c_f", rational_text(pipe.c_f().c));
  add(r, "c_f_square_factor", rational_text(pipe.c_f().square_factor));
  add(r, "delta_A", pipe.delta());
  add(r, "L_alpha'(1)", pipe.alpha_jet().coeffs[1]);
  add(r, "L_beta'(1)", pipe.beta_jet().coeffs[1]);
  add(r, "log_omega(P)", pipe.log_generator());
}

struct SquareRoot {
  std::optional<PadicNumber> root;
  std::optional<Rational> rational;
  int digits = 0;  // absolute precision of the ratio
};

SquareRoot square_root_of_ratio(const PadicNumber& ratio) {
  SquareRoot s;
  s.digits = ratio.absolute_precision();
  if (ratio.is_zero()) return s;
  s.root = padic_sqrt(ratio);
  if (!s.root) return s;
  const int k = s.root->absolute_precision();
  if (k < 1) return s;
  const Int B = reconstruction_bound(ratio.prime(), k);
  if (B >= 1) s.rational = rational_reconstruct(*s.root, B, B);
  return s;
}

VerificationReport precision_exhausted(VerificationReport r, const std::string& why, int suggested) {
  r.verdict = Verdict::Inconclusive;
  r.verified_digits = 0;
  r.message = why + "; retry with --prec " + std::to_string(suggested);
  return r;
}

}  // namespace

Pipeline::Pipeline(CurveQ E, Int p, int M, PipelineOptions options)
    : E_(std::move(E)), p_(p), M_(M), options_(std::move(options)), cache_(options_.cache_dir) {
  if (!modarith::is_prime(p_) || p_ < 3) throw InvalidInput("p must be an odd prime");
  if (!E_.has_good_reduction(p_)) throw BadReductionError("p divides the conductor");
  if (M_ < 1) throw InvalidInput("precision must be positive");
  if (M_ + 8 > modarith::max_precision(p_))
    throw InvalidInput("precision " + std::to_string(M_) + " beyond the working range for p = " + std::to_string(p_));
}

const HeckeRoots& Pipeline::roots() {
  if (!roots_) roots_ = hecke_roots(E_, p_, M_ + 8);
  return *roots_;
}

void Pipeline::require_rank_one() {
  if (functional_equation_sign(E_) != -1)
    throw WrongRankError("root number +1: the L'-combination is degenerate for this curve (analytic rank is even)");
}

const PointQ& Pipeline::generator() {
  if (!generator_) {
    auto g = search_generator(E_, options_.generator_bound);
    if (!g) throw InvalidInput("no non-torsion point of naive height <= " + std::to_string(options_.generator_bound));
    generator_ = *g;
  }
  return *generator_;
}

const CfResult& Pipeline::c_f() {
  if (!cf_) {
    require_rank_one();
    cf_ = compute_c_f(E_, generator());
  }
  return *cf_;
}

const EigenSymbol& Pipeline::symbol() {
  if (!symbol_) {
    symbol_ = cached<EigenSymbol>(
        cache_, curve_key(E_) + "_eigensymbol.txt", [](const std::string& t) { return deserialize_eigen_symbol(t); },
        [&] { return calibrate(eigen_symbol(build_space(E_.conductor()), E_, 1), E_); },
        [](const EigenSymbol& s) { return serialize(s); });
  }
  return *symbol_;
}

OCSymbol Pipeline::build_oc(bool alpha) {
  const std::string key = curve_key(E_) + "_p" + std::to_string(p_) + "_M" + std::to_string(M_) + "_x" +
                          std::to_string(options_.extra_digits) + (alpha ? "_oc_alpha.txt" : "_oc_beta.txt");
  return cached<OCSymbol>(
      cache_, key, [](const std::string& t) { return deserialize_oc_symbol(t); },
      [&] {
        const StabilizedSymbol s =
            alpha ? alpha_stabilize(symbol(), roots(), M_ + 6) : beta_stabilize(symbol(), roots(), M_ + 6);
        return up_eigenproject(lift_to_distributions(s, M_, options_.extra_digits), options_.projection_steps);
      },
      [](const OCSymbol& s) { return serialize(s); });
}

const OCSymbol& Pipeline::alpha_symbol() {
  if (!alpha_symbol_) alpha_symbol_ = build_oc(true);
  return *alpha_symbol_;
}

const OCSymbol& Pipeline::beta_symbol() {
  if (!beta_symbol_) beta_symbol_ = build_oc(false);
  return *beta_symbol_;
}

const LJet& Pipeline::alpha_jet() {
  if (!alpha_jet_) alpha_jet_ = oc_jet(alpha_symbol(), 1);
  return *alpha_jet_;
}

const LJet& Pipeline::beta_jet() {
  if (!beta_jet_) beta_jet_ = oc_jet(beta_symbol(), 1);
  return *beta_jet_;
}

const FrobeniusData& Pipeline::frobenius() {
  if (!frobenius_) {
    const int MF = M_ + 4;
    frobenius_ = cached<FrobeniusData>(
        cache_, curve_key(E_) + "_p" + std::to_string(p_) + "_M" + std::to_string(MF) + "_frobenius.txt",
        [](const std::string& t) { return deserialize_frobenius(t); }, [&] { return kedlaya_frobenius(E_, p_, MF); },
        [](const FrobeniusData& F) { return serialize(F); });
  }
  return *frobenius_;
}

const DcrisSplit& Pipeline::split() {
  if (!split_) split_ = dcris_split(E_, frobenius());
  return *split_;
}

const PadicNumber& Pipeline::delta() {
  if (!delta_) delta_ = delta_A(split(), c_f().c);
  return *delta_;
}

const PadicNumber& Pipeline::log_generator() {
  if (!log_) log_ = formal_group_log(E_, generator(), p_, M_);
  return *log_;
}

const PadicNumber& Pipeline::height() {
  if (!height_) height_ = height_alpha(E_, generator(), p_, M_);
  return *height_;
}

VerificationReport run_pr_verify(Pipeline& pipe, const NegativeControl& control) {
  VerificationReport r = blank_report(pipe, control.corrupt_delta ? "pr-verify (corrupted delta_A)" : "pr-verify");
  pipe.require_rank_one();
  if (pipe.roots().alpha.valuation() != 0) throw NotOrdinaryError("p is not ordinary");
  try {
    fill_common(r, pipe);
    const PadicNumber X = perrin_riou_combination(pipe, control);
    const PadicNumber& lg = pipe.log_generator();
    const PadicNumber ratio = X / (lg * lg);
    add(r, "kappa*X", X);
    add(r, "kappa*X/log^2", ratio);
    const int floor = ledger_floor(pipe);
    const SquareRoot s = square_root_of_ratio(ratio);
    r.verified_digits = std::min(s.digits, floor);
    r.residuals["ratio_absolute_precision"] = r.verified_digits;
    if (ratio.is_zero())
      return precision_exhausted(r, "the ratio has no certified digits", pipe.precision() + 4);
    if (!s.root) {
      r.verdict = Verdict::Fail;
      r.message = "kappa*X/log^2 is not a p-adic square (valuation " + std::to_string(ratio.valuation()) + ")";
      return r;
    }
    add(r, "sqrt", *s.root);
    if (r.verified_digits < 3)
      return precision_exhausted(r, "only " + std::to_string(r.verified_digits) + " certified digits",
                                 pipe.precision() + 3 - r.verified_digits + 2);
    if (!s.rational) {
      r.verdict = Verdict::Fail;
      r.message = "the square root is not a small rational at precision p^" + std::to_string(r.verified_digits);
      return r;
    }
    r.square_root = *s.rational;
    r.verdict = Verdict::Pass;
    r.message = "kappa*X/log_omega(P)^2 = (" + rational_text(*s.rational) + ")^2 mod p^" +
                std::to_string(r.verified_digits);
    return r;
  } catch (const PrecisionError& e) {
    return precision_exhausted(r, e.what(), pipe.precision() + 4);
  } catch (const DepthError& e) {
    return precision_exhausted(r, e.what(), pipe.precision() + 4);
  }
}

VerificationReport run_gz_alpha_check(Pipeline& pipe, const NegativeControl& control) {
  VerificationReport r = blank_report(pipe, control.swap_roots ? "gz-alpha (beta in place of alpha)" : "gz-alpha");
  pipe.require_rank_one();
  if (pipe.roots().alpha.valuation() != 0) throw NotOrdinaryError("p is not ordinary");
  try {
    const Int p = pipe.prime();
    r.ledger_alpha = pipe.alpha_symbol().ledger.to_string();
    const PadicNumber& lambda = control.swap_roots ? pipe.roots().beta : pipe.roots().alpha;
    const PadicNumber e = one(p) - one(p) / lambda;
    const PadicNumber lhs = pipe.alpha_jet().coeffs[1];
    const PadicNumber rhs = e * e * PadicNumber::exact(p, pipe.c_f().c) * pipe.height();
    add(r, "alpha", pipe.roots().alpha);
    add(r, "generator", pipe.generator().to_string());
    add(r, "c_f", rational_text(pipe.c_f().c));
    add(r, "c_f_square_factor", rational_text(pipe.c_f().square_factor));
    add(r, "h_alpha(P)", pipe.height());
    add(r, "L_alpha'(1)", lhs);
    add(r, "(1-1/lambda)^2 c_f h_alpha(P)", rhs);
    const PadicNumber residual = lhs - rhs;
    add(r, "residual", residual);
    const int digits = std::min({lhs.absolute_precision(), rhs.absolute_precision(), pipe.alpha_symbol().ledger.floor()});
    const int rv = residual.is_zero() ? digits : std::min(residual.valuation(), digits);
    r.residuals["residual_valuation"] = rv;
    r.residuals["certified_digits"] = digits;
    if (rv < digits) {
      r.verdict = Verdict::Fail;
      r.verified_digits = std::max(rv, 0);
      r.message = "residual has valuation " + std::to_string(rv) + " below the certified " + std::to_string(digits);
      return r;
    }
    r.verified_digits = digits;
    if (digits < 3)
      return precision_exhausted(r, "only " + std::to_string(digits) + " certified digits", pipe.precision() + 5 - digits);
    r.verdict = Verdict::Pass;
    r.message = "L_alpha'(1) = (1-1/alpha)^2 c_f h_alpha(P) mod p^" + std::to_string(digits);
    return r;
  } catch (const PrecisionError& e) {
    return precision_exhausted(r, e.what(), pipe.precision() + 4);
  }
}

VerificationReport run_recover(Pipeline& pipe, Int height_bound) {
  VerificationReport r = blank_report(pipe, "recover");
  pipe.require_rank_one();
  if (pipe.roots().alpha.valuation() != 0) throw NotOrdinaryError("p is not ordinary");
  const CurveQ& E = pipe.curve();
  const Int p = pipe.prime();
  try {
    fill_common(r, pipe);
    const PadicNumber X = perrin_riou_combination(pipe, {});
    add(r, "kappa*X", X);
    if (X.is_zero()) return precision_exhausted(r, "kappa*X has no certified digits", pipe.precision() + 4);
    std::optional<PadicNumber> t = padic_sqrt(X);
    if (!t) {
      r.verdict = Verdict::Fail;
      r.message = "kappa*X is not a p-adic square";
      return r;
    }
    // t = +-r log(P); scale by the denominator of r when it is known
    const PadicNumber& lg = pipe.log_generator();
    const SquareRoot s = square_root_of_ratio(X / (lg * lg));
    if (s.rational) {
      r.square_root = *s.rational;
      *t = *t * Int(s.rational->get_den().get_si());
    }
    add(r, "t", *t);
    const int prec = t->absolute_precision();
    r.verified_digits = prec;
    // smallest bound first: a bound beyond the available digits never matches
    std::optional<IndexedPoint> found;
    Int used = 0;
    for (Int b = 10; !found; b = std::min(b * 10, height_bound)) {
      used = b;
      found = recover_point(E, *t, p, prec, b);
      if (b >= height_bound) break;
    }
    r.residuals["height_bound_used"] = static_cast<int>(used);
    if (!found) {
      r.verdict = Verdict::Fail;
      r.message = "no rational point with |num|, den <= " + std::to_string(height_bound) +
                  " has this logarithm; raise --height-bound or --prec";
      return r;
    }
    const PointQ& Q = found->point;
    r.recovered = Q;
    add(r, "recovered", Q.to_string());
    add(r, "recovery_index", std::to_string(found->index));
    if (Q.infinity || is_torsion(E, Q)) {
      r.verdict = Verdict::Fail;
      r.message = "recovered a torsion point";
      return r;
    }
    const PointQ& G = pipe.generator();
    for (long k = 1; k <= 100; ++k) {
      const PointQ kG = multiply(E, G, k);
      if (kG == Q || negate(E, kG) == Q) {
        r.recovered_index = k;
        r.verdict = Verdict::Pass;
        r.message = "recovered " + Q.to_string() + " = +-" + std::to_string(k) + " * " + G.to_string();
        return r;
      }
      const PointQ kQ = multiply(E, Q, k);
      if (kQ == G || negate(E, kQ) == G) {
        r.recovered_index = -k;
        r.verdict = Verdict::Pass;
        r.message = "recovered " + Q.to_string() + " with " + std::to_string(k) + " * Q = +-" + G.to_string();
        return r;
      }
    }
    r.verdict = Verdict::Fail;
    r.message = "recovered point " + Q.to_string() + " is not a small multiple or divisor of " + G.to_string();
    return r;
  } catch (const PrecisionError& e) {
    return precision_exhausted(r, e.what(), pipe.precision() + 4);
  }
}

std::string VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["check"] = check;
  j["curve"] = curve;
  j["conductor"] = conductor;
  j["p"] = p;
  j["M"] = M;
  j["verdict"] = to_string(verdict);
  j["verified_modulus"] = "p^" + std::to_string(verified_digits);
  j["verified_digits"] = verified_digits;
  j["message"] = message;
  j["ledger_alpha"] = ledger_alpha;
  j["ledger_beta"] = ledger_beta;
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const auto& [k, v] : scalars) s[k] = v;
  j["scalars"] = s;
  nlohmann::ordered_json res = nlohmann::ordered_json::object();
  for (const auto& [k, v] : residuals) res[k] = v;
  j["residuals"] = res;
  j["square_root"] = square_root ? nlohmann::ordered_json(square_root->get_str()) : nlohmann::ordered_json(nullptr);
  j["recovered"] = recovered ? nlohmann::ordered_json(recovered->to_string()) : nlohmann::ordered_json(nullptr);
  j["recovered_index"] = recovered_index;
  return j.dump(2);
}

std::string VerificationReport::to_text() const {
  std::ostringstream o;
  o << check << "  " << curve << "  N=" << conductor << "  p=" << p << "  M=" << M << "\n";
  if (!ledger_alpha.empty()) o << "  ledger alpha  " << ledger_alpha << "\n";
  if (!ledger_beta.empty()) o << "  ledger beta   " << ledger_beta << "\n";
  size_t w = 0;
  for (const auto& kv : scalars) w = std::max(w, kv.first.size());
  for (const auto& [k, v] : scalars) o << "  " << std::left << std::setw(static_cast<int>(w)) << k << "  " << v << "\n";
  for (const auto& [k, v] : residuals) o << "  " << std::left << std::setw(static_cast<int>(w)) << k << "  " << v << "\n";
  o << to_string(verdict) << " (mod p^" << verified_digits << "): " << message << "\n";
  return o.str();
}

}  // namespace prpoint
