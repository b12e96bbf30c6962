#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prpoint/archimedean.hpp"
#include "prpoint/crystalline.hpp"
#include "prpoint/overconvergent.hpp"

namespace prpoint {

/// Orientation of the crystalline pairing relative to [omega, eta] = 1 in the
/// end-to-end identity: kappa * X / log_omega(P)^2 is a rational square.
inline constexpr Int kPairingOrientation = -1;

enum class Verdict { Pass = 0, Fail = 1, Inconclusive = 2 };
std::string to_string(Verdict v);

/// Versioned on-disk store for expensive intermediates, keyed by
/// (curve, p, M, kind). An empty directory disables caching.
class ArtifactCache {
 public:
  explicit ArtifactCache(std::string dir = {});
  bool enabled() const { return !dir_.empty(); }
  std::optional<std::string> load(const std::string& key) const;
  void store(const std::string& key, const std::string& text) const;

 private:
  std::string dir_;
};

struct PipelineOptions {
  std::string cache_dir;        // empty: no cache
  Int generator_bound = 1000;   // naive-height bound of the generator search
  int extra_digits = 3;         // working digits beyond M in the distribution lift
  int projection_steps = 4;     // eigenprojection correction steps
};

/// Every intermediate of the end-to-end computation for one (curve, p, M),
/// computed on first use.
class Pipeline {
 public:
  Pipeline(CurveQ E, Int p, int M, PipelineOptions options = {});

  const CurveQ& curve() const { return E_; }
  Int prime() const { return p_; }
  int precision() const { return M_; }
  const PipelineOptions& options() const { return options_; }

  const HeckeRoots& roots();
  /// Rank-one guard: WrongRankError unless the root number is -1.
  void require_rank_one();
  const PointQ& generator();
  const CfResult& c_f();
  const EigenSymbol& symbol();
  const OCSymbol& alpha_symbol();
  const OCSymbol& beta_symbol();
  const LJet& alpha_jet();
  const LJet& beta_jet();
  const FrobeniusData& frobenius();
  const DcrisSplit& split();
  const PadicNumber& delta();
  const PadicNumber& log_generator();
  const PadicNumber& height();

 private:
  OCSymbol build_oc(bool alpha);

  CurveQ E_;
  Int p_;
  int M_;
  PipelineOptions options_;
  ArtifactCache cache_;

  std::optional<HeckeRoots> roots_;
  std::optional<PointQ> generator_;
  std::optional<CfResult> cf_;
  std::optional<EigenSymbol> symbol_;
  std::optional<OCSymbol> alpha_symbol_, beta_symbol_;
  std::optional<LJet> alpha_jet_, beta_jet_;
  std::optional<FrobeniusData> frobenius_;
  std::optional<DcrisSplit> split_;
  std::optional<PadicNumber> delta_, log_, height_;
};

/// Outcome of one verification. Residual and verified valuations never
/// exceed the ledger floor they were derived from.
struct VerificationReport {
  std::string check;
  std::string curve;
  Int conductor = 0;
  Int p = 0;
  int M = 0;
  Verdict verdict = Verdict::Inconclusive;
  /// The identity holds modulo p^verified_digits (absolute).
  int verified_digits = 0;
  std::string message;
  std::string ledger_alpha, ledger_beta;
  /// Ordered name -> value rendering (PadicNumber text or rational).
  std::vector<std::pair<std::string, std::string>> scalars;
  std::map<std::string, int> residuals;
  std::optional<Rational> square_root;  // r with kappa X / log^2 = r^2
  std::optional<PointQ> recovered;
  Int recovered_index = 0;  // recovered = +-index * generator

  std::string to_json() const;
  std::string to_text() const;
};

/// Controls that deliberately break an input to exercise the FAIL path.
struct NegativeControl {
  bool corrupt_delta = false;  // multiply delta_A by a non-square unit
  bool swap_roots = false;     // use beta in place of alpha in the GZ check
};

/// kappa * X / log_omega(P)^2 must be the square of a rational; PASS when a
/// square root reconstructs, FAIL when the ratio has no square root or none
/// of its roots is a small rational, INCONCLUSIVE below 3 certified digits.
VerificationReport run_pr_verify(Pipeline& pipe, const NegativeControl& control = {});

/// Residual of L'_alpha(1) - (1 - 1/alpha)^2 c(f) h_alpha(P).
VerificationReport run_gz_alpha_check(Pipeline& pipe, const NegativeControl& control = {});

/// Rebuilds a rational point from t = sqrt(kappa X) and compares it with
/// the generator: PASS when it equals +-k G for some 1 <= k <= 100.
VerificationReport run_recover(Pipeline& pipe, Int height_bound);

/// Exit status for a verdict: 0 PASS, 1 FAIL, 2 inconclusive.
int exit_code(Verdict v);

}  // namespace prpoint
