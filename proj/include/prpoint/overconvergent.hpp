#pragma once

#include <memory>
#include <string>
#include <vector>

#include "prpoint/lp_ordinary.hpp"
#include "prpoint/modsym.hpp"

namespace prpoint {

/// An integer matrix [[a, b], [c, d]].
struct Mat2 {
  Int a = 1, b = 0, c = 0, d = 1;
  Mat2 operator*(const Mat2& o) const;
  Int det() const { return a * d - b * c; }
};

/// The level-Np symbol phi_lambda{r -> s} = c_cal (phi{r -> s} - lambda^-1 phi{pr -> ps}),
/// on which U_p acts by lambda.
struct StabilizedSymbol {
  std::shared_ptr<const EigenSymbol> base;  // calibrated, level N
  Int p = 0;
  PadicNumber lambda;
  int precision = 0;

  Int level() const { return base->level * p; }
  /// lambda phi{r -> oo} - phi{pr -> oo} modulo p^W; the value is that times scale().
  Int numerator_mod(const Rational& r, int W) const;
  /// c_cal / lambda.
  PadicNumber scale() const;
  /// phi_lambda{r -> oo}.
  PadicNumber value(const Rational& r) const;
};

StabilizedSymbol p_stabilize(const EigenSymbol& phi, const PadicNumber& lambda, int M);
/// The critical-slope stabilization (lambda = beta).
StabilizedSymbol beta_stabilize(const EigenSymbol& phi, const HeckeRoots& roots, int M);
StabilizedSymbol alpha_stabilize(const EigenSymbol& phi, const HeckeRoots& roots, int M);

/// U_p phi_lambda - lambda phi_lambda on every Manin symbol of level Np; returns
/// the smallest valuation of the residual (INT_MAX when it vanishes exactly).
int stabilization_defect(const StabilizedSymbol& phi);

/// A truncated distribution on Z_p in scaled-moment coordinates
/// t_j = int (p x)^j dmu, j < size, stored modulo p^W. In these coordinates
/// the standard filtration (mu_j mod p^(W-j)) is the uniform truncation.
struct FiniteDistribution {
  Int p = 0;
  int W = 0;
  std::vector<Int> t;

  /// mu_j = t_j / p^j to its filtration precision.
  PadicNumber moment(int j) const;
};

/// mu|g for g = [[a, b], [c, d]] with p | c and p !| a: int f d(mu|g) = int f((b + dx)/(a + cx)) dmu.
FiniteDistribution act(const FiniteDistribution& mu, const Mat2& g);

/// Precision bookkeeping carried by every overconvergent symbol.
struct PrecisionLedger {
  int working = 0;         // W: moments and modulus exponent
  int target = 0;          // requested M
  int denominator = 0;     // e: values lie in p^-e D^0
  int lift_loss = 0;       // max(e, inconsistency left by the lifting solve)
  int projection_loss = 0; // largest pivot valuation in the eigen solve
  std::vector<int> residual_log;  // eigen residual valuation per iteration
  /// Digits of every moment that are certified after all losses.
  int floor() const { return working - lift_loss - projection_loss; }
  std::string to_string() const;
};

struct OCContext;

/// A Gamma_0(Np)-invariant symbol with values in the finite approximation
/// module F_W, stored by its (scaled) value on every P1(Z/Np) Manin symbol.
/// The actual symbol is scale * values.
struct OCSymbol {
  std::shared_ptr<const OCContext> context;
  Int p = 0;
  Int level = 0;
  int W = 0;
  PadicNumber scale;
  PadicNumber lambda;  // target U_p eigenvalue
  std::vector<std::vector<Int>> values;
  PrecisionLedger ledger;

  /// Distribution attached to the path {r -> oo} (unscaled).
  FiniteDistribution evaluate(const Rational& r) const;
};

/// Shared level-Np data: Manin presentation over F_W and the U_p operator.
std::shared_ptr<const OCContext> oc_context(Int level, Int p, int W);

/// Any symbol with values in F_W lifting phi (moment 0 = phi), found by
/// solving the Manin relations; W = M + extra digits for the later losses.
OCSymbol lift_to_distributions(const StabilizedSymbol& phi, int M, int extra = 3);

/// Largest valuation v such that the Manin relations hold modulo p^v on all
/// Manin symbols (W when they hold exactly in F_W).
int manin_defect(const OCSymbol& theta);
/// Valuation of U_p theta - lambda theta (W when exact in F_W).
int eigen_defect(const OCSymbol& theta);

/// Projects onto the U_p = lambda eigenline by successive correction steps: each
/// step solves (U_p - lambda) kappa = -(U_p - lambda) theta for kappa in the kernel of
/// specialization subject to the Manin relations. Stops once the residual
/// reaches the working floor; raises DivergenceError when three consecutive
/// steps fail to improve it, or LiftFailure when no correction exists
/// (theta-critical input).
OCSymbol up_eigenproject(const OCSymbol& theta, int iterations);

/// The measure mu on Z_p^x with mu(a + p^n) = lambda^-n (moment 0 of theta{a/p^n -> oo}),
/// n <= depth; growth class 0 for a unit lambda and 1 otherwise.
PadicMeasure specialize_measure(const OCSymbol& theta, int depth);

/// Jet of the symbol's L-function at s = 1 from the moments of theta{a/p -> oo}
/// (valid at any slope below the weight bound, including the critical one).
LJet oc_jet(const OCSymbol& theta, int J, int tame = 0);

/// Versioned text format; the ledger is part of the cache.
std::string serialize(const OCSymbol& theta);
OCSymbol deserialize_oc_symbol(const std::string& text);

}  // namespace prpoint
