#pragma once

#include <array>
#include <string>

#include "prpoint/curve.hpp"

namespace prpoint {

/// A class in H^1_dR in the basis {omega, eta}: c[0] omega + c[1] eta, where
/// omega = dx/(2y + a1 x + a3) and eta = x omega.
using DeRhamClass = std::array<PadicNumber, 2>;

/// The cup product normalized by [omega, eta] = 1.
PadicNumber de_rham_pairing(const DeRhamClass& u, const DeRhamClass& v);

/// Frobenius on H^1_dR(E/Q_p) modulo p^precision.
struct FrobeniusData {
  Int p = 0;
  int precision = 0;
  /// F[i][j] = coefficient of basis vector i in F(basis vector j).
  std::array<std::array<PadicNumber, 2>, 2> F;
  PadicNumber trace, det;
  /// Unit root and the other root of the characteristic polynomial.
  PadicNumber alpha, beta;
  DeRhamClass v_alpha, v_beta;  // eigenvectors

  DeRhamClass apply(const DeRhamClass& u) const;
  /// `[[F00, F01], [F10, F11]]`.
  std::string to_string() const;
};

/// Kedlaya's algorithm on y^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 (y = 2y + a1 x + a3),
/// with the Frobenius lift x -> x^p. Requires p >= 3 of good ordinary or
/// supersingular reduction; for a supersingular prime alpha/beta are left
/// empty. Raises ConsistencyError if det F != p or the trace is not an
/// integer in the Hasse interval modulo p^M.
FrobeniusData kedlaya_frobenius(const CurveQ& E, Int p, int M);

/// Versioned text cache format; reading re-runs the det/trace checks.
std::string serialize(const FrobeniusData& F);
FrobeniusData deserialize_frobenius(const std::string& text);

/// Decomposition of omega along the Frobenius eigenlines.
struct DcrisSplit {
  Int p = 0;
  int precision = 0;
  PadicNumber alpha, beta;
  DeRhamClass omega_alpha, omega_beta;  // omega = omega_alpha + omega_beta
  PadicNumber pairing_beta_alpha;       // [omega_beta, omega_alpha]
  DeRhamClass omega_star;               // in the beta line with [omega_alpha, omega_star] = 1
  /// Unit-root direction: eta + s2 omega spans the alpha eigenline.
  PadicNumber s2;
  /// Katz's E2 of (E, omega): e2 = b2 - 12 s2.
  PadicNumber e2;
};

/// Requires an ordinary prime (alpha a unit).
DcrisSplit dcris_split(const CurveQ& E, const FrobeniusData& F);

/// [omega_beta, omega_alpha] / c_f.
PadicNumber delta_A(const DcrisSplit& split, const Rational& c_f);

}  // namespace prpoint
