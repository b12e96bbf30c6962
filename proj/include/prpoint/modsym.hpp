#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prpoint/curve.hpp"
#include "prpoint/linalg.hpp"

namespace prpoint {

/// The projective line over Z/N: classes (c:d) with gcd(c, d, N) = 1 up to
/// scaling by units.
class P1List {
 public:
  P1List() = default;
  explicit P1List(Int N);

  Int level() const { return N_; }
  int size() const { return static_cast<int>(labels_.size()); }
  const std::pair<Int, Int>& operator[](int i) const { return labels_[i]; }
  /// Index of (c:d), or -1 when gcd(c, d, N) != 1.
  int index(Int c, Int d) const;

 private:
  Int N_ = 0;
  std::vector<std::pair<Int, Int>> labels_;
  std::vector<int> table_;  // (c mod N) * N + (d mod N)
};

/// Weight-2 modular symbols for Gamma_0(N) presented by Manin symbols.
/// The symbol (c:d) stands for g{0, oo} with g in SL_2(Z) of bottom row (c, d).
struct ManinSpace {
  Int level = 0;
  P1List p1;
  int dim = 0;
  std::vector<int> basis;  // labels forming a basis of the quotient
  QMatrix coords;          // label -> coordinates in that basis (size x dim)
};

ManinSpace build_space(Int N);

/// Matrix of T_ell (U_ell when ell | N) on the quotient basis, acting on
/// columns: column j holds the coordinates of T_ell of basis element j.
QMatrix hecke_operator(const ManinSpace& space, Int ell);
/// The involution (c:d) -> (-c:d).
QMatrix star_involution(const ManinSpace& space);

/// A Hecke eigen-functional on Manin symbols, stored by its integer values on
/// every P1 label (content 1). A twisted symbol keeps a reference to the
/// symbol it twists.
struct EigenSymbol {
  Int level = 0;
  int sign = 1;
  std::shared_ptr<const P1List> p1;
  std::vector<Int> values;
  std::optional<Rational> c_cal;
  Int calibration_discriminant = 0;

  std::shared_ptr<const EigenSymbol> base;  // set for twists
  Int twist = 1;                            // discriminant of the twist

  bool is_twist() const { return base != nullptr; }
  /// Value on the Manin symbol (c:d).
  Int value(Int c, Int d) const;
};

EigenSymbol eigen_symbol(const ManinSpace& space, const CurveQ& E, int sign);

/// phi{a/m -> oo} with exact integer arithmetic; m = 0 denotes the cusp oo.
BigInt evaluate_int(const EigenSymbol& phi, Int a, Int m);
/// phi{r -> oo}.
Rational evaluate(const EigenSymbol& phi, const Rational& r);
/// phi{r -> s}.
Rational evaluate_path(const EigenSymbol& phi, const Rational& r, const Rational& s);
/// c_cal * phi{r -> oo}; requires a calibrated symbol.
Rational calibrated_value(const EigenSymbol& phi, const Rational& r);

/// Kronecker symbol (d/n).
int kronecker(Int d, Int n);
bool is_fundamental_discriminant(Int d);

/// L(E, chi_d, 1) for d > 0 with gcd(d, N) = 1 and twisted root number +1.
double twisted_l_value(const CurveQ& E, Int d);

/// Calibrates with the first usable fundamental discriminant d in [5, 200].
EigenSymbol calibrate(const EigenSymbol& phi, const CurveQ& E);
/// Calibrates with a given d; throws CalibrationFailure when d is unusable.
EigenSymbol calibrate_with(const EigenSymbol& phi, const CurveQ& E, Int d);

/// phi_chi{r} = sum_{a mod |d|} chi_d(a) phi{r - a/|d|}.
EigenSymbol twist_symbol(const EigenSymbol& phi, Int d, Int p = 0);

/// Versioned text format for caching.
std::string serialize(const EigenSymbol& phi);
EigenSymbol deserialize_eigen_symbol(const std::string& text);

}  // namespace prpoint
