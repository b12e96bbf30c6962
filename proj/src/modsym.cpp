#include "prpoint/modsym.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "prpoint/archimedean.hpp"
#include "prpoint/errors.hpp"

namespace prpoint {

using namespace modarith;

P1List::P1List(Int N) : N_(N) {
  if (N < 1) throw InvalidInput("level must be positive");
  table_.assign(static_cast<size_t>(N * N), -1);
  std::vector<Int> units;
  for (Int u = 1; u <= N; ++u)
    if (std::gcd(u, N) == 1) units.push_back(u % N);
  for (Int c = 0; c < N; ++c)
    for (Int d = 0; d < N; ++d) {
      if (table_[c * N + d] >= 0) continue;
      if (std::gcd(std::gcd(c, d), N) != 1) continue;
      const int id = static_cast<int>(labels_.size());
      labels_.push_back({c, d});
      for (Int u : units) table_[(u * c % N) * N + (u * d % N)] = id;
    }
}

int P1List::index(Int c, Int d) const {
  c = reduce(c, N_);
  d = reduce(d, N_);
  return table_[c * N_ + d];
}

ManinSpace build_space(Int N) {
  ManinSpace S;
  S.level = N;
  S.p1 = P1List(N);
  const int n = S.p1.size();
  // two-term relations: x_i = sign_i * x_rep(i), or x_i = 0
  std::vector<int> rep(static_cast<size_t>(n), -1), sgn_(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const auto [c, d] = S.p1[i];
    const int j = S.p1.index(d, -c);
    if (i == j) {
      sgn_[i] = 0;
    } else {
      rep[i] = std::min(i, j);
      sgn_[i] = i == rep[i] ? 1 : -1;
    }
  }
  std::vector<int> free_vars, free_pos(static_cast<size_t>(n), -1);
  for (int i = 0; i < n; ++i)
    if (sgn_[i] != 0 && rep[i] == i) {
      free_pos[i] = static_cast<int>(free_vars.size());
      free_vars.push_back(i);
    }
  const int nf = static_cast<int>(free_vars.size());
  // three-term relations over the free variables
  std::set<std::array<int, 3>> seen;
  std::vector<std::vector<Rational>> rows;
  for (int i = 0; i < n; ++i) {
    const auto [c, d] = S.p1[i];
    const int j = S.p1.index(d, -c - d);
    const auto [c2, d2] = S.p1[j];
    const int k = S.p1.index(d2, -c2 - d2);
    std::array<int, 3> key{i, j, k};
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) continue;
    std::vector<Rational> row(static_cast<size_t>(nf), Rational(0));
    for (int t : {i, j, k})
      if (sgn_[t] != 0) row[free_pos[rep[t]]] += sgn_[t];
    if (std::any_of(row.begin(), row.end(), [](const Rational& q) { return q != 0; })) rows.push_back(row);
  }
  QMatrix R(static_cast<int>(rows.size()), nf);
  for (int r = 0; r < R.rows(); ++r)
    for (int c = 0; c < nf; ++c) R(r, c) = rows[r][c];
  const auto pivots = R.rref();
  std::vector<int> pivot_row(static_cast<size_t>(nf), -1);
  for (size_t r = 0; r < pivots.size(); ++r) pivot_row[pivots[r]] = static_cast<int>(r);
  std::vector<int> basis_pos(static_cast<size_t>(nf), -1);
  for (int f = 0; f < nf; ++f)
    if (pivot_row[f] < 0) {
      basis_pos[f] = static_cast<int>(S.basis.size());
      S.basis.push_back(free_vars[f]);
    }
  S.dim = static_cast<int>(S.basis.size());
  // coordinates of each free variable, then of each label
  QMatrix fcoords(nf, S.dim);
  for (int f = 0; f < nf; ++f) {
    if (pivot_row[f] < 0) {
      fcoords(f, basis_pos[f]) = 1;
    } else {
      for (int g = 0; g < nf; ++g)
        if (pivot_row[g] < 0 && R(pivot_row[f], g) != 0) fcoords(f, basis_pos[g]) = -R(pivot_row[f], g);
    }
  }
  S.coords = QMatrix(n, S.dim);
  for (int i = 0; i < n; ++i) {
    if (sgn_[i] == 0) continue;
    const int f = free_pos[rep[i]];
    for (int k = 0; k < S.dim; ++k) S.coords(i, k) = sgn_[i] * fcoords(f, k);
  }
  return S;
}

namespace {

// Merel's set: a > b >= 0, d > c >= 0, ad - bc = n.
std::vector<std::array<Int, 4>> heilbronn_merel(Int n) {
  std::vector<std::array<Int, 4>> out;
  for (Int a = 1; a <= n; ++a)
    for (Int d = 1; d <= n; ++d) {
      const Int bc = a * d - n;
      if (bc < 0) continue;
      if (bc == 0) {
        // b = 0 (any c < d) or c = 0 (any b < a)
        for (Int c = 0; c < d; ++c) out.push_back({a, 0, c, d});
        for (Int b = 1; b < a; ++b) out.push_back({a, b, 0, d});
        continue;
      }
      for (Int b = 1; b < a; ++b)
        if (bc % b == 0) {
          const Int c = bc / b;
          if (c < d) out.push_back({a, b, c, d});
        }
    }
  return out;
}

}  // namespace

QMatrix hecke_operator(const ManinSpace& space, Int ell) {
  const auto H = heilbronn_merel(ell);
  QMatrix T(space.dim, space.dim);
  for (int j = 0; j < space.dim; ++j) {
    const auto [c, d] = space.p1[space.basis[j]];
    for (const auto& h : H) {
      const int idx = space.p1.index(c * h[0] + d * h[2], c * h[1] + d * h[3]);
      if (idx < 0) continue;
      for (int k = 0; k < space.dim; ++k)
        if (space.coords(idx, k) != 0) T(k, j) += space.coords(idx, k);
    }
  }
  return T;
}

QMatrix star_involution(const ManinSpace& space) {
  QMatrix S(space.dim, space.dim);
  for (int j = 0; j < space.dim; ++j) {
    const auto [c, d] = space.p1[space.basis[j]];
    const int idx = space.p1.index(-c, d);
    for (int k = 0; k < space.dim; ++k) S(k, j) = space.coords(idx, k);
  }
  return S;
}

EigenSymbol eigen_symbol(const ManinSpace& space, const CurveQ& E, int sign) {
  if (E.conductor() != space.level) throw InvalidInput("curve conductor does not match the symbol level");
  if (sign != 1 && sign != -1) throw InvalidInput("sign must be +1 or -1");
  QMatrix W = star_involution(space).scaled_identity_minus(sign).left_kernel();
  int used = 0;
  for (Int ell = 2; used < 20 && W.rows() > 1; ++ell) {
    if (!is_prime(ell) || !E.has_good_reduction(ell)) continue;
    ++used;
    const QMatrix A = hecke_operator(space, ell).scaled_identity_minus(count_points_ap(E, ell));
    const QMatrix C = (W * A).left_kernel();
    W = C * W;
  }
  if (W.rows() != 1)
    throw IsolationFailure("eigenspace has dimension " + std::to_string(W.rows()) +
                           " after Hecke cuts (oldform collision or wrong conductor)");
  std::vector<Rational> vals(static_cast<size_t>(space.p1.size()), Rational(0));
  for (int i = 0; i < space.p1.size(); ++i)
    for (int k = 0; k < space.dim; ++k) vals[i] += space.coords(i, k) * W(0, k);
  const auto ints = primitive_integer_vector(vals);
  EigenSymbol phi;
  phi.level = space.level;
  phi.sign = sign;
  phi.p1 = std::make_shared<const P1List>(space.p1);
  for (const BigInt& v : ints) {
    if (!v.fits_slong_p()) throw ConsistencyError("symbol value exceeds 64 bits");
    phi.values.push_back(v.get_si());
  }
  return phi;
}

Int EigenSymbol::value(Int c, Int d) const {
  const int idx = p1->index(c, d);
  if (idx < 0) throw ConsistencyError("Manin symbol outside P1(Z/N)");
  return values[idx];
}

BigInt evaluate_int(const EigenSymbol& phi, Int a, Int m) {
  if (m == 0) return 0;
  if (phi.is_twist()) {
    const Int D = std::abs(phi.twist);
    BigInt s = 0;
    for (Int b = 0; b < D; ++b) {
      const int chi = kronecker(phi.twist, b);
      if (chi == 0) continue;
      // a/m - b/D
      const BigInt num = BigInt(static_cast<long>(a)) * D - BigInt(static_cast<long>(b)) * m;
      const BigInt den = BigInt(static_cast<long>(m)) * D;
      const BigInt g = gcd(num, den);
      const BigInt nn = num / g, dd = den / g;
      if (!nn.fits_slong_p() || !dd.fits_slong_p()) throw InvalidInput("cusp too large");
      s += chi * evaluate_int(*phi.base, nn.get_si(), dd.get_si());
    }
    return s;
  }
  if (m < 0) {
    a = -a;
    m = -m;
  }
  const Int g = std::gcd(a, m);
  a /= g;
  m /= g;
  // continued fraction of a/m; q_{k-2}, q_{k-1}
  Int qm2 = 1, qm1 = 0;
  Int x = a, y = m;
  Int sum = 0;
  for (int k = 0; y != 0; ++k) {
    Int ak = x / y;
    if ((x % y != 0) && ((x < 0) != (y < 0))) --ak;  // floor
    const Int r = x - ak * y;
    x = y;
    y = r;
    const Int qk = ak * qm1 + qm2;
    const Int c = (k % 2 == 0) ? -qk : qk;
    sum += phi.value(c, qm1);
    qm2 = qm1;
    qm1 = qk;
  }
  return BigInt(static_cast<long>(-sum));
}

namespace {

std::pair<Int, Int> to_int_pair(const Rational& r) {
  if (!r.get_num().fits_slong_p() || !r.get_den().fits_slong_p()) throw InvalidInput("cusp too large");
  return {r.get_num().get_si(), r.get_den().get_si()};
}

}  // namespace

Rational evaluate(const EigenSymbol& phi, const Rational& r) {
  const auto [a, m] = to_int_pair(r);
  return Rational(evaluate_int(phi, a, m));
}

Rational evaluate_path(const EigenSymbol& phi, const Rational& r, const Rational& s) {
  return evaluate(phi, r) - evaluate(phi, s);
}

Rational calibrated_value(const EigenSymbol& phi, const Rational& r) {
  if (!phi.c_cal) throw InvalidInput("symbol is not calibrated");
  return *phi.c_cal * evaluate(phi, r);
}

int kronecker(Int d, Int n) {
  const BigInt D(static_cast<long>(d));
  return mpz_kronecker_si(D.get_mpz_t(), static_cast<long>(n));
}

bool is_fundamental_discriminant(Int d) {
  if (d == 0 || d == 1) return false;
  auto squarefree = [](Int m) {
    m = std::abs(m);
    for (Int q = 2; q * q <= m; ++q)
      if (m % (q * q) == 0) return false;
    return true;
  };
  const Int r = reduce(d, 4);
  if (r == 1) return squarefree(d);
  if (r == 0) {
    const Int m = d / 4;
    const Int rm = reduce(m, 4);
    return (rm == 2 || rm == 3) && squarefree(m);
  }
  return false;
}

double twisted_l_value(const CurveQ& E, Int d) {
  if (d <= 0 || std::gcd(d, E.conductor()) != 1) throw InvalidInput("twisted_l_value: need d > 0 coprime to N");
  const int w = functional_equation_sign(E) * kronecker(d, -E.conductor());
  if (w != 1) throw WrongRankError("twisted root number is -1");
  const double N = static_cast<double>(E.conductor());
  const double c = 2.0 * std::numbers::pi / (static_cast<double>(d) * std::sqrt(N));
  const Int terms = static_cast<Int>(std::ceil(40.0 / c)) + 10;
  const auto an = dirichlet_coefficients(E, terms);
  double s = 0.0;
  for (Int n = 1; n <= terms; ++n) {
    const int chi = kronecker(d, n);
    if (chi == 0 || an[n] == 0) continue;
    s += chi * static_cast<double>(an[n]) / static_cast<double>(n) * std::exp(-c * static_cast<double>(n));
  }
  return 2.0 * s;
}

EigenSymbol calibrate_with(const EigenSymbol& phi, const CurveQ& E, Int d) {
  if (phi.sign != 1) throw InvalidInput("calibration is implemented for plus symbols");
  if (phi.is_twist()) throw InvalidInput("calibrate the untwisted symbol");
  if (!is_fundamental_discriminant(d) || d <= 0 || std::gcd(d, E.conductor()) != 1)
    throw CalibrationFailure("d must be a positive fundamental discriminant prime to N");
  if (functional_equation_sign(E) * kronecker(d, -E.conductor()) != 1)
    throw CalibrationFailure("twist by d has root number -1");
  BigInt sym = 0;
  for (Int a = 0; a < d; ++a) {
    const int chi = kronecker(d, a);
    if (chi != 0) sym += chi * evaluate_int(phi, a, d);
  }
  const double L = twisted_l_value(E, d);
  if (sym == 0 || std::fabs(L) < 1e-8) throw CalibrationFailure("twisted L-value vanishes for this d");
  const double omega = real_period(E).value;
  const double ratio = std::sqrt(static_cast<double>(d)) * L / (omega * sym.get_d());
  EigenSymbol out = phi;
  try {
    out.c_cal = reconstruct_real(ratio, 1e-7 * std::max(1.0, std::fabs(ratio)), 1000);
  } catch (const AmbiguousRational& e) {
    throw CalibrationFailure(std::string("calibration ratio is not a small rational: ") + e.what());
  }
  out.calibration_discriminant = d;
  return out;
}

EigenSymbol calibrate(const EigenSymbol& phi, const CurveQ& E) {
  for (Int d = 5; d <= 200; ++d) {
    if (!is_fundamental_discriminant(d) || std::gcd(d, E.conductor()) != 1) continue;
    if (functional_equation_sign(E) * kronecker(d, -E.conductor()) != 1) continue;
    try {
      return calibrate_with(phi, E, d);
    } catch (const CalibrationFailure&) {
      continue;
    }
  }
  throw CalibrationFailure("every discriminant d <= 200 gives a vanishing twist");
}

EigenSymbol twist_symbol(const EigenSymbol& phi, Int d, Int p) {
  if (d == 1) return phi;
  if (!is_fundamental_discriminant(d)) throw InvalidInput("twist needs a fundamental discriminant");
  const EigenSymbol* root = &phi;
  while (root->is_twist()) root = root->base.get();
  const Int np = root->level * (p > 0 ? p : 1);
  if (std::gcd(std::abs(d), np) != 1) throw InvalidInput("twist discriminant must be prime to N p");
  EigenSymbol out;
  out.level = phi.level * d * d;
  out.sign = phi.sign * (d < 0 ? -1 : 1);
  out.base = std::make_shared<const EigenSymbol>(phi);
  out.twist = d;
  return out;
}

std::string serialize(const EigenSymbol& phi) {
  if (phi.is_twist()) throw InvalidInput("twisted symbols are rebuilt, not cached");
  std::ostringstream out;
  out << "prpoint-eigensymbol 1\n";
  out << "level " << phi.level << "\n";
  out << "sign " << phi.sign << "\n";
  out << "c_cal " << (phi.c_cal ? phi.c_cal->get_str() : std::string("none")) << "\n";
  out << "calibration_d " << phi.calibration_discriminant << "\n";
  out << "labels " << phi.p1->size() << "\n";
  for (int i = 0; i < phi.p1->size(); ++i) {
    const auto [c, d] = (*phi.p1)[i];
    out << c << ' ' << d << ' ' << phi.values[i] << "\n";
  }
  return out.str();
}

EigenSymbol deserialize_eigen_symbol(const std::string& text) {
  std::istringstream in(text);
  std::string tag, key, cal;
  int version = 0;
  if (!(in >> tag >> version) || tag != "prpoint-eigensymbol") throw InvalidInput("not an eigensymbol file");
  if (version != 1) throw InvalidInput("unsupported eigensymbol format version " + std::to_string(version));
  EigenSymbol phi;
  int n = 0;
  in >> key >> phi.level >> key >> phi.sign >> key >> cal >> key >> phi.calibration_discriminant >> key >> n;
  if (!in || phi.level < 1) throw InvalidInput("corrupt eigensymbol header");
  if (cal != "none") {
    phi.c_cal = Rational(cal);
    phi.c_cal->canonicalize();
  }
  phi.p1 = std::make_shared<const P1List>(phi.level);
  if (n != phi.p1->size()) throw InvalidInput("eigensymbol label count does not match the level");
  phi.values.assign(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    Int c, d, v;
    if (!(in >> c >> d >> v)) throw InvalidInput("truncated eigensymbol file");
    const int idx = phi.p1->index(c, d);
    if (idx < 0) throw InvalidInput("eigensymbol label outside P1");
    phi.values[idx] = v;
  }
  return phi;
}

}  // namespace prpoint
