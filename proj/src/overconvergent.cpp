#include "prpoint/overconvergent.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>

#include "prpoint/errors.hpp"

namespace prpoint {

using namespace modarith;

Mat2 Mat2::operator*(const Mat2& o) const {
  return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
}

namespace {

using Mat = std::vector<Int>;  // W x W, row-major
using u128 = unsigned __int128;

// a/m in lowest terms with m >= 0; m = 0 is the cusp oo.
struct Cusp {
  Int a = 1;
  Int m = 0;
};

Cusp make_cusp(Int a, Int m) {
  if (m == 0) return {1, 0};
  if (m < 0) {
    a = -a;
    m = -m;
  }
  const Int g = std::gcd(a, m);
  return {a / g, m / g};
}

Cusp to_cusp(const Rational& r) {
  if (!r.get_num().fits_slong_p() || !r.get_den().fits_slong_p()) throw InvalidInput("cusp too large");
  return make_cusp(r.get_num().get_si(), r.get_den().get_si());
}

Cusp act(const Mat2& g, const Cusp& z) { return make_cusp(g.a * z.a + g.b * z.m, g.c * z.a + g.d * z.m); }

Mat2 inverse(const Mat2& g) { return {g.d, -g.b, -g.c, g.a}; }

// Arithmetic modulo m < 2^62 with a floating-point quotient estimate.
struct Ring {
  Int m;
  long double inv;
  explicit Ring(Int mod) : m(mod), inv(1.0L / static_cast<long double>(mod)) {}
  Int mul(Int a, Int b) const {
    const auto q = static_cast<Int>(static_cast<long double>(a) * static_cast<long double>(b) * inv);
    Int r = static_cast<Int>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b) -
                             static_cast<std::uint64_t>(q) * static_cast<std::uint64_t>(m));
    while (r < 0) r += m;
    while (r >= m) r -= m;
    return r;
  }
  Int add(Int a, Int b) const { return a + b >= m ? a + b - m : a + b; }
  Int sub(Int a, Int b) const { return a >= b ? a - b : a - b + m; }
  Int neg(Int a) const { return a == 0 ? 0 : m - a; }
};

// Dot-product accumulator; products are below 2^124, so 15 fit in 128 bits.
struct Acc {
  u128 s = 0;
  int n = 0;
  void add(Int a, Int b, Int m) {
    s += static_cast<u128>(a) * static_cast<u128>(b);
    if (++n == 15) {
      s %= static_cast<u128>(m);
      n = 0;
    }
  }
  Int get(Int m) const { return static_cast<Int>(s % static_cast<u128>(m)); }
};

Mat identity_mat(int W) {
  Mat I(static_cast<size_t>(W) * W, 0);
  for (int i = 0; i < W; ++i) I[i * W + i] = 1;
  return I;
}

Mat mat_mul(const Mat& A, const Mat& B, int W, Int m) {
  Mat C(static_cast<size_t>(W) * W);
  for (int i = 0; i < W; ++i)
    for (int j = 0; j < W; ++j) {
      Acc acc;
      for (int k = 0; k < W; ++k) acc.add(A[i * W + k], B[k * W + j], m);
      C[i * W + j] = acc.get(m);
    }
  return C;
}

void mat_add(Mat& A, const Mat& B, const Ring& R) {
  for (size_t i = 0; i < A.size(); ++i) A[i] = R.add(A[i], B[i]);
}

void mat_sub(Mat& A, const Mat& B, const Ring& R) {
  for (size_t i = 0; i < A.size(); ++i) A[i] = R.sub(A[i], B[i]);
}

// out_j = sum_i t_i A[i][j]
std::vector<Int> vec_mat(const std::vector<Int>& t, const Mat& A, int W, Int m) {
  std::vector<Int> out(static_cast<size_t>(W));
  for (int j = 0; j < W; ++j) {
    Acc acc;
    for (int i = 0; i < W; ++i) acc.add(t[i], A[i * W + j], m);
    out[j] = acc.get(m);
  }
  return out;
}

void vec_add(std::vector<Int>& a, const std::vector<Int>& b, const Ring& R) {
  for (size_t i = 0; i < a.size(); ++i) a[i] = R.add(a[i], b[i]);
}

int min_valuation(const std::vector<Int>& v, Int p, int W) {
  int best = W;
  for (Int x : v)
    if (x != 0) best = std::min(best, valuation(x, p));
  return best;
}

// Matrix of mu -> mu|g in scaled moments, for g in Sigma_0(p):
// L[i][j] = coefficient of z^i in u(z)^j, u(z) = (p b + d z) / (a + (c/p) z).
Mat action_matrix(const Mat2& g, Int p, int W, const Ring& R) {
  if (g.c % p != 0 || reduce(g.a, p) == 0) throw ConsistencyError("matrix outside Sigma_0(p)");
  const Int m = R.m;
  const Int A = reduce(g.a, m), B = R.mul(reduce(g.b, m), p % m), C = reduce(g.c / p, m), D = reduce(g.d, m);
  const Int ainv = invmod(A, m);
  const Int ratio = R.mul(R.neg(C), ainv);
  std::vector<Int> inv(static_cast<size_t>(W));
  inv[0] = ainv;
  for (int k = 1; k < W; ++k) inv[k] = R.mul(inv[k - 1], ratio);
  std::vector<Int> u(static_cast<size_t>(W));
  u[0] = R.mul(B, inv[0]);
  for (int k = 1; k < W; ++k) u[k] = R.add(R.mul(B, inv[k]), R.mul(D, inv[k - 1]));

  Mat L(static_cast<size_t>(W) * W, 0);
  std::vector<Int> pw(static_cast<size_t>(W), 0), next(static_cast<size_t>(W));
  pw[0] = 1 % m;
  for (int j = 0; j < W; ++j) {
    for (int i = 0; i < W; ++i) L[i * W + j] = pw[i];
    if (j + 1 == W) break;
    for (int i = 0; i < W; ++i) {
      Acc acc;
      for (int k = 0; k <= i; ++k) acc.add(pw[k], u[i - k], m);
      next[i] = acc.get(m);
    }
    pw.swap(next);
  }
  return L;
}

// {r -> oo} = sum_k g_k {0 -> oo} with g_k unimodular, from the convergents of r.
std::vector<Mat2> unimodular_pieces(const Cusp& r) {
  std::vector<Mat2> out;
  if (r.m == 0) return out;
  Int pm2 = 0, qm2 = 1, pm1 = 1, qm1 = 0;
  Int x = r.a, y = r.m;
  for (int k = 0; y != 0; ++k) {
    Int q = x / y, rem = x % y;
    if (rem < 0) {
      --q;
      rem += y;
    }
    x = y;
    y = rem;
    const Int pk = q * pm1 + pm2, qk = q * qm1 + qm2;
    Mat2 g{pm1, pk, qm1, qk};
    if (k % 2 == 1) {
      g.a = -g.a;
      g.c = -g.c;
    }
    out.push_back(g);
    pm2 = pm1;
    qm2 = qm1;
    pm1 = pk;
    qm1 = qk;
  }
  return out;
}

std::tuple<Int, Int, Int> ext_gcd(Int a, Int b) {
  Int x0 = 1, x1 = 0, y0 = 0, y1 = 1;
  while (b != 0) {
    const Int q = a / b;
    std::tie(a, b) = std::make_tuple(b, a - q * b);
    std::tie(x0, x1) = std::make_tuple(x1, x0 - q * x1);
    std::tie(y0, y1) = std::make_tuple(y1, y0 - q * y1);
  }
  if (a < 0) return {-a, -x0, -y0};
  return {a, x0, y0};
}

// An element of SL_2(Z) with bottom row congruent to (c, d) mod N.
Mat2 representative(Int c, Int d, Int N) {
  const Int c1 = c == 0 ? N : c;
  Int d1 = d;
  while (std::gcd(c1, d1) != 1) d1 += N;
  const auto [g, x, y] = ext_gcd(d1, c1);
  (void)g;
  return {x, -y, c1, d1};
}

Int symbol_num_mod(const StabilizedSymbol& phi, const Cusp& r, int W) {
  if (r.m == 0) return 0;
  const Int mod = ipow(phi.p, W);
  const Int lam = reduce(phi.lambda.lift(), mod);
  const Cusp pr = make_cusp(phi.p * r.a, r.m);
  const Int v1 = reduce(evaluate_int(*phi.base, r.a, r.m), mod);
  const Int v2 = reduce(evaluate_int(*phi.base, pr.a, pr.m), mod);
  return reduce(mulmod(lam, v1, mod) - v2, mod);
}

struct SolveResult {
  std::vector<Int> x;
  int max_pivot = 0;
  int rank = 0;
  int residual = 0;  // valuation of the unsolvable part (W when consistent)
};

// Solves A t = b over Z/p^W for t_j in p^shift_j Z/p^W, i.e. integral
// distributions in scaled moments. The loss of a pivot is its valuation
// relative to the column shift, and an
// unpivoted column of shift j leaves t_j known modulo p^j only. Free unknowns
// are set to 0.
SolveResult solve_mod(std::vector<Int> A, std::vector<Int> b, int rows, int cols, Int p, int W,
                      const std::vector<int>& shift) {
  const Ring R(ipow(p, W));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      Int& x = A[static_cast<size_t>(i) * cols + j];
      if (x != 0 && shift[j] > 0) x = shift[j] >= W ? 0 : R.mul(x, ipow(p, shift[j]));
    }
  std::vector<int> colperm(static_cast<size_t>(cols));
  std::iota(colperm.begin(), colperm.end(), 0);
  std::vector<int> pivval;
  SolveResult res;
  res.residual = W;
  int k = 0;
  for (; k < std::min(rows, cols); ++k) {
    // least absolute valuation decides solvability; ties prefer the smaller loss
    int br = -1, bc = -1, bv = W, bl = W;
    for (int i = k; i < rows && bv > 0; ++i) {
      const Int* row = &A[static_cast<size_t>(i) * cols];
      for (int j = k; j < cols; ++j) {
        if (row[j] == 0) continue;
        const int v = valuation(row[j], p);
        const int loss = v - shift[colperm[j]];
        if (v < bv || (v == bv && loss < bl)) {
          bv = v;
          bl = loss;
          br = i;
          bc = j;
          if (v == 0 && loss == 0) break;
        }
      }
    }
    if (br < 0) break;
    if (br != k) {
      std::swap_ranges(A.begin() + static_cast<long>(br) * cols, A.begin() + static_cast<long>(br + 1) * cols,
                       A.begin() + static_cast<long>(k) * cols);
      std::swap(b[br], b[k]);
    }
    if (bc != k) {
      for (int i = 0; i < rows; ++i) std::swap(A[static_cast<size_t>(i) * cols + bc], A[static_cast<size_t>(i) * cols + k]);
      std::swap(colperm[bc], colperm[k]);
    }

    const Int pv = ipow(p, bv);
    const Int uinv = invmod(A[static_cast<size_t>(k) * cols + k] / pv, R.m);
    const Int* prow = &A[static_cast<size_t>(k) * cols];
    for (int i = k + 1; i < rows; ++i) {
      Int* row = &A[static_cast<size_t>(i) * cols];
      if (row[k] == 0) continue;
      const Int f = R.mul(row[k] / pv, uinv);
      for (int j = k; j < cols; ++j)
        if (prow[j] != 0) row[j] = R.sub(row[j], R.mul(f, prow[j]));
      b[i] = R.sub(b[i], R.mul(f, b[k]));
    }
    pivval.push_back(bv);
    res.max_pivot = std::max(res.max_pivot, bv - shift[colperm[k]]);
  }
  res.rank = k;
  for (int i = k; i < rows; ++i)
    if (b[i] != 0) res.residual = std::min(res.residual, valuation(b[i], p));
  std::vector<Int> y(static_cast<size_t>(cols), 0);
  for (int i = k - 1; i >= 0; --i) {
    Int s = b[i];
    const Int* row = &A[static_cast<size_t>(i) * cols];
    for (int j = i + 1; j < k; ++j)
      if (row[j] != 0) s = R.sub(s, R.mul(row[j], y[j]));
    const int v = pivval[i];
    if (s != 0 && valuation(s, p) < v) res.residual = std::min(res.residual, valuation(s, p));
    const Int pv = ipow(p, v);
    y[i] = R.mul(s / pv, invmod(row[i] / pv, R.m));
  }
  for (int j = k; j < cols; ++j) res.max_pivot = std::max(res.max_pivot, W - shift[colperm[j]]);
  res.x.assign(static_cast<size_t>(cols), 0);
  for (int j = 0; j < cols; ++j) {
    const int c = colperm[j];
    res.x[c] = shift[c] >= W ? 0 : R.mul(y[j], ipow(p, shift[c]));
  }
  return res;
}

// Column shifts for unknowns (generator g, moment i >= 1) laid out as
// g * (W - 1) + i - 1: t_i in p^(i - h) Z_p, i.e. values in p^-h D^0.
std::vector<int> moment_shifts(int G, int W, int h = 0) {
  std::vector<int> s(static_cast<size_t>(G) * (W - 1));
  for (int g = 0; g < G; ++g)
    for (int i = 1; i < W; ++i) s[g * (W - 1) + i - 1] = std::max(0, i - h);
  return s;
}

struct Term {
  int label;
  Mat2 gamma_inv;  // Psi(label) | gamma_inv
};

using Expr = std::vector<std::pair<int, Mat>>;  // (generator index, matrix)

}  // namespace

struct OCContext {
  Int level = 0, p = 0;
  int W = 0;
  Int mod = 0;
  P1List p1;
  std::vector<Mat2> reps;
  std::vector<std::vector<Term>> relations;
  std::vector<int> gens;
  std::vector<Expr> expr;
  std::vector<Expr> constraints;
  std::vector<std::vector<std::pair<int, Mat>>> up;  // per label: (label y, K)
  mutable std::once_flag up_gen_once;
  mutable std::vector<std::vector<Mat>> up_gen;  // [x][g]; empty when zero

  std::pair<int, Mat2> locate(const Mat2& g) const {
    const int y = p1.index(g.c, g.d);
    if (y < 0) throw ConsistencyError("matrix outside SL_2(Z)");
    const Mat2 gi = reps[y] * inverse(g);
    if (gi.c % level != 0) throw ConsistencyError("Manin symbol lookup left Gamma_0(N)");
    return {y, gi};
  }

  Mat action(const Mat2& g) const { return action_matrix(g, p, W, Ring(mod)); }

  void build();
  void build_up();
  const std::vector<std::vector<Mat>>& generator_up() const;

  std::vector<std::vector<Int>> expand(const std::vector<std::vector<Int>>& gen_values) const;
  std::vector<Int> evaluate(const std::vector<std::vector<Int>>& values, const Cusp& r) const;
  std::vector<std::vector<Int>> apply_up(const std::vector<std::vector<Int>>& values) const;
};

void OCContext::build() {
  mod = ipow(p, W);
  const Ring R(mod);
  p1 = P1List(level);
  const int n = p1.size();
  reps.resize(static_cast<size_t>(n));
  for (int x = 0; x < n; ++x) {
    reps[x] = representative(p1[x].first, p1[x].second, level);
    if (p1.index(reps[x].c, reps[x].d) != x) throw ConsistencyError("representative has the wrong label");
  }

  const Mat2 sigma{0, -1, 1, 0}, tau{0, -1, 1, -1};
  std::vector<bool> seen2(static_cast<size_t>(n), false), seen3(static_cast<size_t>(n), false);
  for (int x = 0; x < n; ++x) {
    if (!seen2[x]) {
      const auto [y, gi] = locate(reps[x] * sigma);
      relations.push_back({{x, Mat2{}}, {y, gi}});
      seen2[x] = seen2[y] = true;
    }
    if (!seen3[x]) {
      const auto [y1, g1] = locate(reps[x] * tau);
      const auto [y2, g2] = locate(reps[x] * tau * tau);
      relations.push_back({{x, Mat2{}}, {y1, g1}, {y2, g2}});
      seen3[x] = seen3[y1] = seen3[y2] = true;
    }
  }

  // Greedy elimination: solve relations with a single unknown, otherwise
  // promote an unknown label to a generator.
  std::vector<bool> known(static_cast<size_t>(n), false), used(relations.size(), false);
  expr.assign(static_cast<size_t>(n), {});
  int n_known = 0;
  const Mat I = identity_mat(W);
  auto unknowns = [&](const std::vector<Term>& rel, bool& dup) {
    std::vector<int> u;
    dup = false;
    for (const Term& t : rel)
      if (!known[t.label]) {
        if (std::find(u.begin(), u.end(), t.label) != u.end())
          dup = true;
        else
          u.push_back(t.label);
      }
    return u;
  };
  while (n_known < n) {
    bool progress = false;
    for (size_t r = 0; r < relations.size(); ++r) {
      if (used[r]) continue;
      bool dup = false;
      const auto u = unknowns(relations[r], dup);
      if (u.size() != 1 || dup) continue;
      const int target = u[0];
      const Term* tt = nullptr;
      for (const Term& t : relations[r])
        if (t.label == target) tt = &t;
      const Mat2 tinv = inverse(tt->gamma_inv);
      std::map<int, Mat> acc;
      for (const Term& t : relations[r]) {
        if (&t == tt) continue;
        const Mat K = action(t.gamma_inv * tinv);
        for (const auto& [g, E] : expr[t.label]) {
          auto it = acc.try_emplace(g, Mat(I.size(), 0)).first;
          mat_sub(it->second, mat_mul(E, K, W, mod), R);
        }
      }
      for (auto& [g, E] : acc) expr[target].emplace_back(g, std::move(E));
      known[target] = true;
      ++n_known;
      used[r] = true;
      progress = true;
    }
    if (progress) continue;
    int choice = -1;
    size_t fewest = SIZE_MAX;
    for (size_t r = 0; r < relations.size(); ++r) {
      if (used[r]) continue;
      bool dup = false;
      const auto u = unknowns(relations[r], dup);
      if (!u.empty() && u.size() < fewest) {
        fewest = u.size();
        choice = u[0];
      }
    }
    if (choice < 0)
      for (int x = 0; x < n && choice < 0; ++x)
        if (!known[x]) choice = x;
    expr[choice] = {{static_cast<int>(gens.size()), I}};
    gens.push_back(choice);
    known[choice] = true;
    ++n_known;
  }
  for (size_t r = 0; r < relations.size(); ++r) {
    if (used[r]) continue;
    std::map<int, Mat> acc;
    for (const Term& t : relations[r]) {
      const Mat K = action(t.gamma_inv);
      for (const auto& [g, E] : expr[t.label]) {
        auto it = acc.try_emplace(g, Mat(I.size(), 0)).first;
        mat_add(it->second, mat_mul(E, K, W, mod), R);
      }
    }
    Expr c;
    for (auto& [g, E] : acc)
      if (std::any_of(E.begin(), E.end(), [](Int v) { return v != 0; })) c.emplace_back(g, std::move(E));
    if (!c.empty()) constraints.push_back(std::move(c));
  }
  build_up();
}

void OCContext::build_up() {
  const Ring R(mod);
  const int n = p1.size();
  up.assign(static_cast<size_t>(n), {});
  for (int x = 0; x < n; ++x) {
    std::map<int, Mat> acc;
    const Mat2& gx = reps[x];
    for (Int a = 0; a < p; ++a) {
      const Mat2 ga{1, a, 0, p};
      const Cusp r = act(ga, make_cusp(gx.b, gx.d)), s = act(ga, make_cusp(gx.a, gx.c));
      for (int sign : {1, -1})
        for (const Mat2& g : unimodular_pieces(sign > 0 ? r : s)) {
          const auto [y, gi] = locate(g);
          const Mat K = action(gi * ga);
          auto it = acc.try_emplace(y, Mat(K.size(), 0)).first;
          if (sign > 0)
            mat_add(it->second, K, R);
          else
            mat_sub(it->second, K, R);
        }
    }
    for (auto& [y, K] : acc) up[x].emplace_back(y, std::move(K));
  }
}

const std::vector<std::vector<Mat>>& OCContext::generator_up() const {
  std::call_once(up_gen_once, [this] {
    const Ring R(mod);
    up_gen.assign(gens.size(), std::vector<Mat>(gens.size()));
    for (size_t xi = 0; xi < gens.size(); ++xi)
      for (const auto& [y, K] : up[gens[xi]])
        for (const auto& [g, E] : expr[y]) {
          Mat& T = up_gen[xi][g];
          if (T.empty()) T.assign(K.size(), 0);
          mat_add(T, mat_mul(E, K, W, mod), R);
        }
  });
  return up_gen;
}

std::vector<std::vector<Int>> OCContext::expand(const std::vector<std::vector<Int>>& gen_values) const {
  const Ring R(mod);
  std::vector<std::vector<Int>> out(expr.size(), std::vector<Int>(static_cast<size_t>(W), 0));
  for (size_t x = 0; x < expr.size(); ++x)
    for (const auto& [g, E] : expr[x]) vec_add(out[x], vec_mat(gen_values[g], E, W, mod), R);
  return out;
}

std::vector<Int> OCContext::evaluate(const std::vector<std::vector<Int>>& values, const Cusp& r) const {
  const Ring R(mod);
  std::vector<Int> out(static_cast<size_t>(W), 0);
  for (const Mat2& g : unimodular_pieces(r)) {
    const auto [y, gi] = locate(g);
    vec_add(out, vec_mat(values[y], action(gi), W, mod), R);
  }
  return out;
}

std::vector<std::vector<Int>> OCContext::apply_up(const std::vector<std::vector<Int>>& values) const {
  const Ring R(mod);
  std::vector<std::vector<Int>> out(up.size(), std::vector<Int>(static_cast<size_t>(W), 0));
  for (size_t x = 0; x < up.size(); ++x)
    for (const auto& [y, K] : up[x]) vec_add(out[x], vec_mat(values[y], K, W, mod), R);
  return out;
}

std::shared_ptr<const OCContext> oc_context(Int level, Int p, int W) {
  if (!is_prime(p) || p < 3) throw InvalidInput("overconvergent symbols need an odd prime");
  if (level % p != 0) throw InvalidInput("the level must be divisible by p");
  if (W < 2 || W > max_precision(p)) throw PrecisionError("working precision outside the machine range", W);
  static std::mutex lock;
  static std::map<std::tuple<Int, Int, int>, std::weak_ptr<const OCContext>> cache;
  std::lock_guard<std::mutex> guard(lock);
  const auto key = std::make_tuple(level, p, W);
  if (auto it = cache.find(key); it != cache.end())
    if (auto ctx = it->second.lock()) return ctx;
  auto ctx = std::make_shared<OCContext>();
  ctx->level = level;
  ctx->p = p;
  ctx->W = W;
  ctx->build();
  cache[key] = ctx;
  return ctx;
}

Int StabilizedSymbol::numerator_mod(const Rational& r, int W) const { return symbol_num_mod(*this, to_cusp(r), W); }

PadicNumber StabilizedSymbol::scale() const { return PadicNumber::exact(p, *base->c_cal) / lambda; }

PadicNumber StabilizedSymbol::value(const Rational& r) const {
  const Cusp c = to_cusp(r);
  const int W = std::min(precision, max_precision(p));
  const Int v = symbol_num_mod(*this, c, W);
  PadicNumber num = v == 0 ? PadicNumber::zero_mod(p, W) : PadicNumber(p, v, W - valuation(v, p));
  return scale() * num;
}

StabilizedSymbol p_stabilize(const EigenSymbol& phi, const PadicNumber& lambda, int M) {
  if (!phi.c_cal) throw InvalidInput("stabilization needs a calibrated symbol");
  if (phi.is_twist()) throw InvalidInput("stabilize the untwisted symbol");
  const Int p = lambda.prime();
  if (phi.level % p == 0) throw BadReductionError("p divides the level");
  if (lambda.is_zero()) throw InvalidInput("zero Hecke root");
  StabilizedSymbol s;
  s.base = std::make_shared<const EigenSymbol>(phi);
  s.p = p;
  s.lambda = lambda;
  s.precision = std::min(M, lambda.absolute_precision());
  return s;
}

StabilizedSymbol beta_stabilize(const EigenSymbol& phi, const HeckeRoots& roots, int M) {
  return p_stabilize(phi, roots.beta, M);
}

StabilizedSymbol alpha_stabilize(const EigenSymbol& phi, const HeckeRoots& roots, int M) {
  return p_stabilize(phi, roots.alpha, M);
}

int stabilization_defect(const StabilizedSymbol& phi) {
  const Int N = phi.level(), p = phi.p;
  const int W = std::min(phi.precision, max_precision(p));
  const Int mod = ipow(p, W);
  const Int lam = reduce(phi.lambda.lift(), mod);
  const P1List p1(N);
  int defect = INT_MAX;
  for (int x = 0; x < p1.size(); ++x) {
    const Mat2 g = representative(p1[x].first, p1[x].second, N);
    auto path = [&](const Cusp& r, const Cusp& s) {
      return reduce(symbol_num_mod(phi, r, W) - symbol_num_mod(phi, s, W), mod);
    };
    Int lhs = 0;
    for (Int a = 0; a < p; ++a) {
      const Mat2 ga{1, a, 0, p};
      lhs = reduce(lhs + path(act(ga, make_cusp(g.b, g.d)), act(ga, make_cusp(g.a, g.c))), mod);
    }
    const Int diff = reduce(lhs - mulmod(lam, path(make_cusp(g.b, g.d), make_cusp(g.a, g.c)), mod), mod);
    if (diff != 0) defect = std::min(defect, valuation(diff, p));
  }
  return defect;
}

PadicNumber FiniteDistribution::moment(int j) const {
  if (j < 0 || j >= W) throw InvalidInput("moment index outside the approximation module");
  const Int v = reduce(t[j], ipow(p, W));
  const PadicNumber x = v == 0 ? PadicNumber::zero_mod(p, W) : PadicNumber(p, v, W - valuation(v, p));
  return x / ipow(p, j);
}

FiniteDistribution act(const FiniteDistribution& mu, const Mat2& g) {
  const Int m = ipow(mu.p, mu.W);
  return {mu.p, mu.W, vec_mat(mu.t, action_matrix(g, mu.p, mu.W, Ring(m)), mu.W, m)};
}

std::string PrecisionLedger::to_string() const {
  std::ostringstream out;
  out << "working=" << working << " target=" << target << " denominator=" << denominator << " lift_loss=" << lift_loss
      << " projection_loss=" << projection_loss << " floor=" << floor() << " residuals=[";
  for (size_t i = 0; i < residual_log.size(); ++i) out << (i ? "," : "") << residual_log[i];
  out << "]";
  return out.str();
}

FiniteDistribution OCSymbol::evaluate(const Rational& r) const {
  return {p, W, context->evaluate(values, to_cusp(r))};
}

OCSymbol lift_to_distributions(const StabilizedSymbol& phi, int M, int extra) {
  if (M < 1 || extra < 0) throw InvalidInput("lift: need M >= 1 and extra >= 0");
  const int W = M + extra;
  if (phi.precision < W) throw PrecisionError("Hecke root known to too few digits for the lift", W);
  auto ctx = oc_context(phi.level(), phi.p, W);
  const Int p = phi.p;
  const int G = static_cast<int>(ctx->gens.size());
  const int cols = G * (W - 1);
  const Int mod = ctx->mod;
  const Ring R(mod);

  std::vector<std::vector<Int>> gv(static_cast<size_t>(G), std::vector<Int>(static_cast<size_t>(W), 0));
  for (int g = 0; g < G; ++g) {
    const Mat2& r = ctx->reps[ctx->gens[g]];
    gv[g][0] = reduce(symbol_num_mod(phi, make_cusp(r.b, r.d), W) - symbol_num_mod(phi, make_cusp(r.a, r.c), W), mod);
  }
  const int rows = static_cast<int>(ctx->constraints.size()) * W;
  std::vector<Int> A(static_cast<size_t>(rows) * cols, 0), b(static_cast<size_t>(rows), 0);
  for (size_t c = 0; c < ctx->constraints.size(); ++c)
    for (const auto& [g, B] : ctx->constraints[c])
      for (int j = 0; j < W; ++j) {
        const size_t row = c * W + j;
        for (int i = 1; i < W; ++i) A[row * cols + g * (W - 1) + (i - 1)] = B[i * W + j];
        b[row] = R.sub(b[row], R.mul(gv[g][0], B[j]));
      }
  // Smallest e for which the relations are solvable in p^-e D^0 (a torsion
  // obstruction in the Manin relations can force e > 0).
  SolveResult sol;
  int e = 0;
  for (;; ++e) {
    sol = solve_mod(A, b, rows, cols, p, W, moment_shifts(G, W, e));
    if (sol.residual >= W - e || e + 1 >= W) break;
  }
  for (int g = 0; g < G; ++g)
    for (int i = 1; i < W; ++i) gv[g][i] = sol.x[g * (W - 1) + (i - 1)];

  OCSymbol theta;
  theta.context = ctx;
  theta.p = p;
  theta.level = ctx->level;
  theta.W = W;
  theta.scale = phi.scale();
  theta.lambda = phi.lambda;
  theta.values = ctx->expand(gv);
  for (size_t x = 0; x < ctx->reps.size(); ++x) {
    const Mat2& r = ctx->reps[x];
    const Int t0 = reduce(symbol_num_mod(phi, make_cusp(r.b, r.d), W) - symbol_num_mod(phi, make_cusp(r.a, r.c), W), mod);
    if (t0 != theta.values[x][0]) throw ConsistencyError("lift does not specialize to the input symbol");
  }
  theta.ledger.working = W;
  theta.ledger.target = M;
  theta.ledger.denominator = e;
  theta.ledger.lift_loss = std::max(e, W - sol.residual);
  if (theta.ledger.floor() < M) throw LiftFailure("Manin relations leave no lift at the requested precision");
  return theta;
}

int manin_defect(const OCSymbol& theta) {
  const OCContext& ctx = *theta.context;
  const Ring R(ctx.mod);
  int defect = theta.W;
  for (const auto& rel : ctx.relations) {
    std::vector<Int> sum(static_cast<size_t>(theta.W), 0);
    for (const Term& t : rel) vec_add(sum, vec_mat(theta.values[t.label], ctx.action(t.gamma_inv), theta.W, ctx.mod), R);
    defect = std::min(defect, min_valuation(sum, theta.p, theta.W));
  }
  return defect;
}

namespace {

std::vector<std::vector<Int>> eigen_residual(const OCSymbol& theta) {
  const OCContext& ctx = *theta.context;
  const Ring R(ctx.mod);
  const Int lam = reduce(theta.lambda.lift(), ctx.mod);
  auto out = ctx.apply_up(theta.values);
  for (size_t x = 0; x < out.size(); ++x)
    for (int j = 0; j < theta.W; ++j) out[x][j] = R.sub(out[x][j], R.mul(lam, theta.values[x][j]));
  return out;
}

}  // namespace

int eigen_defect(const OCSymbol& theta) {
  int defect = theta.W;
  for (const auto& v : eigen_residual(theta)) defect = std::min(defect, min_valuation(v, theta.p, theta.W));
  return defect;
}

OCSymbol up_eigenproject(const OCSymbol& theta, int iterations) {
  if (iterations < 1) throw InvalidInput("need at least one projection step");
  const OCContext& ctx = *theta.context;
  const int W = theta.W, G = static_cast<int>(ctx.gens.size());
  const Int p = theta.p, mod = ctx.mod;
  const Ring R(mod);
  const Int lam = reduce(theta.lambda.lift(), mod);
  const int slope = theta.lambda.valuation();
  const int lattice = std::max(slope, theta.ledger.denominator);
  const auto& ug = ctx.generator_up();
  const int cols = G * (W - 1);
  const int nc = static_cast<int>(ctx.constraints.size());
  const int rows = (nc + G) * W;

  // Coefficient matrix: Manin constraints, then (U_p - lambda) on the generators.
  std::vector<Int> A(static_cast<size_t>(rows) * cols, 0);
  for (int c = 0; c < nc; ++c)
    for (const auto& [g, B] : ctx.constraints[c])
      for (int j = 0; j < W; ++j)
        for (int i = 1; i < W; ++i) A[static_cast<size_t>(c * W + j) * cols + g * (W - 1) + (i - 1)] = B[i * W + j];
  for (int x = 0; x < G; ++x)
    for (int g = 0; g < G; ++g) {
      const Mat& T = ug[x][g];
      for (int j = 0; j < W; ++j) {
        const size_t row = static_cast<size_t>((nc + x) * W + j);
        for (int i = 1; i < W; ++i) {
          Int v = T.empty() ? 0 : T[i * W + j];
          if (g == x && i == j) v = R.sub(v, lam);
          A[row * cols + g * (W - 1) + (i - 1)] = v;
        }
      }
    }

  OCSymbol cur = theta;
  std::vector<std::vector<Int>> gv(static_cast<size_t>(G));
  for (int g = 0; g < G; ++g) gv[g] = cur.values[ctx.gens[g]];
  int best = eigen_defect(cur);
  int stalls = 0;
  for (int it = 0; it < iterations; ++it) {
    if (best >= cur.ledger.floor() && it > 0) break;
    const auto resid = eigen_residual(cur);
    std::vector<Int> b(static_cast<size_t>(rows), 0);
    for (int c = 0; c < nc; ++c) {
      std::vector<Int> s(static_cast<size_t>(W), 0);
      for (const auto& [g, B] : ctx.constraints[c]) vec_add(s, vec_mat(gv[g], B, W, mod), R);
      for (int j = 0; j < W; ++j) b[c * W + j] = R.neg(s[j]);
    }
    for (int x = 0; x < G; ++x)
      for (int j = 0; j < W; ++j) b[(nc + x) * W + j] = R.neg(resid[ctx.gens[x]][j]);
    const SolveResult sol = solve_mod(A, std::move(b), rows, cols, p, W, moment_shifts(G, W, lattice));
    // values in p^-h D^0 see the truncated action only modulo p^(W - h); the
    // lift already paid for its own denominator
    cur.ledger.projection_loss =
        std::max(cur.ledger.projection_loss, sol.max_pivot + lattice - theta.ledger.denominator);
    if (cur.ledger.floor() < 1) throw LiftFailure("the U_p eigenspace is not a line: no unique eigenlift (theta-critical)");
    for (int g = 0; g < G; ++g)
      for (int i = 1; i < W; ++i) gv[g][i] = R.add(gv[g][i], sol.x[g * (W - 1) + (i - 1)]);
    cur.values = ctx.expand(gv);
    const int d = eigen_defect(cur);
    cur.ledger.residual_log.push_back(d);
    if (d > best) {
      best = d;
      stalls = 0;
    } else if (++stalls >= 3) {
      throw DivergenceError("eigen residual stopped improving");
    }
    if (best >= cur.ledger.floor()) break;
  }
  return cur;
}

PadicMeasure specialize_measure(const OCSymbol& theta, int depth) {
  if (depth < 1) throw InvalidInput("depth must be positive");
  const Int p = theta.p;
  const int prec = theta.ledger.floor();
  if (prec < 1) throw PrecisionError("no certified digits left", 1);
  const Int m_out = ipow(p, prec);
  if (theta.lambda.valuation() > 1) throw SlopeError("specialization supports slopes 0 and 1");
  if (ipow(p, depth) > 50'000'000 / p) throw DepthError("measure table too large", depth);
  const OCContext& ctx = *theta.context;

  auto moment0 = [&](const Cusp& r) {
    Int s = 0;
    for (const Mat2& g : unimodular_pieces(r)) s = reduce(s + theta.values[ctx.locate(g).first][0], ctx.mod);
    return reduce(s, m_out);
  };

  PadicMeasure mu;
  mu.p = p;
  mu.n_max = depth;
  mu.precision = prec;
  mu.growth = theta.lambda.valuation() == 0 ? 0 : 1;
  mu.scale = theta.scale;
  const PadicNumber linv = theta.lambda.inverse();
  mu.level_scale.resize(static_cast<size_t>(depth) + 1);
  mu.level_scale[0] = linv;
  PadicNumber ls = PadicNumber::exact(p, 1);
  mu.raw.resize(static_cast<size_t>(depth) + 1);
  for (int n = 1; n <= depth; ++n) {
    ls = ls * linv;
    mu.level_scale[n] = ls;
    const Int m = ipow(p, n);
    mu.raw[n].assign(static_cast<size_t>(m), 0);
    for (Int a = 1; a < m; ++a)
      if (a % p != 0) mu.raw[n][a] = moment0(make_cusp(a, m));
  }
  Int total = 0;
  for (Int a = 1; a < p; ++a) total = reduce(total + mu.raw[1][a], m_out);
  mu.raw[0] = {total};
  return mu;
}

LJet oc_jet(const OCSymbol& theta, int J, int tame) {
  if (J < 0) throw InvalidInput("jet order must be >= 0");
  const Int p = theta.p;
  const int W = theta.W;
  int log_loss = 0;
  for (Int k = p; k <= W; k *= p) ++log_loss;
  const int lattice = std::max({0, theta.lambda.valuation(), theta.ledger.denominator});
  const int prec = std::min(theta.ledger.floor(), W - log_loss - lattice);
  if (prec < 1) throw PrecisionError("no certified digits left for the jet", W + 1);
  const int work = W + 2 * log_loss + 2;
  const TeichmullerCharacter chi{p, tame};

  auto residue = [&](Int v) {
    v = reduce(v, ipow(p, W));
    return v == 0 ? PadicNumber::zero_mod(p, W) : PadicNumber(p, v, W - valuation(v, p));
  };

  std::vector<PadicNumber> sums(static_cast<size_t>(J) + 1, PadicNumber::exact_zero(p));
  for (Int a = 1; a < p; ++a) {
    const FiniteDistribution nu = theta.evaluate(make_rational(a, p));
    // log(a + z) as a power series in z, truncated below z^W
    std::vector<PadicNumber> lg(static_cast<size_t>(W), PadicNumber::exact_zero(p));
    lg[0] = padic_log(PadicNumber(p, a, work));
    const PadicNumber ainv = PadicNumber(p, a, work).inverse();
    PadicNumber apow = PadicNumber::exact(p, 1);
    for (int k = 1; k < W; ++k) {
      apow = apow * ainv;
      lg[k] = (k % 2 == 1 ? apow : -apow) / static_cast<Int>(k);
    }
    std::vector<PadicNumber> pw(static_cast<size_t>(W), PadicNumber::exact_zero(p));
    pw[0] = PadicNumber::exact(p, 1);
    const PadicNumber w = chi(a, work);
    for (int j = 0; j <= J; ++j) {
      PadicNumber integral = PadicNumber::exact_zero(p);
      for (int k = 0; k < W; ++k)
        if (!pw[k].is_exact_zero()) integral += pw[k] * residue(nu.t[k]);
      sums[j] += w * integral.add_bigoh(prec);
      std::vector<PadicNumber> next(static_cast<size_t>(W), PadicNumber::exact_zero(p));
      for (int k = 0; k < W; ++k)
        for (int l = 0; k + l < W; ++l)
          if (!pw[k].is_exact_zero() && !lg[l].is_exact_zero()) next[k + l] += pw[k] * lg[l];
      pw = std::move(next);
    }
  }
  LJet jet;
  jet.p = p;
  jet.tame = tame;
  const PadicNumber factor = theta.scale * theta.lambda.inverse();
  Int fact = 1;
  for (int j = 0; j <= J; ++j) {
    if (j > 1) fact *= j;
    jet.coeffs.push_back(factor * sums[j].add_bigoh(prec) / fact);
  }
  return jet;
}


std::string serialize(const OCSymbol& theta) {
  std::ostringstream out;
  out << "prpoint-ocsymbol 1\n";
  out << "level " << theta.level << "\np " << theta.p << "\nW " << theta.W << "\n";
  out << "scale " << padic_record(theta.scale) << "\n";
  out << "lambda " << padic_record(theta.lambda) << "\n";
  const PrecisionLedger& L = theta.ledger;
  out << "ledger " << L.working << ' ' << L.target << ' ' << L.denominator << ' ' << L.lift_loss << ' ' << L.projection_loss << ' '
      << L.residual_log.size();
  for (int r : L.residual_log) out << ' ' << r;
  out << "\nlabels " << theta.values.size() << "\n";
  const P1List& p1 = theta.context->p1;
  for (size_t x = 0; x < theta.values.size(); ++x) {
    out << p1[static_cast<int>(x)].first << ' ' << p1[static_cast<int>(x)].second;
    for (Int v : theta.values[x]) out << ' ' << v;
    out << "\n";
  }
  return out.str();
}

OCSymbol deserialize_oc_symbol(const std::string& text) {
  std::istringstream in(text);
  std::string tag, key;
  int version = 0;
  if (!(in >> tag >> version) || tag != "prpoint-ocsymbol") throw InvalidInput("not an overconvergent symbol file");
  if (version != 1) throw InvalidInput("unsupported overconvergent format version " + std::to_string(version));
  OCSymbol theta;
  in >> key >> theta.level >> key >> theta.p >> key >> theta.W;
  if (!in || theta.p < 3 || theta.level < 1 || !is_prime(theta.p)) throw InvalidInput("corrupt overconvergent header");
  in >> key;
  theta.scale = read_padic_record(in, theta.p);
  in >> key;
  theta.lambda = read_padic_record(in, theta.p);
  size_t nres = 0;
  in >> key >> theta.ledger.working >> theta.ledger.target >> theta.ledger.denominator >> theta.ledger.lift_loss >> theta.ledger.projection_loss >> nres;
  if (!in || theta.ledger.working != theta.W || nres > 1000) throw InvalidInput("corrupt precision ledger");
  theta.ledger.residual_log.resize(nres);
  for (int& r : theta.ledger.residual_log) in >> r;
  size_t n = 0;
  in >> key >> n;
  if (!in) throw InvalidInput("corrupt overconvergent file");
  theta.context = oc_context(theta.level, theta.p, theta.W);
  const P1List& p1 = theta.context->p1;
  if (n != static_cast<size_t>(p1.size())) throw InvalidInput("label count does not match the level");
  theta.values.assign(n, std::vector<Int>(static_cast<size_t>(theta.W), 0));
  for (size_t i = 0; i < n; ++i) {
    Int c = 0, d = 0;
    if (!(in >> c >> d)) throw InvalidInput("truncated overconvergent file");
    const int idx = p1.index(c, d);
    if (idx < 0) throw InvalidInput("label outside P1");
    for (Int& v : theta.values[idx])
      if (!(in >> v) || v < 0 || v >= theta.context->mod) throw InvalidInput("moment outside the working module");
  }
  return theta;
}

}  // namespace prpoint
