#include "prpoint/linalg.hpp"

#include "prpoint/errors.hpp"

namespace prpoint {

QMatrix QMatrix::identity(int n) {
  QMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

QMatrix QMatrix::operator*(const QMatrix& o) const {
  if (cols_ != o.rows_) throw InvalidInput("matrix shape mismatch");
  QMatrix r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const Rational& a = (*this)(i, k);
      if (a == 0) continue;
      for (int j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
    }
  return r;
}

QMatrix QMatrix::operator-(const QMatrix& o) const {
  QMatrix r = *this;
  for (size_t i = 0; i < data_.size(); ++i) r.data_[i] -= o.data_[i];
  return r;
}

bool QMatrix::operator==(const QMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
}

QMatrix QMatrix::transpose() const {
  QMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

QMatrix QMatrix::scaled_identity_minus(const Rational& a) const {
  QMatrix r = *this;
  for (int i = 0; i < std::min(rows_, cols_); ++i) r(i, i) -= a;
  return r;
}

std::vector<int> QMatrix::rref() {
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < cols_ && row < rows_; ++col) {
    int piv = -1;
    for (int i = row; i < rows_; ++i)
      if ((*this)(i, col) != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != row)
      for (int j = 0; j < cols_; ++j) std::swap((*this)(piv, j), (*this)(row, j));
    const Rational inv = 1 / (*this)(row, col);
    for (int j = col; j < cols_; ++j) (*this)(row, j) *= inv;
    for (int i = 0; i < rows_; ++i) {
      if (i == row || (*this)(i, col) == 0) continue;
      const Rational f = (*this)(i, col);
      for (int j = col; j < cols_; ++j)
        if ((*this)(row, j) != 0) (*this)(i, j) -= f * (*this)(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

int QMatrix::rank() const {
  QMatrix m = *this;
  return static_cast<int>(m.rref().size());
}

QMatrix QMatrix::kernel() const {
  QMatrix m = *this;
  const auto pivots = m.rref();
  std::vector<bool> is_pivot(static_cast<size_t>(cols_), false);
  for (int c : pivots) is_pivot[c] = true;
  QMatrix k(cols_ - static_cast<int>(pivots.size()), cols_);
  int r = 0;
  for (int free = 0; free < cols_; ++free) {
    if (is_pivot[free]) continue;
    k(r, free) = 1;
    for (size_t i = 0; i < pivots.size(); ++i) k(r, pivots[i]) = -m(static_cast<int>(i), free);
    ++r;
  }
  return k;
}

Rational QMatrix::trace() const {
  Rational t = 0;
  for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

std::vector<BigInt> primitive_integer_vector(const std::vector<Rational>& v) {
  BigInt l = 1;
  for (const Rational& q : v) l = lcm(l, BigInt(q.get_den()));
  std::vector<BigInt> out;
  BigInt g = 0;
  for (const Rational& q : v) {
    const Rational s = q * l;
    out.push_back(s.get_num());
    g = gcd(g, s.get_num());
  }
  if (g == 0) return out;
  int sign = 0;
  for (const BigInt& x : out)
    if (x != 0) {
      sign = sgn(x);
      break;
    }
  for (BigInt& x : out) x = x / g * sign;
  return out;
}

}  // namespace prpoint
