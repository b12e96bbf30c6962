#pragma once

#include <vector>

#include "prpoint/padic.hpp"

namespace prpoint {

/// Dense matrix over Q, row-major.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols) {}
  static QMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rational& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  const Rational& operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  QMatrix operator*(const QMatrix& o) const;
  QMatrix operator-(const QMatrix& o) const;
  bool operator==(const QMatrix& o) const;
  QMatrix transpose() const;
  QMatrix scaled_identity_minus(const Rational& a) const;  // this - a*I

  /// Reduced row echelon form in place; returns pivot columns.
  std::vector<int> rref();
  int rank() const;
  /// Basis of {v : M v = 0}, one vector per row of the result.
  QMatrix kernel() const;
  /// Basis of {w : w M = 0}, one vector per row of the result.
  QMatrix left_kernel() const { return transpose().kernel(); }
  Rational trace() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Rational> data_;
};

/// Scales a rational vector to coprime integers (first nonzero entry positive).
std::vector<BigInt> primitive_integer_vector(const std::vector<Rational>& v);

}  // namespace prpoint
