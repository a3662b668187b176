#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "trn/error.hpp"

namespace trn {

template <typename S>
using Vector = std::vector<S>;

// Dense row-major matrix. No broadcasting: every shape mismatch is a hard
// error naming both shapes.
template <typename S>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<S> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, S(0)) {}

  static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }

  S& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  S operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::size_t size() const { return rows * cols; }

  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }

  void fill(S v) { data.assign(data.size(), v); }
};

template <typename S>
bool all_finite(const Vector<S>& v) {
  for (S x : v)
    if (!std::isfinite(static_cast<double>(x))) return false;
  return true;
}

template <typename S>
bool all_finite(const Matrix<S>& m) {
  return all_finite(m.data);
}

// y = W x + b
template <typename S>
Vector<S> linear(const Matrix<S>& w, const Vector<S>& x, const Vector<S>& b) {
  if (w.cols != x.size())
    throw ShapeError("linear: weight is " + w.shape_str() + " but input has length " +
                     std::to_string(x.size()));
  if (w.rows != b.size())
    throw ShapeError("linear: weight is " + w.shape_str() + " but bias has length " +
                     std::to_string(b.size()));
  Vector<S> y(b);
  for (std::size_t r = 0; r < w.rows; ++r) {
    const S* row = w.data.data() + r * w.cols;
    S acc = S(0);
    for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
  return y;
}

// y += W^T v  (pull a gradient back through W)
template <typename S>
void add_matvec_transposed(const Matrix<S>& w, const Vector<S>& v, Vector<S>& y) {
  if (w.rows != v.size())
    throw ShapeError("add_matvec_transposed: weight is " + w.shape_str() +
                     " but vector has length " + std::to_string(v.size()));
  if (w.cols != y.size())
    throw ShapeError("add_matvec_transposed: weight is " + w.shape_str() +
                     " but output has length " + std::to_string(y.size()));
  for (std::size_t r = 0; r < w.rows; ++r) {
    const S* row = w.data.data() + r * w.cols;
    const S vr = v[r];
    for (std::size_t c = 0; c < w.cols; ++c) y[c] += row[c] * vr;
  }
}

// W += a ⊗ b  (rank-one gradient accumulation)
template <typename S>
void add_outer(Matrix<S>& w, const Vector<S>& a, const Vector<S>& b) {
  if (w.rows != a.size() || w.cols != b.size())
    throw ShapeError("add_outer: weight is " + w.shape_str() + " but vectors have lengths " +
                     std::to_string(a.size()) + " and " + std::to_string(b.size()));
  for (std::size_t r = 0; r < w.rows; ++r) {
    S* row = w.data.data() + r * w.cols;
    const S ar = a[r];
    for (std::size_t c = 0; c < w.cols; ++c) row[c] += ar * b[c];
  }
}

template <typename S>
void add_scaled(Vector<S>& y, const Vector<S>& x, S scale) {
  if (y.size() != x.size())
    throw ShapeError("add_scaled: lengths " + std::to_string(y.size()) + " and " +
                     std::to_string(x.size()));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += scale * x[i];
}

template <typename S>
Vector<S> concat(const Vector<S>& a, const Vector<S>& b) {
  Vector<S> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace trn
