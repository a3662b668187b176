#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "trn/error.hpp"
#include "trn/matrix.hpp"

namespace trn {

// Probability floor used when taking log of a predicted probability.
inline constexpr double kProbFloor = 1e-12;

template <typename S>
S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

template <typename S>
Vector<S> sigmoid(const Vector<S>& v) {
  Vector<S> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid(v[i]);
  return out;
}

template <typename S>
Vector<S> tanh_vec(const Vector<S>& v) {
  Vector<S> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

template <typename S>
Vector<S> relu(const Vector<S>& v) {
  Vector<S> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > S(0) ? v[i] : S(0);
  return out;
}

// Max-subtracted softmax; safe for logits of magnitude ~1e3.
template <typename S>
Vector<S> softmax(const Vector<S>& z) {
  if (z.empty()) throw ShapeError("softmax: empty input");
  S zmax = *std::max_element(z.begin(), z.end());
  Vector<S> p(z.size());
  S sum = S(0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  for (S& x : p) x /= sum;
  return p;
}

// -log p[label], with p floored at kProbFloor.
template <typename S>
double cross_entropy(const Vector<S>& p, std::size_t label) {
  if (label >= p.size())
    throw IndexError("cross_entropy: label " + std::to_string(label) +
                     " out of range for " + std::to_string(p.size()) + " classes");
  double q = static_cast<double>(p[label]);
  return -std::log(std::max(q, kProbFloor));
}

// Pull dL/dp back through p = softmax(z): dz_j = p_j (dp_j - p.dp).
template <typename S>
Vector<S> softmax_vjp(const Vector<S>& p, const Vector<S>& dp) {
  if (p.size() != dp.size())
    throw ShapeError("softmax_vjp: lengths " + std::to_string(p.size()) + " and " +
                     std::to_string(dp.size()));
  S dot = S(0);
  for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * dp[i];
  Vector<S> dz(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) dz[i] = p[i] * (dp[i] - dot);
  return dz;
}

}  // namespace trn
