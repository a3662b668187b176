#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "trn/block.hpp"
#include "trn/matrix.hpp"
#include "trn/rng.hpp"

namespace trn {

// Affine map y = W x + b with gradient accumulation helpers.
template <typename S>
struct Affine {
  Matrix<S> w;
  Vector<S> b;

  Affine() = default;
  Affine(std::size_t out_dim, std::size_t in_dim) : w(out_dim, in_dim), b(out_dim, S(0)) {}

  std::size_t in_dim() const { return w.cols; }
  std::size_t out_dim() const { return w.rows; }

  Vector<S> apply(const Vector<S>& x) const { return linear(w, x, b); }

  // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) over weights and bias.
  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols));
    for (S& v : w.data) v = static_cast<S>(rng.uniform(-bound, bound));
    for (S& v : b) v = static_cast<S>(rng.uniform(-bound, bound));
  }

  // Accumulate dW += dy ⊗ x, db += dy; add W^T dy into dx.
  void backward(const Vector<S>& x, const Vector<S>& dy, Affine<S>& grad,
                Vector<S>* dx) const {
    add_outer(grad.w, dy, x);
    for (std::size_t i = 0; i < dy.size(); ++i) grad.b[i] += dy[i];
    if (dx) add_matvec_transposed(w, dy, *dx);
  }

  std::vector<ParamView<S>> blocks(const std::string& prefix) {
    return {view(prefix + ".w", w), view(prefix + ".b", b)};
  }
};

}  // namespace trn
