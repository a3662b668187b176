#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "trn/block.hpp"
#include "trn/error.hpp"

namespace trn {

// Central-difference gradient oracle. f must be pure and deterministic in
// the parameter values; it is evaluated 2n times. Only meaningful at
// 64-bit precision.
template <typename F>
std::vector<double> finite_diff_grad(F&& f, double* params, std::size_t n,
                                     double h = 1e-5) {
  std::vector<double> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double fp = f();
    params[i] = saved - h;
    const double fm = f();
    params[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite_diff_grad: non-finite evaluation at coordinate " +
                         std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

template <typename F>
std::vector<std::vector<double>> finite_diff_grad(F&& f,
                                                  std::vector<ParamView<double>> blocks,
                                                  double h = 1e-5) {
  std::vector<std::vector<double>> grads;
  grads.reserve(blocks.size());
  for (auto& b : blocks) grads.push_back(finite_diff_grad(f, b.data, b.size(), h));
  return grads;
}

// Relative error with a floor so near-zero entries compare absolutely.
inline double rel_err(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_rel_err(const double* a, const double* b, std::size_t n,
                          double floor = 1e-3) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, rel_err(a[i], b[i], floor));
  return worst;
}

}  // namespace trn
