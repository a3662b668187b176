#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "trn/block.hpp"
#include "trn/error.hpp"
#include "trn/matrix.hpp"

namespace trn {

// First/second moment accumulators for one parameter block.
template <typename S>
struct AdamState {
  std::vector<S> m;
  std::vector<S> v;
  std::uint64_t step = 0;
};

struct AdamHyper {
  double lr = 0.0005;
  double weight_decay = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update. Weight decay enters as an L2 term added
// to the gradient before the moment updates.
template <typename S>
void adam_step(S* param, const S* grad, std::size_t n, AdamState<S>& state,
               const AdamHyper& hp) {
  if (state.m.empty()) {
    state.m.assign(n, S(0));
    state.v.assign(n, S(0));
  }
  if (state.m.size() != n)
    throw ShapeError("adam_step: state tracks " + std::to_string(state.m.size()) +
                     " values but parameter has " + std::to_string(n));
  state.step += 1;
  const S b1 = S(hp.beta1), b2 = S(hp.beta2);
  const S corr1 = S(1) - static_cast<S>(std::pow(hp.beta1, static_cast<double>(state.step)));
  const S corr2 = S(1) - static_cast<S>(std::pow(hp.beta2, static_cast<double>(state.step)));
  for (std::size_t i = 0; i < n; ++i) {
    S g = grad[i] + S(hp.weight_decay) * param[i];
    state.m[i] = b1 * state.m[i] + (S(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (S(1) - b2) * g * g;
    S mhat = state.m[i] / corr1;
    S vhat = state.v[i] / corr2;
    param[i] -= S(hp.lr) * mhat / (std::sqrt(vhat) + S(hp.eps));
  }
}

template <typename S>
void adam_step(Matrix<S>& param, const Matrix<S>& grad, AdamState<S>& state,
               const AdamHyper& hp) {
  if (param.rows != grad.rows || param.cols != grad.cols)
    throw ShapeError("adam_step: parameter is " + param.shape_str() + " but gradient is " +
                     grad.shape_str());
  adam_step(param.data.data(), grad.data.data(), param.size(), state, hp);
}

// Adam over a full parameter list; states align with the block order.
template <typename S>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamHyper hp) : hp_(hp) {}

  void step(std::vector<ParamView<S>> params, std::vector<ParamView<S>> grads) {
    if (params.size() != grads.size())
      throw ShapeError("adam: " + std::to_string(params.size()) + " parameter blocks vs " +
                       std::to_string(grads.size()) + " gradient blocks");
    if (states_.empty()) states_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (params[i].size() != grads[i].size())
        throw ShapeError("adam: block " + params[i].name + " has " +
                         std::to_string(params[i].size()) + " values but gradient has " +
                         std::to_string(grads[i].size()));
      adam_step(params[i].data, grads[i].data, params[i].size(), states_[i], hp_);
    }
  }

  const AdamHyper& hyper() const { return hp_; }

 private:
  AdamHyper hp_;
  std::vector<AdamState<S>> states_;
};

}  // namespace trn
