#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "trn/block.hpp"
#include "trn/error.hpp"
#include "trn/matrix.hpp"
#include "trn/ops.hpp"
#include "trn/rng.hpp"

namespace trn {

template <typename S>
struct CellState {
  Vector<S> h;
  Vector<S> c;

  static CellState zero(std::size_t hidden_dim) {
    return CellState{Vector<S>(hidden_dim, S(0)), Vector<S>(hidden_dim, S(0))};
  }
};

template <typename S>
struct GateParams {
  Matrix<S> wx;  // hidden x input
  Matrix<S> wh;  // hidden x hidden
  Vector<S> b;   // hidden
};

// Standard four-gate LSTM parameterization.
template <typename S>
struct LstmParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  GateParams<S> in_gate, forget_gate, out_gate, cand;

  LstmParams() = default;
  LstmParams(std::size_t in_dim, std::size_t hid_dim)
      : input_dim(in_dim), hidden_dim(hid_dim) {
    for (GateParams<S>* g : gates()) {
      g->wx = Matrix<S>(hid_dim, in_dim);
      g->wh = Matrix<S>(hid_dim, hid_dim);
      g->b = Vector<S>(hid_dim, S(0));
    }
  }

  std::array<GateParams<S>*, 4> gates() {
    return {&in_gate, &forget_gate, &out_gate, &cand};
  }
  std::array<const GateParams<S>*, 4> gates() const {
    return {&in_gate, &forget_gate, &out_gate, &cand};
  }

  // Weights and biases uniform in ±1/sqrt(fan_in); forget bias shifted +1.
  void init(Rng& rng) {
    for (GateParams<S>* g : gates()) {
      const double bx = 1.0 / std::sqrt(static_cast<double>(input_dim));
      for (S& v : g->wx.data) v = static_cast<S>(rng.uniform(-bx, bx));
      const double bh = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
      for (S& v : g->wh.data) v = static_cast<S>(rng.uniform(-bh, bh));
      for (S& v : g->b) v = static_cast<S>(rng.uniform(-bh, bh));
    }
    for (S& v : forget_gate.b) v += S(1);
  }

  std::vector<ParamView<S>> blocks(const std::string& prefix) {
    std::vector<ParamView<S>> out;
    const char* names[4] = {"i", "f", "o", "g"};
    auto gs = gates();
    for (int k = 0; k < 4; ++k) {
      out.push_back(view(prefix + "." + names[k] + ".wx", gs[k]->wx));
      out.push_back(view(prefix + "." + names[k] + ".wh", gs[k]->wh));
      out.push_back(view(prefix + "." + names[k] + ".b", gs[k]->b));
    }
    return out;
  }
};

// Everything the backward pass needs from one forward step.
template <typename S>
struct LstmCache {
  Vector<S> x, h_prev, c_prev;
  Vector<S> i, f, o, g;  // post-activation gate values
  Vector<S> c, tanh_c;
};

namespace detail {
template <typename S>
Vector<S> gate_preact(const GateParams<S>& g, const Vector<S>& x, const Vector<S>& h) {
  Vector<S> a = linear(g.wx, x, g.b);
  for (std::size_t r = 0; r < g.wh.rows; ++r) {
    const S* row = g.wh.data.data() + r * g.wh.cols;
    S acc = S(0);
    for (std::size_t c = 0; c < g.wh.cols; ++c) acc += row[c] * h[c];
    a[r] += acc;
  }
  return a;
}
}  // namespace detail

// c' = f⊙c + i⊙g,  h' = o⊙tanh(c')
template <typename S>
CellState<S> lstm_forward(const LstmParams<S>& p, const Vector<S>& x,
                          const CellState<S>& state, LstmCache<S>* cache = nullptr) {
  if (x.size() != p.input_dim)
    throw ShapeError("lstm: input has length " + std::to_string(x.size()) +
                     " but cell expects " + std::to_string(p.input_dim));
  if (state.h.size() != p.hidden_dim || state.c.size() != p.hidden_dim)
    throw ShapeError("lstm: state has lengths " + std::to_string(state.h.size()) + "/" +
                     std::to_string(state.c.size()) + " but cell expects " +
                     std::to_string(p.hidden_dim));
  Vector<S> i = sigmoid(detail::gate_preact(p.in_gate, x, state.h));
  Vector<S> f = sigmoid(detail::gate_preact(p.forget_gate, x, state.h));
  Vector<S> o = sigmoid(detail::gate_preact(p.out_gate, x, state.h));
  Vector<S> g = tanh_vec(detail::gate_preact(p.cand, x, state.h));

  const std::size_t n = p.hidden_dim;
  Vector<S> c(n), tc(n), h(n);
  for (std::size_t k = 0; k < n; ++k) {
    c[k] = f[k] * state.c[k] + i[k] * g[k];
    tc[k] = std::tanh(c[k]);
    h[k] = o[k] * tc[k];
  }
  if (cache) {
    cache->x = x;
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->o = std::move(o);
    cache->g = std::move(g);
    cache->c = c;
    cache->tanh_c = tc;
  }
  return CellState<S>{std::move(h), std::move(c)};
}

template <typename S>
CellState<S> lstm_step(const LstmParams<S>& p, const Vector<S>& x,
                       const CellState<S>& state) {
  return lstm_forward(p, x, state, static_cast<LstmCache<S>*>(nullptr));
}

// Backward through one step. dh/dc are the incoming gradients on h'/c';
// gradients for x, h_prev, c_prev come back through the out-params.
template <typename S>
void lstm_backward(const LstmParams<S>& p, const LstmCache<S>& cache, const Vector<S>& dh,
                   const Vector<S>& dc_in, LstmParams<S>& grad, Vector<S>& dx,
                   Vector<S>& dh_prev, Vector<S>& dc_prev) {
  const std::size_t n = p.hidden_dim;
  Vector<S> dc(n), da_i(n), da_f(n), da_o(n), da_g(n);
  dc_prev.assign(n, S(0));
  for (std::size_t k = 0; k < n; ++k) {
    const S tc = cache.tanh_c[k];
    dc[k] = dc_in[k] + dh[k] * cache.o[k] * (S(1) - tc * tc);
    const S do_ = dh[k] * tc;
    const S di = dc[k] * cache.g[k];
    const S df = dc[k] * cache.c_prev[k];
    const S dg = dc[k] * cache.i[k];
    da_i[k] = di * cache.i[k] * (S(1) - cache.i[k]);
    da_f[k] = df * cache.f[k] * (S(1) - cache.f[k]);
    da_o[k] = do_ * cache.o[k] * (S(1) - cache.o[k]);
    da_g[k] = dg * (S(1) - cache.g[k] * cache.g[k]);
    dc_prev[k] = dc[k] * cache.f[k];
  }

  dx.assign(p.input_dim, S(0));
  dh_prev.assign(n, S(0));
  const Vector<S>* das[4] = {&da_i, &da_f, &da_o, &da_g};
  GateParams<S>* gs[4] = {&grad.in_gate, &grad.forget_gate, &grad.out_gate, &grad.cand};
  auto ps = p.gates();
  for (int k = 0; k < 4; ++k) {
    add_outer(gs[k]->wx, *das[k], cache.x);
    add_outer(gs[k]->wh, *das[k], cache.h_prev);
    for (std::size_t j = 0; j < n; ++j) gs[k]->b[j] += (*das[k])[j];
    add_matvec_transposed(ps[k]->wx, *das[k], dx);
    add_matvec_transposed(ps[k]->wh, *das[k], dh_prev);
  }
}

}  // namespace trn
