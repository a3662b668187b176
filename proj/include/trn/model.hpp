#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trn/affine.hpp"
#include "trn/block.hpp"
#include "trn/error.hpp"
#include "trn/lstm.hpp"
#include "trn/matrix.hpp"
#include "trn/ops.hpp"
#include "trn/rng.hpp"

namespace trn {

// Model dimensions. Classes are 1..num_actions with 0 = background, so
// every probability vector has num_actions + 1 entries. The future-context
// width equals hidden_dim.
struct TrnConfig {
  std::size_t feature_dim = 16;      // D
  std::size_t num_actions = 4;       // K
  std::size_t hidden_dim = 32;       // H
  std::size_t decoder_steps = 8;     // ld
  std::size_t sequence_len = 90;     // le (training window)
  double alpha = 1.0;
  std::size_t score_embed_dim = 16;  // E

  std::size_t num_classes() const { return num_actions + 1; }

  void validate() const {
    if (num_actions < 1) throw ConfigError("config: num_actions must be >= 1");
    if (hidden_dim < 1) throw ConfigError("config: hidden_dim must be >= 1");
    if (decoder_steps < 1) throw ConfigError("config: decoder_steps must be >= 1");
    if (sequence_len < 1) throw ConfigError("config: sequence_len must be >= 1");
    if (alpha < 0.0) throw ConfigError("config: alpha must be >= 0");
  }
};

// The recurrent rollout that predicts the next ld action distributions by
// feeding its own embedded predictions back as input. Shared between the
// TRN cell and the encoder-decoder baseline.
template <typename S>
struct DecoderParams {
  LstmParams<S> cell;          // input: score_embed_dim
  Affine<S> hidden_embed;      // H -> H, initializes the rollout hidden state
  Affine<S> score_embed;       // (K+1) -> E, embeds fed-back scores
  Affine<S> classifier;        // H -> (K+1), produces the anticipated scores

  DecoderParams() = default;
  DecoderParams(const TrnConfig& cfg)
      : cell(cfg.score_embed_dim, cfg.hidden_dim),
        hidden_embed(cfg.hidden_dim, cfg.hidden_dim),
        score_embed(cfg.score_embed_dim, cfg.num_classes()),
        classifier(cfg.num_classes(), cfg.hidden_dim) {}

  void init(Rng& rng) {
    cell.init(rng);
    hidden_embed.init(rng);
    score_embed.init(rng);
    classifier.init(rng);
  }

  std::vector<ParamView<S>> blocks() {
    std::vector<ParamView<S>> out = cell.blocks("decoder");
    append(out, hidden_embed.blocks("hidden_embed"));
    append(out, score_embed.blocks("score_embed"));
    append(out, classifier.blocks("decoder_classifier"));
    return out;
  }
};

template <typename S>
struct DecoderCache {
  Vector<S> h_src;                     // input to hidden_embed
  Vector<S> h0;                        // embedded init hidden state
  std::vector<Vector<S>> r;            // feedback input per step (r[0] is zeros)
  std::vector<LstmCache<S>> steps;
  std::vector<Vector<S>> h;            // rollout hidden states, ld entries
  std::vector<Vector<S>> p;            // anticipated distributions, ld entries
};

// Roll the decoder ld steps from h_src. Step 1 consumes the embedded zero
// vector; step i consumes the embedded scores of step i-1. The rollout
// cell state starts at zero.
template <typename S>
void decoder_rollout(const DecoderParams<S>& dec, const Vector<S>& h_src,
                     std::size_t ld, DecoderCache<S>& cache) {
  const std::size_t hidden = dec.cell.hidden_dim;
  const std::size_t classes = dec.classifier.out_dim();
  cache.h_src = h_src;
  cache.h0 = dec.hidden_embed.apply(h_src);
  cache.r.assign(ld, Vector<S>{});
  cache.steps.assign(ld, LstmCache<S>{});
  cache.h.assign(ld, Vector<S>{});
  cache.p.assign(ld, Vector<S>{});

  CellState<S> st{cache.h0, Vector<S>(hidden, S(0))};
  for (std::size_t i = 0; i < ld; ++i) {
    cache.r[i] = (i == 0) ? Vector<S>(classes, S(0)) : cache.p[i - 1];
    Vector<S> u = dec.score_embed.apply(cache.r[i]);
    st = lstm_forward(dec.cell, u, st, &cache.steps[i]);
    cache.h[i] = st.h;
    cache.p[i] = softmax(dec.classifier.apply(st.h));
  }
}

// Spec-facing wrapper returning the (hidden states, score vectors) pair.
template <typename S>
std::pair<std::vector<Vector<S>>, std::vector<Vector<S>>> decoder_rollout(
    const DecoderParams<S>& dec, const Vector<S>& h_src, std::size_t ld) {
  if (!all_finite(h_src)) throw NumericError("decoder_rollout: non-finite hidden state");
  DecoderCache<S> cache;
  decoder_rollout(dec, h_src, ld, cache);
  return {cache.h, cache.p};
}

// Backward through the rollout.
//   upstream_dh[i] - gradient on rollout hidden state i from outside the
//                    chain (future gate); may be empty when absent.
//   dz_extra[i]    - gradient on the anticipated logits from the loss;
//                    may be empty when absent.
// Accumulates the gradient w.r.t. h_src (through hidden_embed) into dh_src.
// The rollout's init cell state is a constant zero, so its gradient is
// dropped.
template <typename S>
void decoder_backward(const DecoderParams<S>& dec, const DecoderCache<S>& cache,
                      const std::vector<Vector<S>>& upstream_dh,
                      const std::vector<Vector<S>>& dz_extra, DecoderParams<S>& grad,
                      Vector<S>& dh_src) {
  const std::size_t ld = cache.steps.size();
  const std::size_t hidden = dec.cell.hidden_dim;
  const std::size_t classes = dec.classifier.out_dim();

  Vector<S> dh_rec(hidden, S(0));     // recurrence gradient into step i's h
  Vector<S> dc_rec(hidden, S(0));
  Vector<S> dp_fb(classes, S(0));     // feedback gradient into step i's p
  for (std::size_t idx = ld; idx-- > 0;) {
    Vector<S> dh = dh_rec;
    if (!upstream_dh.empty() && !upstream_dh[idx].empty())
      add_scaled(dh, upstream_dh[idx], S(1));

    // logits: loss term plus the feedback path through softmax
    Vector<S> dz = softmax_vjp(cache.p[idx], dp_fb);
    if (!dz_extra.empty() && !dz_extra[idx].empty())
      add_scaled(dz, dz_extra[idx], S(1));
    dec.classifier.backward(cache.h[idx], dz, grad.classifier, &dh);

    Vector<S> du, dh_prev, dc_prev;
    lstm_backward(dec.cell, cache.steps[idx], dh, dc_rec, grad.cell, du, dh_prev, dc_prev);

    Vector<S> dr(classes, S(0));
    dec.score_embed.backward(cache.r[idx], du, grad.score_embed, &dr);
    dp_fb = (idx == 0) ? Vector<S>(classes, S(0)) : std::move(dr);
    dh_rec = std::move(dh_prev);
    dc_rec = std::move(dc_prev);
  }
  dec.hidden_embed.backward(cache.h_src, dh_rec, grad.hidden_embed, &dh_src);
}

// Complete learnable parameter set of the TRN cell.
template <typename S>
struct TrnParams {
  TrnConfig cfg;
  LstmParams<S> sta;        // input: D + H (frame feature ++ future context)
  DecoderParams<S> dec;
  Affine<S> future_gate;    // H -> H with ReLU on top
  Affine<S> classifier;     // H -> (K+1)

  TrnParams() = default;
  explicit TrnParams(const TrnConfig& c)
      : cfg(c),
        sta(c.feature_dim + c.hidden_dim, c.hidden_dim),
        dec(c),
        future_gate(c.hidden_dim, c.hidden_dim),
        classifier(c.num_classes(), c.hidden_dim) {
    cfg.validate();
  }

  static TrnParams init(const TrnConfig& c, Rng& rng) {
    TrnParams p(c);
    p.sta.init(rng);
    p.dec.init(rng);
    p.future_gate.init(rng);
    p.classifier.init(rng);
    return p;
  }

  std::vector<ParamView<S>> blocks() {
    std::vector<ParamView<S>> out = sta.blocks("sta");
    append(out, dec.blocks());
    append(out, future_gate.blocks("future_gate"));
    append(out, classifier.blocks("classifier"));
    return out;
  }
};

// x~ = ReLU(W_f . mean(stack) + b_f)
template <typename S>
Vector<S> future_gate(const TrnParams<S>& params, const std::vector<Vector<S>>& h_stack) {
  if (h_stack.empty()) throw ContractError("future_gate: empty hidden-state stack");
  const std::size_t hidden = h_stack.front().size();
  Vector<S> mean(hidden, S(0));
  for (const auto& h : h_stack) {
    if (h.size() != hidden)
      throw ShapeError("future_gate: stack entries have lengths " + std::to_string(hidden) +
                       " and " + std::to_string(h.size()));
    add_scaled(mean, h, S(1));
  }
  for (S& v : mean) v /= S(h_stack.size());
  return relu(params.future_gate.apply(mean));
}

// One timestep's outputs: the current-action distribution plus the ld
// anticipated distributions, and the updated accumulator state.
template <typename S>
struct StepOutput {
  Vector<S> p;
  std::vector<Vector<S>> anticipated;
  CellState<S> state;
};

template <typename S>
struct TrnStepCache {
  DecoderCache<S> dec;
  Vector<S> mean;       // average of rollout hidden states
  Vector<S> fg_pre;     // W_f mean + b_f, before ReLU
  Vector<S> x_tilde;    // future context
  LstmCache<S> sta;
  Vector<S> p;          // current-action distribution
};

// One TRN cell step: roll the decoder from the incoming hidden state, gate
// the rollout into a future-context vector, feed [x_t, x~] through the
// accumulator, classify.
template <typename S>
StepOutput<S> trn_step(const TrnParams<S>& params, const Vector<S>& x,
                       const CellState<S>& state, TrnStepCache<S>* cache = nullptr) {
  const TrnConfig& cfg = params.cfg;
  if (x.size() != cfg.feature_dim)
    throw ShapeError("trn_step: frame has length " + std::to_string(x.size()) +
                     " but model expects " + std::to_string(cfg.feature_dim));

  TrnStepCache<S> local;
  TrnStepCache<S>& c = cache ? *cache : local;

  decoder_rollout(params.dec, state.h, cfg.decoder_steps, c.dec);

  const std::size_t hidden = cfg.hidden_dim;
  c.mean.assign(hidden, S(0));
  for (const auto& h : c.dec.h) add_scaled(c.mean, h, S(1));
  for (S& v : c.mean) v /= S(cfg.decoder_steps);
  c.fg_pre = params.future_gate.apply(c.mean);
  c.x_tilde = relu(c.fg_pre);

  CellState<S> next = lstm_forward(params.sta, concat(x, c.x_tilde), state, &c.sta);
  c.p = softmax(params.classifier.apply(next.h));

  StepOutput<S> out;
  out.p = c.p;
  out.anticipated = c.dec.p;
  out.state = std::move(next);
  return out;
}

// Causal fold over a frame sequence from the zero state.
template <typename S>
std::vector<StepOutput<S>> forward_sequence(const TrnParams<S>& params,
                                            const std::vector<Vector<S>>& frames) {
  if (frames.empty()) throw ContractError("forward_sequence: empty sequence");
  std::vector<StepOutput<S>> out;
  out.reserve(frames.size());
  CellState<S> state = CellState<S>::zero(params.cfg.hidden_dim);
  for (const auto& x : frames) {
    out.push_back(trn_step(params, x, state));
    state = out.back().state;
  }
  return out;
}

namespace detail {

// dz for a cross-entropy term through softmax: scale * (p - onehot(label)).
template <typename S>
Vector<S> ce_logit_grad(const Vector<S>& p, std::size_t label, S scale) {
  Vector<S> dz(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) dz[k] = scale * p[k];
  dz[label] -= scale;
  return dz;
}

inline void check_label(int label, std::size_t classes, const char* where) {
  if (label < 0 || static_cast<std::size_t>(label) >= classes)
    throw IndexError(std::string(where) + ": label " + std::to_string(label) +
                     " out of range for " + std::to_string(classes) + " classes");
}

}  // namespace detail

// Anticipation targets for a window of length T: ext_labels/ext_valid have
// length T + ld; the first T entries are the current-frame labels and the
// tail covers the lookahead, with ext_valid marking entries that exist in
// the source video. Masked terms contribute nothing to loss or gradient.
template <typename S>
double backward_sequence(const TrnParams<S>& params, const std::vector<Vector<S>>& frames,
                         const std::vector<int>& ext_labels,
                         const std::vector<unsigned char>& ext_valid, double alpha,
                         TrnParams<S>& grad) {
  const TrnConfig& cfg = params.cfg;
  const std::size_t T = frames.size();
  const std::size_t ld = cfg.decoder_steps;
  const std::size_t classes = cfg.num_classes();
  if (T == 0) throw ContractError("backward_sequence: empty sequence");
  if (ext_labels.size() < T || ext_valid.size() != ext_labels.size())
    throw ContractError("backward_sequence: " + std::to_string(T) + " frames but " +
                        std::to_string(ext_labels.size()) + " labels and " +
                        std::to_string(ext_valid.size()) + " validity flags");

  // Forward with caches.
  std::vector<TrnStepCache<S>> caches(T);
  std::vector<CellState<S>> states(T);
  CellState<S> state = CellState<S>::zero(cfg.hidden_dim);
  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    StepOutput<S> out = trn_step(params, frames[t], state, &caches[t]);
    detail::check_label(ext_labels[t], classes, "backward_sequence");
    loss += cross_entropy(out.p, static_cast<std::size_t>(ext_labels[t]));
    for (std::size_t i = 1; i <= ld; ++i) {
      if (t + i < ext_labels.size() && ext_valid[t + i]) {
        detail::check_label(ext_labels[t + i], classes, "backward_sequence");
        loss += alpha * cross_entropy(out.anticipated[i - 1],
                                      static_cast<std::size_t>(ext_labels[t + i]));
      }
    }
    states[t] = out.state;
    state = states[t];
  }

  // Backward through time.
  Vector<S> dh_next(cfg.hidden_dim, S(0));
  Vector<S> dc_next(cfg.hidden_dim, S(0));
  for (std::size_t t = T; t-- > 0;) {
    const TrnStepCache<S>& c = caches[t];

    // Current-frame classifier.
    Vector<S> dz = detail::ce_logit_grad(c.p, static_cast<std::size_t>(ext_labels[t]), S(1));
    Vector<S> dh = dh_next;
    params.classifier.backward(states[t].h, dz, grad.classifier, &dh);

    // Accumulator.
    Vector<S> dx_cat, dh_prev_sta, dc_prev;
    lstm_backward(params.sta, c.sta, dh, dc_next, grad.sta, dx_cat, dh_prev_sta, dc_prev);

    // Future gate: slice off the context part of the input gradient.
    Vector<S> da(cfg.hidden_dim);
    for (std::size_t k = 0; k < cfg.hidden_dim; ++k) {
      const S dxt = dx_cat[cfg.feature_dim + k];
      da[k] = c.fg_pre[k] > S(0) ? dxt : S(0);
    }
    Vector<S> dmean(cfg.hidden_dim, S(0));
    params.future_gate.backward(c.mean, da, grad.future_gate, &dmean);

    std::vector<Vector<S>> upstream_dh(ld);
    for (std::size_t i = 0; i < ld; ++i) {
      upstream_dh[i] = dmean;
      for (S& v : upstream_dh[i]) v /= S(ld);
    }

    // Anticipation loss terms on the rollout logits.
    std::vector<Vector<S>> dz_extra(ld);
    for (std::size_t i = 1; i <= ld; ++i) {
      if (alpha != 0.0 && t + i < ext_labels.size() && ext_valid[t + i]) {
        dz_extra[i - 1] = detail::ce_logit_grad(
            c.dec.p[i - 1], static_cast<std::size_t>(ext_labels[t + i]), S(alpha));
      }
    }

    Vector<S> dh_prev_dec(cfg.hidden_dim, S(0));
    decoder_backward(params.dec, c.dec, upstream_dh, dz_extra, grad.dec, dh_prev_dec);

    dh_next = std::move(dh_prev_sta);
    add_scaled(dh_next, dh_prev_dec, S(1));
    dc_next = std::move(dc_prev);
  }
  return loss;
}

}  // namespace trn
