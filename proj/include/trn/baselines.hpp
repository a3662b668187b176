#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trn/affine.hpp"
#include "trn/lstm.hpp"
#include "trn/model.hpp"
#include "trn/ops.hpp"

namespace trn {

// ---------------------------------------------------------------------------
// Per-frame classifier: softmax(W2 relu(W1 x + b1) + b2), no temporal state.
// ---------------------------------------------------------------------------
template <typename S>
struct FramewiseParams {
  TrnConfig cfg;
  Affine<S> hidden;  // D -> H
  Affine<S> out;     // H -> (K+1)

  FramewiseParams() = default;
  explicit FramewiseParams(const TrnConfig& c)
      : cfg(c), hidden(c.hidden_dim, c.feature_dim), out(c.num_classes(), c.hidden_dim) {}

  static FramewiseParams init(const TrnConfig& c, Rng& rng) {
    FramewiseParams p(c);
    p.hidden.init(rng);
    p.out.init(rng);
    return p;
  }

  std::vector<ParamView<S>> blocks() {
    std::vector<ParamView<S>> v = hidden.blocks("hidden");
    append(v, out.blocks("out"));
    return v;
  }
};

template <typename S>
Vector<S> framewise_forward(const FramewiseParams<S>& p, const Vector<S>& x) {
  return softmax(p.out.apply(relu(p.hidden.apply(x))));
}

template <typename S>
std::vector<StepOutput<S>> framewise_forward_sequence(const FramewiseParams<S>& p,
                                                      const std::vector<Vector<S>>& frames) {
  if (frames.empty()) throw ContractError("framewise: empty sequence");
  std::vector<StepOutput<S>> out(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    out[t].p = framewise_forward(p, frames[t]);
    out[t].state = CellState<S>::zero(0);
  }
  return out;
}

template <typename S>
double framewise_backward(const FramewiseParams<S>& p, const std::vector<Vector<S>>& frames,
                          const std::vector<int>& ext_labels,
                          const std::vector<unsigned char>& /*ext_valid*/, double /*alpha*/,
                          FramewiseParams<S>& grad) {
  const std::size_t classes = p.cfg.num_classes();
  double loss = 0.0;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    detail::check_label(ext_labels[t], classes, "framewise_backward");
    Vector<S> a = p.hidden.apply(frames[t]);
    Vector<S> hidden = relu(a);
    Vector<S> prob = softmax(p.out.apply(hidden));
    loss += cross_entropy(prob, static_cast<std::size_t>(ext_labels[t]));

    Vector<S> dz = detail::ce_logit_grad(prob, static_cast<std::size_t>(ext_labels[t]), S(1));
    Vector<S> dhid(hidden.size(), S(0));
    p.out.backward(hidden, dz, grad.out, &dhid);
    for (std::size_t k = 0; k < dhid.size(); ++k)
      if (a[k] <= S(0)) dhid[k] = S(0);
    p.hidden.backward(frames[t], dhid, grad.hidden, nullptr);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// LSTM baseline: single recurrent cell over frame features + classifier.
// ---------------------------------------------------------------------------
template <typename S>
struct LstmBaselineParams {
  TrnConfig cfg;
  LstmParams<S> cell;     // input D
  Affine<S> classifier;   // H -> (K+1)

  LstmBaselineParams() = default;
  explicit LstmBaselineParams(const TrnConfig& c)
      : cfg(c), cell(c.feature_dim, c.hidden_dim), classifier(c.num_classes(), c.hidden_dim) {}

  static LstmBaselineParams init(const TrnConfig& c, Rng& rng) {
    LstmBaselineParams p(c);
    p.cell.init(rng);
    p.classifier.init(rng);
    return p;
  }

  std::vector<ParamView<S>> blocks() {
    std::vector<ParamView<S>> v = cell.blocks("lstm");
    append(v, classifier.blocks("classifier"));
    return v;
  }
};

namespace detail {

// Shared BPTT for (LSTM cell + classifier head) models; the inputs may be
// raw frames or any precomputed per-step vectors.
template <typename S>
double lstm_head_backward(const LstmParams<S>& cell, const Affine<S>& classifier,
                          const std::vector<Vector<S>>& inputs,
                          const std::vector<int>& labels, LstmParams<S>& cell_grad,
                          Affine<S>& cls_grad) {
  const std::size_t T = inputs.size();
  const std::size_t classes = classifier.out_dim();
  std::vector<LstmCache<S>> caches(T);
  std::vector<Vector<S>> hs(T), probs(T);
  CellState<S> state = CellState<S>::zero(cell.hidden_dim);
  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    state = lstm_forward(cell, inputs[t], state, &caches[t]);
    hs[t] = state.h;
    probs[t] = softmax(classifier.apply(state.h));
    check_label(labels[t], classes, "lstm_backward");
    loss += cross_entropy(probs[t], static_cast<std::size_t>(labels[t]));
  }
  Vector<S> dh_next(cell.hidden_dim, S(0)), dc_next(cell.hidden_dim, S(0));
  for (std::size_t t = T; t-- > 0;) {
    Vector<S> dz = ce_logit_grad(probs[t], static_cast<std::size_t>(labels[t]), S(1));
    Vector<S> dh = dh_next;
    classifier.backward(hs[t], dz, cls_grad, &dh);
    Vector<S> dx, dh_prev, dc_prev;
    lstm_backward(cell, caches[t], dh, dc_next, cell_grad, dx, dh_prev, dc_prev);
    dh_next = std::move(dh_prev);
    dc_next = std::move(dc_prev);
  }
  return loss;
}

}  // namespace detail

template <typename S>
std::vector<StepOutput<S>> lstm_baseline_forward_sequence(
    const LstmBaselineParams<S>& p, const std::vector<Vector<S>>& frames) {
  if (frames.empty()) throw ContractError("lstm_baseline: empty sequence");
  std::vector<StepOutput<S>> out(frames.size());
  CellState<S> state = CellState<S>::zero(p.cfg.hidden_dim);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    state = lstm_step(p.cell, frames[t], state);
    out[t].p = softmax(p.classifier.apply(state.h));
    out[t].state = state;
  }
  return out;
}

template <typename S>
double lstm_baseline_backward(const LstmBaselineParams<S>& p,
                              const std::vector<Vector<S>>& frames,
                              const std::vector<int>& ext_labels,
                              const std::vector<unsigned char>& /*ext_valid*/,
                              double /*alpha*/, LstmBaselineParams<S>& grad) {
  std::vector<int> labels(ext_labels.begin(), ext_labels.begin() + frames.size());
  return detail::lstm_head_backward(p.cell, p.classifier, frames, labels, grad.cell,
                                    grad.classifier);
}

// ---------------------------------------------------------------------------
// Encoder-decoder baseline: encoder LSTM summarizes history; a decoder
// identical in shape to the TRN rollout predicts the future, but nothing
// feeds back into the present classification.
// ---------------------------------------------------------------------------
template <typename S>
struct EdParams {
  TrnConfig cfg;
  LstmParams<S> encoder;   // input D
  Affine<S> classifier;    // H -> (K+1), reads the encoder state
  DecoderParams<S> dec;

  EdParams() = default;
  explicit EdParams(const TrnConfig& c)
      : cfg(c),
        encoder(c.feature_dim, c.hidden_dim),
        classifier(c.num_classes(), c.hidden_dim),
        dec(c) {}

  static EdParams init(const TrnConfig& c, Rng& rng) {
    EdParams p(c);
    p.encoder.init(rng);
    p.classifier.init(rng);
    p.dec.init(rng);
    return p;
  }

  std::vector<ParamView<S>> blocks() {
    std::vector<ParamView<S>> v = encoder.blocks("encoder");
    append(v, classifier.blocks("classifier"));
    append(v, dec.blocks());
    return v;
  }
};

template <typename S>
std::vector<StepOutput<S>> ed_forward_sequence(const EdParams<S>& p,
                                               const std::vector<Vector<S>>& frames) {
  if (frames.empty()) throw ContractError("ed: empty sequence");
  std::vector<StepOutput<S>> out(frames.size());
  CellState<S> state = CellState<S>::zero(p.cfg.hidden_dim);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    state = lstm_step(p.encoder, frames[t], state);
    out[t].p = softmax(p.classifier.apply(state.h));
    auto [h_stack, p_stack] = decoder_rollout(p.dec, state.h, p.cfg.decoder_steps);
    out[t].anticipated = std::move(p_stack);
    out[t].state = state;
  }
  return out;
}

template <typename S>
double ed_backward(const EdParams<S>& p, const std::vector<Vector<S>>& frames,
                   const std::vector<int>& ext_labels,
                   const std::vector<unsigned char>& ext_valid, double alpha,
                   EdParams<S>& grad) {
  const std::size_t T = frames.size();
  const std::size_t ld = p.cfg.decoder_steps;
  const std::size_t classes = p.cfg.num_classes();
  if (T == 0) throw ContractError("ed_backward: empty sequence");

  std::vector<LstmCache<S>> enc_caches(T);
  std::vector<DecoderCache<S>> dec_caches(T);
  std::vector<Vector<S>> hs(T), probs(T);
  CellState<S> state = CellState<S>::zero(p.cfg.hidden_dim);
  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    state = lstm_forward(p.encoder, frames[t], state, &enc_caches[t]);
    hs[t] = state.h;
    probs[t] = softmax(p.classifier.apply(state.h));
    detail::check_label(ext_labels[t], classes, "ed_backward");
    loss += cross_entropy(probs[t], static_cast<std::size_t>(ext_labels[t]));
    decoder_rollout(p.dec, state.h, ld, dec_caches[t]);
    for (std::size_t i = 1; i <= ld; ++i) {
      if (t + i < ext_labels.size() && ext_valid[t + i]) {
        detail::check_label(ext_labels[t + i], classes, "ed_backward");
        loss += alpha * cross_entropy(dec_caches[t].p[i - 1],
                                      static_cast<std::size_t>(ext_labels[t + i]));
      }
    }
  }

  Vector<S> dh_next(p.cfg.hidden_dim, S(0)), dc_next(p.cfg.hidden_dim, S(0));
  for (std::size_t t = T; t-- > 0;) {
    Vector<S> dz = detail::ce_logit_grad(probs[t], static_cast<std::size_t>(ext_labels[t]), S(1));
    Vector<S> dh = dh_next;
    p.classifier.backward(hs[t], dz, grad.classifier, &dh);

    std::vector<Vector<S>> dz_extra(ld);
    for (std::size_t i = 1; i <= ld; ++i) {
      if (alpha != 0.0 && t + i < ext_labels.size() && ext_valid[t + i]) {
        dz_extra[i - 1] = detail::ce_logit_grad(
            dec_caches[t].p[i - 1], static_cast<std::size_t>(ext_labels[t + i]), S(alpha));
      }
    }
    // The rollout hangs off the encoder state h_t.
    decoder_backward(p.dec, dec_caches[t], {}, dz_extra, grad.dec, dh);

    Vector<S> dx, dh_prev, dc_prev;
    lstm_backward(p.encoder, enc_caches[t], dh, dc_next, grad.encoder, dx, dh_prev, dc_prev);
    dh_next = std::move(dh_prev);
    dc_next = std::move(dc_prev);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// RNN-offline oracle: an LSTM whose input is the current frame concatenated
// with the average of the next ld frame features. Not an online model.
// ---------------------------------------------------------------------------
template <typename S>
struct RnnOfflineParams {
  TrnConfig cfg;
  LstmParams<S> cell;     // input 2D
  Affine<S> classifier;   // H -> (K+1)

  RnnOfflineParams() = default;
  explicit RnnOfflineParams(const TrnConfig& c)
      : cfg(c),
        cell(2 * c.feature_dim, c.hidden_dim),
        classifier(c.num_classes(), c.hidden_dim) {}

  static RnnOfflineParams init(const TrnConfig& c, Rng& rng) {
    RnnOfflineParams p(c);
    p.cell.init(rng);
    p.classifier.init(rng);
    return p;
  }

  std::vector<ParamView<S>> blocks() {
    std::vector<ParamView<S>> v = cell.blocks("lstm");
    append(v, classifier.blocks("classifier"));
    return v;
  }
};

// Inputs for the oracle: [x_t, mean(x_{t+1..t+ld})]; the mean runs over
// however many future frames remain, and is zero at the final frame.
template <typename S>
std::vector<Vector<S>> rnn_offline_inputs(const std::vector<Vector<S>>& frames,
                                          std::size_t ld) {
  const std::size_t T = frames.size();
  std::vector<Vector<S>> inputs(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t dim = frames[t].size();
    Vector<S> fut(dim, S(0));
    const std::size_t last = std::min(T, t + 1 + ld);
    const std::size_t count = last - (t + 1);
    for (std::size_t u = t + 1; u < last; ++u) add_scaled(fut, frames[u], S(1));
    if (count > 0)
      for (S& v : fut) v /= S(count);
    inputs[t] = concat(frames[t], fut);
  }
  return inputs;
}

template <typename S>
std::vector<StepOutput<S>> rnn_offline_forward_sequence(const RnnOfflineParams<S>& p,
                                                        const std::vector<Vector<S>>& frames) {
  if (frames.empty()) throw ContractError("rnn_offline: empty sequence");
  std::vector<Vector<S>> inputs = rnn_offline_inputs(frames, p.cfg.decoder_steps);
  std::vector<StepOutput<S>> out(frames.size());
  CellState<S> state = CellState<S>::zero(p.cfg.hidden_dim);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    state = lstm_step(p.cell, inputs[t], state);
    out[t].p = softmax(p.classifier.apply(state.h));
    out[t].state = state;
  }
  return out;
}

template <typename S>
double rnn_offline_backward(const RnnOfflineParams<S>& p, const std::vector<Vector<S>>& frames,
                            const std::vector<int>& ext_labels,
                            const std::vector<unsigned char>& /*ext_valid*/, double /*alpha*/,
                            RnnOfflineParams<S>& grad) {
  std::vector<Vector<S>> inputs = rnn_offline_inputs(frames, p.cfg.decoder_steps);
  std::vector<int> labels(ext_labels.begin(), ext_labels.begin() + frames.size());
  return detail::lstm_head_backward(p.cell, p.classifier, inputs, labels, grad.cell,
                                    grad.classifier);
}

}  // namespace trn
