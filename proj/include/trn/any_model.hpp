#pragma once

#include <string>
#include <variant>
#include <vector>

#include "trn/baselines.hpp"
#include "trn/error.hpp"
#include "trn/model.hpp"

namespace trn {

enum class ModelKind { trn, lstm, ed, framewise, rnn_offline };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::trn: return "trn";
    case ModelKind::lstm: return "lstm";
    case ModelKind::ed: return "ed";
    case ModelKind::framewise: return "framewise";
    case ModelKind::rnn_offline: return "rnn-offline";
  }
  return "?";
}

inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "trn") return ModelKind::trn;
  if (s == "lstm") return ModelKind::lstm;
  if (s == "ed") return ModelKind::ed;
  if (s == "framewise") return ModelKind::framewise;
  if (s == "rnn-offline" || s == "rnn_offline") return ModelKind::rnn_offline;
  throw ConfigError("unknown model '" + s +
                    "' (expected trn, lstm, ed, framewise or rnn-offline)");
}

// One interface over every model kind: init, forward over a sequence,
// loss+gradient, and the named parameter blocks.
template <typename S>
class AnyModel {
 public:
  AnyModel() = default;

  static AnyModel init(ModelKind kind, const TrnConfig& cfg, Rng& rng) {
    AnyModel m;
    m.kind_ = kind;
    m.cfg_ = cfg;
    switch (kind) {
      case ModelKind::trn: m.params_ = TrnParams<S>::init(cfg, rng); break;
      case ModelKind::lstm: m.params_ = LstmBaselineParams<S>::init(cfg, rng); break;
      case ModelKind::ed: m.params_ = EdParams<S>::init(cfg, rng); break;
      case ModelKind::framewise: m.params_ = FramewiseParams<S>::init(cfg, rng); break;
      case ModelKind::rnn_offline: m.params_ = RnnOfflineParams<S>::init(cfg, rng); break;
    }
    return m;
  }

  // Same-kind zero-valued parameter mirror, used to hold gradients.
  AnyModel zeros_like() const {
    Rng dummy(0);
    AnyModel m = init(kind_, cfg_, dummy);
    for (auto& b : m.blocks())
      for (std::size_t i = 0; i < b.size(); ++i) b.data[i] = S(0);
    return m;
  }

  ModelKind kind() const { return kind_; }
  const TrnConfig& config() const { return cfg_; }

  bool has_anticipation() const {
    return kind_ == ModelKind::trn || kind_ == ModelKind::ed;
  }
  std::size_t anticipation_steps() const {
    return has_anticipation() ? cfg_.decoder_steps : 0;
  }
  // The oracle reads future frames; everything else is online.
  bool is_online() const { return kind_ != ModelKind::rnn_offline; }

  std::vector<StepOutput<S>> forward(const std::vector<Vector<S>>& frames) const {
    switch (kind_) {
      case ModelKind::trn:
        return forward_sequence(std::get<TrnParams<S>>(params_), frames);
      case ModelKind::lstm:
        return lstm_baseline_forward_sequence(std::get<LstmBaselineParams<S>>(params_), frames);
      case ModelKind::ed:
        return ed_forward_sequence(std::get<EdParams<S>>(params_), frames);
      case ModelKind::framewise:
        return framewise_forward_sequence(std::get<FramewiseParams<S>>(params_), frames);
      case ModelKind::rnn_offline:
        return rnn_offline_forward_sequence(std::get<RnnOfflineParams<S>>(params_), frames);
    }
    throw ContractError("forward: bad model kind");
  }

  // Adds this sample's gradient into `grad` (a zeros_like-shaped mirror)
  // and returns the sample loss.
  double loss_and_grad(const std::vector<Vector<S>>& frames, const std::vector<int>& ext_labels,
                       const std::vector<unsigned char>& ext_valid, double alpha,
                       AnyModel& grad) const {
    if (grad.kind_ != kind_) throw ContractError("loss_and_grad: gradient kind mismatch");
    switch (kind_) {
      case ModelKind::trn:
        return backward_sequence(std::get<TrnParams<S>>(params_), frames, ext_labels,
                                 ext_valid, alpha, std::get<TrnParams<S>>(grad.params_));
      case ModelKind::lstm:
        return lstm_baseline_backward(std::get<LstmBaselineParams<S>>(params_), frames,
                                      ext_labels, ext_valid, alpha,
                                      std::get<LstmBaselineParams<S>>(grad.params_));
      case ModelKind::ed:
        return ed_backward(std::get<EdParams<S>>(params_), frames, ext_labels, ext_valid,
                           alpha, std::get<EdParams<S>>(grad.params_));
      case ModelKind::framewise:
        return framewise_backward(std::get<FramewiseParams<S>>(params_), frames, ext_labels,
                                  ext_valid, alpha, std::get<FramewiseParams<S>>(grad.params_));
      case ModelKind::rnn_offline:
        return rnn_offline_backward(std::get<RnnOfflineParams<S>>(params_), frames,
                                    ext_labels, ext_valid, alpha,
                                    std::get<RnnOfflineParams<S>>(grad.params_));
    }
    throw ContractError("loss_and_grad: bad model kind");
  }

  std::vector<ParamView<S>> blocks() {
    return std::visit([](auto& p) { return p.blocks(); }, params_);
  }
  std::vector<ParamView<S>> blocks() const {
    return const_cast<AnyModel*>(this)->blocks();
  }

  template <typename P>
  P& as() { return std::get<P>(params_); }
  template <typename P>
  const P& as() const { return std::get<P>(params_); }

 private:
  ModelKind kind_ = ModelKind::trn;
  TrnConfig cfg_;
  std::variant<TrnParams<S>, LstmBaselineParams<S>, EdParams<S>, FramewiseParams<S>,
               RnnOfflineParams<S>>
      params_;
};

}  // namespace trn
