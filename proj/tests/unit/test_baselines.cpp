#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "trn/any_model.hpp"
#include "trn/baselines.hpp"
#include "trn/gradcheck.hpp"
#include "trn/rng.hpp"
#include "trn/training.hpp"

using namespace trn;

namespace {

TrnConfig small_config() {
  TrnConfig cfg;
  cfg.feature_dim = 3;
  cfg.num_actions = 2;
  cfg.hidden_dim = 3;
  cfg.decoder_steps = 2;
  cfg.sequence_len = 4;
  cfg.score_embed_dim = 2;
  return cfg;
}

struct Fixture {
  std::vector<Vector<double>> frames;
  std::vector<int> ext_labels;
  std::vector<unsigned char> ext_valid;
};

Fixture random_fixture(const TrnConfig& cfg, std::size_t T, std::uint64_t seed) {
  Fixture fx;
  Rng rng(seed);
  fx.frames.assign(T, Vector<double>(cfg.feature_dim));
  for (auto& f : fx.frames)
    for (double& v : f) v = rng.uniform(-1, 1);
  fx.ext_labels.resize(T + cfg.decoder_steps);
  fx.ext_valid.resize(T + cfg.decoder_steps);
  for (std::size_t k = 0; k < fx.ext_labels.size(); ++k) {
    fx.ext_labels[k] = static_cast<int>(rng.below(cfg.num_actions + 1));
    fx.ext_valid[k] = (k < T || rng.uniform() < 0.7) ? 1 : 0;
  }
  return fx;
}

}  // namespace

TEST_CASE("framewise baseline") {
  TrnConfig cfg = small_config();
  Rng rng(1);
  FramewiseParams<double> p = FramewiseParams<double>::init(cfg, rng);

  SECTION("zero parameters give uniform output") {
    FramewiseParams<double> zero(cfg);
    Vector<double> prob = framewise_forward(zero, Vector<double>(3, 0.4));
    for (double v : prob) CHECK(v == Catch::Approx(1.0 / 3.0).margin(1e-12));
  }
  SECTION("output is independent of frame order") {
    Fixture fx = random_fixture(cfg, 5, 10);
    auto fwd = framewise_forward_sequence(p, fx.frames);
    std::vector<Vector<double>> reversed(fx.frames.rbegin(), fx.frames.rend());
    auto bwd = framewise_forward_sequence(p, reversed);
    for (std::size_t t = 0; t < fx.frames.size(); ++t)
      CHECK(fwd[t].p == bwd[fx.frames.size() - 1 - t].p);
  }
  SECTION("equals linear+relu+linear+softmax composed independently") {
    Vector<double> x{0.2, -0.5, 0.8};
    Vector<double> expect = softmax(p.out.apply(relu(p.hidden.apply(x))));
    Vector<double> got = framewise_forward(p, x);
    for (std::size_t k = 0; k < expect.size(); ++k)
      CHECK(got[k] == Catch::Approx(expect[k]).margin(1e-14));
  }
  SECTION("gradients match finite differences") {
    Fixture fx = random_fixture(cfg, 4, 20);
    FramewiseParams<double> grad(cfg);
    double loss = framewise_backward(p, fx.frames, fx.ext_labels, fx.ext_valid, 1.0, grad);
    auto f = [&] {
      return sequence_loss(framewise_forward_sequence(p, fx.frames), fx.ext_labels,
                           fx.ext_valid, 1.0);
    };
    CHECK(loss == Catch::Approx(f()).epsilon(1e-12));
    auto fd = finite_diff_grad(f, p.blocks());
    auto an = grad.blocks();
    for (std::size_t b = 0; b < an.size(); ++b) {
      INFO("block " << an[b].name);
      CHECK(max_rel_err(an[b].data, fd[b].data(), an[b].size()) < 1e-4);
    }
  }
}

TEST_CASE("lstm baseline") {
  TrnConfig cfg = small_config();
  Rng rng(2);
  LstmBaselineParams<double> p = LstmBaselineParams<double>::init(cfg, rng);
  Fixture fx = random_fixture(cfg, 5, 30);

  SECTION("causality: prefix outputs equal full-run prefix") {
    auto full = lstm_baseline_forward_sequence(p, fx.frames);
    for (std::size_t t = 1; t <= fx.frames.size(); ++t) {
      std::vector<Vector<double>> prefix(fx.frames.begin(), fx.frames.begin() + t);
      auto part = lstm_baseline_forward_sequence(p, prefix);
      for (std::size_t u = 0; u < t; ++u) CHECK(part[u].p == full[u].p);
    }
  }
  SECTION("zero parameters give uniform outputs") {
    LstmBaselineParams<double> zero(cfg);
    auto out = lstm_baseline_forward_sequence(zero, fx.frames);
    for (const auto& step : out)
      for (double v : step.p) CHECK(v == Catch::Approx(1.0 / 3.0).margin(1e-12));
  }
  SECTION("tiny-dim reference: classifier over hand-stepped lstm states") {
    CellState<double> s = CellState<double>::zero(cfg.hidden_dim);
    auto out = lstm_baseline_forward_sequence(p, fx.frames);
    for (std::size_t t = 0; t < fx.frames.size(); ++t) {
      s = lstm_step(p.cell, fx.frames[t], s);
      Vector<double> expect = softmax(p.classifier.apply(s.h));
      for (std::size_t k = 0; k < expect.size(); ++k)
        CHECK(out[t].p[k] == Catch::Approx(expect[k]).margin(1e-14));
    }
  }
  SECTION("gradients match finite differences") {
    LstmBaselineParams<double> grad(cfg);
    double loss = lstm_baseline_backward(p, fx.frames, fx.ext_labels, fx.ext_valid, 1.0, grad);
    auto f = [&] {
      return sequence_loss(lstm_baseline_forward_sequence(p, fx.frames), fx.ext_labels,
                           fx.ext_valid, 1.0);
    };
    CHECK(loss == Catch::Approx(f()).epsilon(1e-12));
    auto fd = finite_diff_grad(f, p.blocks());
    auto an = grad.blocks();
    for (std::size_t b = 0; b < an.size(); ++b) {
      INFO("block " << an[b].name);
      CHECK(max_rel_err(an[b].data, fd[b].data(), an[b].size()) < 1e-4);
    }
  }
}

TEST_CASE("encoder-decoder baseline") {
  TrnConfig cfg = small_config();
  Rng rng(3);
  EdParams<double> p = EdParams<double>::init(cfg, rng);
  Fixture fx = random_fixture(cfg, 5, 40);

  SECTION("current-frame predictions equal the lstm baseline under matched init") {
    LstmBaselineParams<double> lstm_p(cfg);
    lstm_p.cell = p.encoder;
    lstm_p.classifier = p.classifier;
    auto ed_out = ed_forward_sequence(p, fx.frames);
    auto lstm_out = lstm_baseline_forward_sequence(lstm_p, fx.frames);
    for (std::size_t t = 0; t < fx.frames.size(); ++t) CHECK(ed_out[t].p == lstm_out[t].p);
  }
  SECTION("zero parameters give uniform current and anticipated outputs") {
    EdParams<double> zero(cfg);
    auto out = ed_forward_sequence(zero, fx.frames);
    for (const auto& step : out) {
      for (double v : step.p) CHECK(v == Catch::Approx(1.0 / 3.0).margin(1e-12));
      REQUIRE(step.anticipated.size() == cfg.decoder_steps);
      for (const auto& ant : step.anticipated)
        for (double v : ant) CHECK(v == Catch::Approx(1.0 / 3.0).margin(1e-12));
    }
  }
  SECTION("tiny-dim reference: rollout hangs off the encoder state") {
    auto out = ed_forward_sequence(p, fx.frames);
    CellState<double> s = CellState<double>::zero(cfg.hidden_dim);
    for (std::size_t t = 0; t < fx.frames.size(); ++t) {
      s = lstm_step(p.encoder, fx.frames[t], s);
      auto [hs, ps] = decoder_rollout(p.dec, s.h, cfg.decoder_steps);
      for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t k = 0; k < ps[i].size(); ++k)
          CHECK(out[t].anticipated[i][k] == Catch::Approx(ps[i][k]).margin(1e-14));
    }
  }
  SECTION("gradients match finite differences") {
    EdParams<double> grad(cfg);
    double loss = ed_backward(p, fx.frames, fx.ext_labels, fx.ext_valid, 1.0, grad);
    auto f = [&] {
      return sequence_loss(ed_forward_sequence(p, fx.frames), fx.ext_labels, fx.ext_valid,
                           1.0);
    };
    CHECK(loss == Catch::Approx(f()).epsilon(1e-12));
    auto fd = finite_diff_grad(f, p.blocks());
    auto an = grad.blocks();
    for (std::size_t b = 0; b < an.size(); ++b) {
      INFO("block " << an[b].name);
      CHECK(max_rel_err(an[b].data, fd[b].data(), an[b].size()) < 1e-4);
    }
  }
  SECTION("alpha = 0 leaves the rollout blocks without gradient") {
    EdParams<double> grad(cfg);
    ed_backward(p, fx.frames, fx.ext_labels, fx.ext_valid, 0.0, grad);
    double dec_norm = 0.0;
    for (double v : grad.dec.classifier.w.data) dec_norm += v * v;
    for (double v : grad.dec.cell.in_gate.wx.data) dec_norm += v * v;
    CHECK(dec_norm == 0.0);
    double enc_norm = 0.0;
    for (double v : grad.encoder.in_gate.wx.data) enc_norm += v * v;
    CHECK(enc_norm > 0.0);
  }
}

TEST_CASE("rnn-offline oracle") {
  TrnConfig cfg = small_config();
  Rng rng(4);
  RnnOfflineParams<double> p = RnnOfflineParams<double>::init(cfg, rng);
  Fixture fx = random_fixture(cfg, 6, 50);

  SECTION("future block is the mean of the next ld frames, clipped at the tail") {
    auto inputs = rnn_offline_inputs(fx.frames, 2);
    const std::size_t D = cfg.feature_dim;
    // middle frame: plain average of the next two
    for (std::size_t d = 0; d < D; ++d)
      CHECK(inputs[1][D + d] ==
            Catch::Approx(0.5 * (fx.frames[2][d] + fx.frames[3][d])).margin(1e-14));
    // second-to-last frame: only one future frame remains
    for (std::size_t d = 0; d < D; ++d)
      CHECK(inputs[4][D + d] == Catch::Approx(fx.frames[5][d]).margin(1e-14));
    // last frame: zero vector
    for (std::size_t d = 0; d < D; ++d) CHECK(inputs[5][D + d] == 0.0);
  }
  SECTION("identical future frames average to that frame") {
    std::vector<Vector<double>> frames(4, Vector<double>{0.5, -0.25, 1.0});
    auto inputs = rnn_offline_inputs(frames, 2);
    for (std::size_t d = 0; d < 3; ++d)
      CHECK(inputs[0][3 + d] == Catch::Approx(frames[0][d]).margin(1e-14));
  }
  SECTION("ld = 0 reduces to the lstm baseline with a zero-padded input block") {
    auto inputs = rnn_offline_inputs(fx.frames, 0);
    for (const auto& in : inputs)
      for (std::size_t d = cfg.feature_dim; d < 2 * cfg.feature_dim; ++d)
        CHECK(in[d] == 0.0);
  }
  SECTION("gradients match finite differences") {
    RnnOfflineParams<double> grad(cfg);
    double loss = rnn_offline_backward(p, fx.frames, fx.ext_labels, fx.ext_valid, 1.0, grad);
    auto f = [&] {
      return sequence_loss(rnn_offline_forward_sequence(p, fx.frames), fx.ext_labels,
                           fx.ext_valid, 1.0);
    };
    CHECK(loss == Catch::Approx(f()).epsilon(1e-12));
    auto fd = finite_diff_grad(f, p.blocks());
    auto an = grad.blocks();
    for (std::size_t b = 0; b < an.size(); ++b) {
      INFO("block " << an[b].name);
      CHECK(max_rel_err(an[b].data, fd[b].data(), an[b].size()) < 1e-4);
    }
  }
}

TEST_CASE("AnyModel dispatch forwards and differentiates every kind") {
  TrnConfig cfg = small_config();
  Fixture fx = random_fixture(cfg, 4, 60);
  for (ModelKind kind : {ModelKind::trn, ModelKind::lstm, ModelKind::ed,
                         ModelKind::framewise, ModelKind::rnn_offline}) {
    Rng rng(71);
    AnyModel<double> model = AnyModel<double>::init(kind, cfg, rng);
    auto out = model.forward(fx.frames);
    REQUIRE(out.size() == fx.frames.size());
    for (const auto& step : out) {
      double sum = 0.0;
      for (double v : step.p) sum += v;
      CHECK(sum == Catch::Approx(1.0).margin(1e-6));
      CHECK(step.anticipated.size() == model.anticipation_steps());
    }
    AnyModel<double> grad = model.zeros_like();
    double loss = model.loss_and_grad(fx.frames, fx.ext_labels, fx.ext_valid, 1.0, grad);
    CHECK(loss > 0.0);
    CHECK(model.is_online() == (kind != ModelKind::rnn_offline));
  }
}
