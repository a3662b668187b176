#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "trn/gradcheck.hpp"
#include "trn/lstm.hpp"
#include "trn/ops.hpp"
#include "trn/rng.hpp"

using namespace trn;

namespace {

LstmParams<double> random_lstm(std::size_t in_dim, std::size_t hid, std::uint64_t seed) {
  LstmParams<double> p(in_dim, hid);
  Rng rng(seed);
  p.init(rng);
  return p;
}

}  // namespace

TEST_CASE("lstm_step hand cases") {
  SECTION("all-zero parameters and zero state stay at zero") {
    LstmParams<double> p(3, 2);
    CellState<double> s = CellState<double>::zero(2);
    CellState<double> next = lstm_step(p, {0.4, -0.2, 1.0}, s);
    CHECK(next.h == Vector<double>{0.0, 0.0});
    CHECK(next.c == Vector<double>{0.0, 0.0});
  }
  SECTION("zero parameters with carried cell state: hand gate evaluation") {
    // gates sigmoid(0)=0.5, candidate tanh(0)=0, so c' = 0.5*c and
    // h' = 0.5*tanh(0.5*c).
    LstmParams<double> p(1, 1);
    CellState<double> s{{0.0}, {1.0}};
    CellState<double> next = lstm_step(p, {0.7}, s);
    CHECK(next.c[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(next.h[0] == Catch::Approx(0.5 * std::tanh(0.5)).epsilon(1e-12));
    CHECK(next.h[0] == Catch::Approx(0.23105857863000487).epsilon(1e-12));
  }
  SECTION("output dims follow the hidden size") {
    LstmParams<double> p = random_lstm(5, 3, 99);
    CellState<double> next = lstm_step(p, Vector<double>(5, 0.3), CellState<double>::zero(3));
    CHECK(next.h.size() == 3);
    CHECK(next.c.size() == 3);
  }
  SECTION("input width mismatch") {
    LstmParams<double> p(4, 3);
    CHECK_THROWS_AS(lstm_step(p, Vector<double>(3, 0.0), CellState<double>::zero(3)),
                    ShapeError);
  }
}

TEST_CASE("lstm backward matches finite differences") {
  // Scalar target function: sum of squared hidden outputs over a short
  // sequence, checked against central differences parameter block by
  // parameter block.
  const std::size_t in_dim = 3, hid = 4, T = 3;
  LstmParams<double> p = random_lstm(in_dim, hid, 1234);
  Rng rng(555);
  std::vector<Vector<double>> xs(T, Vector<double>(in_dim));
  for (auto& x : xs)
    for (double& v : x) v = rng.uniform(-1, 1);

  auto loss_fn = [&]() {
    CellState<double> s = CellState<double>::zero(hid);
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      s = lstm_step(p, xs[t], s);
      for (double h : s.h) acc += 0.5 * h * h;
    }
    return acc;
  };

  // analytic gradient
  LstmParams<double> grad(in_dim, hid);
  std::vector<LstmCache<double>> caches(T);
  std::vector<CellState<double>> states(T);
  CellState<double> s = CellState<double>::zero(hid);
  for (std::size_t t = 0; t < T; ++t) {
    s = lstm_forward(p, xs[t], s, &caches[t]);
    states[t] = s;
  }
  Vector<double> dh_next(hid, 0.0), dc_next(hid, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    Vector<double> dh = dh_next;
    for (std::size_t k = 0; k < hid; ++k) dh[k] += states[t].h[k];
    Vector<double> dx, dh_prev, dc_prev;
    lstm_backward(p, caches[t], dh, dc_next, grad, dx, dh_prev, dc_prev);
    dh_next = dh_prev;
    dc_next = dc_prev;
  }

  auto analytic = grad.blocks("g");
  auto fd = finite_diff_grad(loss_fn, p.blocks("g"));
  for (std::size_t b = 0; b < analytic.size(); ++b) {
    double err = max_rel_err(analytic[b].data, fd[b].data(), analytic[b].size());
    INFO("block " << analytic[b].name);
    CHECK(err < 1e-6);
  }
}

TEST_CASE("lstm init is deterministic per seed") {
  LstmParams<double> a = random_lstm(3, 4, 42);
  LstmParams<double> b = random_lstm(3, 4, 42);
  LstmParams<double> c = random_lstm(3, 4, 43);
  CHECK(a.in_gate.wx.data == b.in_gate.wx.data);
  CHECK(a.forget_gate.b == b.forget_gate.b);
  CHECK(a.in_gate.wx.data != c.in_gate.wx.data);
  // forget bias is shifted +1
  double mean = 0.0;
  for (double v : a.forget_gate.b) mean += v;
  mean /= static_cast<double>(a.forget_gate.b.size());
  CHECK(mean > 0.4);
}
