#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "trn/adam.hpp"
#include "trn/gradcheck.hpp"
#include "trn/matrix.hpp"
#include "trn/ops.hpp"
#include "trn/rng.hpp"

using namespace trn;

TEST_CASE("linear computes Wx + b") {
  SECTION("identity map") {
    Matrix<double> w = Matrix<double>::identity(2);
    Vector<double> y = linear(w, {3.0, -1.0}, {0.0, 0.0});
    CHECK(y == Vector<double>{3.0, -1.0});
  }
  SECTION("zero weights pass the bias through") {
    Matrix<double> w = Matrix<double>::zeros(2, 2);
    Vector<double> y = linear(w, {5.0, -7.0}, {1.0, 2.0});
    CHECK(y == Vector<double>{1.0, 2.0});
  }
  SECTION("hand matrix-vector product") {
    Matrix<double> w(2, 2);
    w(0, 0) = 1; w(0, 1) = 2; w(1, 0) = 3; w(1, 1) = 4;
    Vector<double> y = linear(w, {1.0, 1.0}, {0.0, 0.0});
    CHECK(y == Vector<double>{3.0, 7.0});
  }
  SECTION("shape mismatch names both shapes") {
    Matrix<double> w = Matrix<double>::zeros(3, 4);
    CHECK_THROWS_AS(linear(w, Vector<double>(5, 0.0), Vector<double>(3, 0.0)), ShapeError);
    CHECK_THROWS_WITH(linear(w, Vector<double>(5, 0.0), Vector<double>(3, 0.0)),
                      Catch::Matchers::ContainsSubstring("3x4") &&
                          Catch::Matchers::ContainsSubstring("5"));
    CHECK_THROWS_AS(linear(w, Vector<double>(4, 0.0), Vector<double>(2, 0.0)), ShapeError);
  }
}

TEST_CASE("softmax") {
  SECTION("uniform from equal logits") {
    Vector<double> p = softmax(Vector<double>{0.0, 0.0, 0.0});
    for (double v : p) CHECK(v == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SECTION("closed form") {
    Vector<double> p = softmax(Vector<double>{std::log(2.0), 0.0, 0.0});
    CHECK(p[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(p[1] == Catch::Approx(0.25).margin(1e-12));
    CHECK(p[2] == Catch::Approx(0.25).margin(1e-12));
  }
  SECTION("stabilized against large logits") {
    Vector<double> p = softmax(Vector<double>{1000.0, 0.0, 0.0});
    REQUIRE(all_finite(p));
    CHECK(p[0] == Catch::Approx(1.0).margin(1e-9));
    CHECK(p[1] == Catch::Approx(0.0).margin(1e-9));
  }
  SECTION("empty input is a shape error") {
    CHECK_THROWS_AS(softmax(Vector<double>{}), ShapeError);
  }
  SECTION("property: sums to 1 within 1e-9 for magnitudes up to 1e3") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      std::size_t n = 1 + rng.below(8);
      Vector<double> z(n);
      for (double& v : z) v = rng.uniform(-1e3, 1e3);
      Vector<double> p = softmax(z);
      double sum = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    // strictly positive whenever the logit span stays in exp range
    for (int trial = 0; trial < 50; ++trial) {
      Vector<double> z(4);
      for (double& v : z) v = rng.uniform(-20, 20);
      for (double v : softmax(z)) CHECK(v > 0.0);
    }
  }
}

TEST_CASE("cross_entropy") {
  SECTION("perfect prediction scores zero") {
    CHECK(cross_entropy(Vector<double>{1.0, 0.0, 0.0}, 0) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("uniform prediction scores ln 3") {
    Vector<double> p(3, 1.0 / 3.0);
    CHECK(cross_entropy(p, 2) == Catch::Approx(std::log(3.0)).epsilon(1e-12));
  }
  SECTION("hand evaluation") {
    CHECK(cross_entropy(Vector<double>{0.5, 0.25, 0.25}, 1) ==
          Catch::Approx(std::log(4.0)).epsilon(1e-12));
  }
  SECTION("label out of range") {
    CHECK_THROWS_AS(cross_entropy(Vector<double>{0.5, 0.5}, 2), IndexError);
  }
  SECTION("property: non-negative, floored at -log(1e-12)") {
    CHECK(cross_entropy(Vector<double>{0.0, 1.0}, 0) ==
          Catch::Approx(-std::log(1e-12)).epsilon(1e-12));
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      Vector<double> z(4);
      for (double& v : z) v = rng.uniform(-5, 5);
      CHECK(cross_entropy(softmax(z), rng.below(4)) >= 0.0);
    }
  }
}

TEST_CASE("elementwise activations") {
  CHECK(sigmoid(0.0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(relu(Vector<double>{-1.0, 2.0}) == Vector<double>{0.0, 2.0});
  // independent table value for tanh(0.5)
  CHECK(std::tanh(0.5) == Catch::Approx(0.46211715726000974).epsilon(1e-12));
  Vector<double> t = tanh_vec(Vector<double>{0.5});
  CHECK(t[0] == Catch::Approx(0.46211715726000974).epsilon(1e-12));
}

TEST_CASE("adam_step") {
  AdamHyper hp;  // defaults: lr 5e-4, wd 5e-4, beta 0.9/0.999, eps 1e-8

  SECTION("zero gradient with zero decay leaves the parameter unchanged") {
    Matrix<double> param(2, 2);
    param(0, 0) = 1.5;
    Matrix<double> grad = Matrix<double>::zeros(2, 2);
    AdamState<double> state;
    AdamHyper h = hp;
    h.weight_decay = 0.0;
    adam_step(param, grad, state, h);
    CHECK(param(0, 0) == 1.5);
    CHECK(param(1, 1) == 0.0);
    CHECK(state.step == 1);
  }

  SECTION("hand-computed first step") {
    // m-hat = v-hat = 1 exactly on the first step with unit gradient, so
    // the update is -lr / (1 + eps).
    Matrix<double> param = Matrix<double>::zeros(1, 1);
    Matrix<double> grad(1, 1);
    grad(0, 0) = 1.0;
    AdamState<double> state;
    AdamHyper h = hp;
    h.weight_decay = 0.0;
    adam_step(param, grad, state, h);
    CHECK(param(0, 0) == Catch::Approx(-0.0005 / (1.0 + 1e-8)).epsilon(1e-12));
  }

  SECTION("constant gradient moves the parameter monotonically") {
    Matrix<double> param = Matrix<double>::zeros(1, 1);
    Matrix<double> grad(1, 1);
    grad(0, 0) = 1.0;
    AdamState<double> state;
    AdamHyper h = hp;
    h.weight_decay = 0.0;
    adam_step(param, grad, state, h);
    double after_one = param(0, 0);
    adam_step(param, grad, state, h);
    CHECK(after_one < 0.0);
    CHECK(param(0, 0) < after_one);
  }

  SECTION("lr = 0 never changes parameters") {
    Rng rng(11);
    Matrix<double> param(3, 2);
    for (double& v : param.data) v = rng.uniform(-1, 1);
    Matrix<double> grad(3, 2);
    for (double& v : grad.data) v = rng.uniform(-1, 1);
    Matrix<double> before = param;
    AdamState<double> state;
    AdamHyper h = hp;
    h.lr = 0.0;
    for (int i = 0; i < 5; ++i) adam_step(param, grad, state, h);
    CHECK(param.data == before.data);
  }

  SECTION("shape mismatch") {
    Matrix<double> param(2, 2), grad(2, 3);
    AdamState<double> state;
    CHECK_THROWS_AS(adam_step(param, grad, state, hp), ShapeError);
  }
}

TEST_CASE("finite_diff_grad") {
  SECTION("quadratic") {
    double theta = 3.0;
    auto f = [&] { return theta * theta; };
    auto g = finite_diff_grad(f, &theta, 1);
    CHECK(g[0] == Catch::Approx(6.0).margin(1e-6));
  }
  SECTION("matches the analytic softmax cross-entropy gradient") {
    Vector<double> logits{0.3, -1.2, 0.7, 0.1};
    const std::size_t label = 2;
    auto f = [&] { return cross_entropy(softmax(logits), label); };
    auto fd = finite_diff_grad(f, logits.data(), logits.size());
    Vector<double> p = softmax(logits);
    for (std::size_t i = 0; i < logits.size(); ++i) {
      double analytic = p[i] - (i == label ? 1.0 : 0.0);
      CHECK(fd[i] == Catch::Approx(analytic).margin(1e-6));
    }
  }
  SECTION("constant function has zero gradient") {
    Vector<double> theta{0.4, -0.9};
    auto f = [&] { return 2.5; };
    auto g = finite_diff_grad(f, theta.data(), theta.size());
    CHECK(std::abs(g[0]) < 1e-9);
    CHECK(std::abs(g[1]) < 1e-9);
  }
  SECTION("non-finite evaluation raises") {
    double theta = 0.0;
    auto f = [&] { return std::log(theta); };
    CHECK_THROWS_AS(finite_diff_grad(f, &theta, 1), NumericError);
  }
}
