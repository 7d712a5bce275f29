#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "orgnav/adam.hpp"
#include "orgnav/gradcheck.hpp"
#include "orgnav/rng.hpp"
#include "orgnav/tensor.hpp"

using namespace orgnav;

namespace {

Tensor random_tensor(int r, int c, Rng& rng, bool grad = true) {
  return Tensor::uniform(r, c, -1.0, 1.0, rng, grad);
}

}  // namespace

TEST_CASE("matmul identity and hand arithmetic") {
  Tape tape;
  Rng rng(7);
  Tensor m = random_tensor(2, 2, rng, false);
  Tensor out = matmul(tape, Tensor::identity(2), m);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) CHECK(out.at(r, c) == doctest::Approx(m.at(r, c)));
  }

  Tensor a = Tensor::from({1, 2}, 1, 2);
  Tensor b = Tensor::from({3, 4}, 2, 1);
  CHECK(matmul(tape, a, b).item() == doctest::Approx(11.0));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tape tape;
  Tensor a = Tensor::zeros(2, 3);
  Tensor b = Tensor::zeros(2, 2);
  bool threw = false;
  try {
    matmul(tape, a, b);
  } catch (const ShapeError& e) {
    threw = true;
    const std::string msg = e.what();
    CHECK(msg.find("(2x3)") != std::string::npos);
    CHECK(msg.find("(2x2)") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("matmul gradients match central finite differences") {
  Rng rng(11);
  Tensor a = random_tensor(3, 4, rng);
  Tensor b = random_tensor(4, 2, rng);
  Tensor params[] = {a, b};
  auto report = finite_difference_check(
      [&](Tape& t) { return sum(t, matmul(t, a, b)); }, params);
  CHECK(report.max_rel_error <= 1e-4);
  CHECK(report.checked_components == 12 + 8);
}

TEST_CASE("relu forward cases and gradient mask") {
  Tape tape;
  Tensor x = Tensor::from({-1, 0, 2}, 1, 3);
  Tensor y = relu(tape, x);
  CHECK(y.at(0, 0) == 0.0);
  CHECK(y.at(0, 1) == 0.0);
  CHECK(y.at(0, 2) == 2.0);

  {
    Tape t2;
    Tensor neg = Tensor::from({-3, -1, -0.5}, 1, 3, true);
    Tensor out = sum(t2, relu(t2, neg));
    t2.backward(out);
    CHECK(out.item() == 0.0);
    for (double g : neg.grad()) CHECK(g == 0.0);
  }

  // Away from 0 the gradient is the x>0 indicator.
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor x2 = random_tensor(2, 5, rng);
    for (double& v : x2.data()) {
      if (std::abs(v) < 0.05) v += 0.2;  // keep clear of the kink
    }
    Tensor params[] = {x2};
    auto report = finite_difference_check(
        [&](Tape& t) { return sum(t, relu(t, x2)); }, params);
    CHECK(report.max_rel_error <= 1e-4);
  }
}

TEST_CASE("softmax symmetry, stability, and Jacobian") {
  Tape tape;
  Tensor even = softmax(tape, Tensor::from({0, 0}, 1, 2), Axis::Cols);
  CHECK(even.at(0, 0) == doctest::Approx(0.5));
  CHECK(even.at(0, 1) == doctest::Approx(0.5));

  Tensor hot = softmax(tape, Tensor::from({1000, 0}, 1, 2), Axis::Cols);
  CHECK(hot.all_finite());
  CHECK(hot.at(0, 0) == doctest::Approx(1.0));
  CHECK(hot.at(0, 1) == doctest::Approx(0.0));

  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor x = random_tensor(1, 6, rng);
    Tensor w = random_tensor(1, 6, rng, false);  // random projection to a scalar
    Tensor params[] = {x};
    auto report = finite_difference_check(
        [&](Tape& t) { return sum(t, mul(t, softmax(t, x, Axis::Cols), w)); }, params);
    CHECK(report.max_rel_error <= 1e-4);
  }
}

TEST_CASE("softmax rows sum to one for any finite input") {
  Rng rng(17);
  Tape tape;
  for (int trial = 0; trial < 100; ++trial) {
    Tensor x = Tensor::uniform(3, 7, -50.0, 50.0, rng);
    Tensor y = softmax(tape, x, Axis::Cols);
    for (int r = 0; r < 3; ++r) {
      double total = 0.0;
      for (int c = 0; c < 7; ++c) {
        total += y.at(r, c);
        CHECK(y.at(r, c) > 0.0);
        CHECK(y.at(r, c) < 1.0 + 1e-12);
      }
      CHECK(std::abs(total - 1.0) <= 1e-6);
    }
  }
  // Axis::Rows normalizes each column instead.
  Tensor x = Tensor::from({0, 5, 0, 5}, 2, 2);
  Tensor y = softmax(tape, x, Axis::Rows);
  CHECK(y.at(0, 0) + y.at(1, 0) == doctest::Approx(1.0));
  CHECK(y.at(0, 1) + y.at(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("cross entropy values") {
  Tape tape;
  Tensor onehot = Tensor::from({1, 0, 0}, 1, 3);
  CHECK(cross_entropy(tape, onehot, 0).item() == doctest::Approx(0.0));

  Tensor uniform6 = Tensor::full(1, 6, 1.0 / 6.0);
  for (int target = 0; target < 6; ++target) {
    CHECK(cross_entropy(tape, uniform6, target).item() == doctest::Approx(std::log(6.0)));
  }

  CHECK_THROWS_AS(cross_entropy(tape, uniform6, 6), IndexError);
  CHECK_THROWS_AS(cross_entropy(tape, uniform6, -1), IndexError);
  CHECK_THROWS_AS(cross_entropy(tape, Tensor::from({0.7, 0.7}, 1, 2), 0), NumericError);
}

TEST_CASE("softmax-cross-entropy gradient is p minus onehot") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor logits = random_tensor(1, 6, rng);
    const int target = trial % 6;
    Tape tape;
    Tensor p = softmax(tape, logits, Axis::Cols);
    Tensor loss = cross_entropy(tape, p, target);
    tape.backward(loss);
    for (int i = 0; i < 6; ++i) {
      const double expected = p.at(0, i) - (i == target ? 1.0 : 0.0);
      CHECK(logits.grad()[i] == doctest::Approx(expected).epsilon(1e-9));
    }

    Tensor params[] = {logits};
    auto report = finite_difference_check(
        [&](Tape& t) { return cross_entropy(t, softmax(t, logits, Axis::Cols), target); }, params);
    CHECK(report.max_rel_error <= 1e-4);
  }
}

TEST_CASE("concat, mean, and slice round trip") {
  Tape tape;
  Tensor parts[] = {Tensor::from({1}, 1, 1), Tensor::from({2}, 1, 1)};
  Tensor joined = concat(tape, parts, Axis::Cols);
  CHECK(joined.rows() == 1);
  CHECK(joined.cols() == 2);
  CHECK(joined.at(0, 0) == 1.0);
  CHECK(joined.at(0, 1) == 2.0);

  CHECK(mean(tape, Tensor::from({2, 4}, 1, 2)).item() == doctest::Approx(3.0));

  Rng rng(29);
  Tensor a = random_tensor(2, 3, rng, false);
  Tensor b = random_tensor(2, 4, rng, false);
  Tensor both[] = {a, b};
  Tensor cat = concat(tape, both, Axis::Cols);
  Tensor a2 = slice(tape, cat, Axis::Cols, 0, 3);
  Tensor b2 = slice(tape, cat, Axis::Cols, 3, 7);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) CHECK(a2.at(r, c) == a.at(r, c));
    for (int c = 0; c < 4; ++c) CHECK(b2.at(r, c) == b.at(r, c));
  }
}

TEST_CASE("helper op gradients match finite differences") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor a = random_tensor(2, 3, rng);
    Tensor b = random_tensor(2, 3, rng);
    Tensor params[] = {a, b};
    auto report = finite_difference_check(
        [&](Tape& t) {
          Tensor both[] = {a, b};
          Tensor cat = concat(t, both, Axis::Rows);
          Tensor s = slice(t, cat, Axis::Rows, 1, 3);
          Tensor u = tanh(t, add(t, mul(t, a, b), sub(t, a, b)));
          return add(t, mean(t, s), mean(t, square(t, u)));
        },
        params);
    CHECK(report.max_rel_error <= 1e-4);
  }
  // log with positive inputs
  Tensor x = Tensor::from({0.5, 1.5, 2.5}, 1, 3, true);
  Tensor params[] = {x};
  auto report = finite_difference_check(
      [&](Tape& t) { return sum(t, log(t, x)); }, params);
  CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("primitive gradients across 100 random seeds") {
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(1000 + seed);
    Tensor a = random_tensor(2, 3, rng);
    Tensor w = random_tensor(3, 2, rng);
    Tensor params[] = {a, w};
    auto report = finite_difference_check(
        [&](Tape& t) {
          Tensor h = relu(t, matmul(t, a, w));
          Tensor p = softmax(t, reshape(t, h, 1, 4), Axis::Cols);
          return add(t, cross_entropy(t, p, seed % 4), mean(t, tanh(t, a)));
        },
        params, {.sample_seed = static_cast<std::uint64_t>(seed)});
    CHECK(report.max_rel_error <= 1e-4);
  }
}

TEST_CASE("backward twice on one tape is rejected") {
  Tape tape;
  Tensor x = Tensor::from({1, 2}, 1, 2, true);
  Tensor loss = sum(tape, x);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), TapeError);
}

TEST_CASE("gradients accumulate when a tensor is reused") {
  Tape tape;
  Tensor x = Tensor::from({3}, 1, 1, true);
  Tensor loss = add(tape, mul(tape, x, x), x);  // x^2 + x, d/dx = 2x + 1
  tape.backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(7.0));
}

TEST_CASE("adam zero gradient is a fixed point") {
  AdamState state;
  Tensor p = Tensor::from({1.5, -2.5}, 1, 2, true);
  const std::vector<double> before(p.data().begin(), p.data().end());
  for (int i = 0; i < 10; ++i) {
    p.zero_grad();
    adam_step(std::span<Tensor>(&p, 1), state);
  }
  CHECK(p.data()[0] == before[0]);
  CHECK(p.data()[1] == before[1]);
  CHECK(state.step_count() == 10);
}

TEST_CASE("adam moves against the gradient sign") {
  AdamState state(AdamConfig{.learning_rate = 1e-2});
  Tensor p = Tensor::scalar(0.0, true);
  for (int i = 0; i < 50; ++i) {
    p.zero_grad();
    p.grad()[0] = 2.0;
    adam_step(std::span<Tensor>(&p, 1), state);
  }
  CHECK(p.item() < -1e-3);
}

TEST_CASE("adam first step with unit gradient moves by about lr") {
  // m1 = 0.1, v1 = 1e-3; bias correction gives m_hat = 1, v_hat = 1, so the
  // update is lr / (1 + eps).
  AdamState state;
  Tensor p = Tensor::scalar(0.25, true);
  p.grad()[0] = 1.0;
  adam_step(std::span<Tensor>(&p, 1), state);
  CHECK(p.item() == doctest::Approx(0.25 - 1e-4).epsilon(1e-9));
}

TEST_CASE("adam rejects non-finite gradients") {
  AdamState state;
  Tensor p = Tensor::scalar(1.0, true);
  p.grad()[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(std::span<Tensor>(&p, 1), state), NumericError);
}

TEST_CASE("finite difference check is exact for a linear function") {
  Tensor x = Tensor::from({1, 2, 3}, 1, 3, true);
  Tensor params[] = {x};
  auto report = finite_difference_check(
      [&](Tape& t) { return sum(t, scale(t, x, 3.0)); }, params);
  CHECK(report.max_rel_error <= 1e-9);
}

TEST_CASE("component sampling still covers every parameter") {
  Rng rng(41);
  Tensor a = random_tensor(4, 4, rng);
  Tensor params[] = {a};
  auto report = finite_difference_check(
      [&](Tape& t) { return mean(t, square(t, a)); }, params,
      {.max_components_per_param = 5, .sample_seed = 9});
  CHECK(report.checked_components == 5);
  CHECK(report.max_rel_error <= 1e-4);
}
