#include "orgnav/adam.hpp"

#include <cmath>
#include <string>

namespace orgnav {

void adam_step(std::span<Tensor> params, std::span<const std::span<const double>> grads,
               AdamState& state) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                     std::to_string(grads.size()) + " gradients");
  }
  if (state.m_.empty()) {
    state.m_.resize(params.size());
    state.v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m_[i].assign(params[i].data().size(), 0.0);
      state.v_[i].assign(params[i].data().size(), 0.0);
    }
  } else if (state.m_.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state tracks " + std::to_string(state.m_.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }

  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].data().size() ||
        state.m_[i].size() != params[i].data().size()) {
      throw ShapeError("adam_step: parameter " + std::to_string(i) + " shape changed");
    }
    for (double g : grads[i]) {
      if (!std::isfinite(g)) {
        throw NumericError("adam_step: non-finite gradient in parameter " + std::to_string(i));
      }
    }
  }

  const AdamConfig& c = state.config_;
  state.step_ += 1;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_));

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto data = params[i].data();
    const auto g = grads[i];
    auto& m = state.m_[i];
    auto& v = state.v_[i];
    for (std::size_t j = 0; j < data.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      data[j] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

void adam_step(std::span<Tensor> params, AdamState& state) {
  std::vector<std::span<const double>> grads;
  grads.reserve(params.size());
  for (Tensor& p : params) grads.push_back(std::span<const double>(p.grad()));
  adam_step(params, grads, state);
}

}  // namespace orgnav
