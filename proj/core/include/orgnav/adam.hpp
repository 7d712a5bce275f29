#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "orgnav/tensor.hpp"

namespace orgnav {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter first/second moment estimates plus the shared step counter.
// Moment buffers are sized on the first update and must keep matching the
// parameter shapes afterwards.
class AdamState {
 public:
  explicit AdamState(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  std::int64_t step_count() const { return step_; }

  std::span<const std::vector<double>> first_moments() const { return m_; }
  std::span<const std::vector<double>> second_moments() const { return v_; }

 private:
  friend void adam_step(std::span<Tensor> params, std::span<const std::span<const double>> grads,
                        AdamState& state);
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Bias-corrected Adam update, in place. Throws NumericError on any non-finite
// gradient component instead of propagating NaNs into the parameters.
void adam_step(std::span<Tensor> params, std::span<const std::span<const double>> grads,
               AdamState& state);

// Convenience form reading each parameter's own gradient buffer.
void adam_step(std::span<Tensor> params, AdamState& state);

}  // namespace orgnav
