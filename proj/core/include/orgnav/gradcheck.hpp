#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "orgnav/tensor.hpp"

namespace orgnav {

struct GradCheckOptions {
  double step = 1e-5;
  // 0 checks every component; otherwise at most this many per parameter,
  // chosen by a seeded draw so large models stay checkable in bounded time.
  int max_components_per_param = 0;
  std::uint64_t sample_seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  int checked_components = 0;
  std::string worst_location;
};

// Compares tape gradients of a scalar-valued deterministic function against
// central finite differences. Per component the error is
// |g - fd| / max(1, |g|, |fd|). Parameters are perturbed in place and restored
// bit-exactly.
GradCheckReport finite_difference_check(const std::function<Tensor(Tape&)>& loss_fn,
                                        std::span<Tensor> params,
                                        const GradCheckOptions& options = {});

}  // namespace orgnav
