#include "orgnav/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "orgnav/rng.hpp"

namespace orgnav {

GradCheckReport finite_difference_check(const std::function<Tensor(Tape&)>& loss_fn,
                                        std::span<Tensor> params,
                                        const GradCheckOptions& options) {
  for (Tensor& p : params) p.zero_grad();
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Tensor loss = loss_fn(tape);
    tape.backward(loss);
    analytic.reserve(params.size());
    for (Tensor& p : params) {
      analytic.emplace_back(p.grad().begin(), p.grad().end());
    }
  }

  auto eval = [&]() {
    Tape tape;
    return loss_fn(tape).item();
  };

  Rng sampler(mix64(0x6f6e617667726164ull, options.sample_seed));
  GradCheckReport report;
  const double h = options.step;

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto data = params[pi].data();
    std::vector<int> indices(data.size());
    std::iota(indices.begin(), indices.end(), 0);
    if (options.max_components_per_param > 0 &&
        static_cast<int>(indices.size()) > options.max_components_per_param) {
      // Seeded partial Fisher-Yates; keeps the checked subset reproducible.
      for (int i = 0; i < options.max_components_per_param; ++i) {
        const int j = i + sampler.uniform_int(static_cast<int>(indices.size()) - i);
        std::swap(indices[i], indices[j]);
      }
      indices.resize(options.max_components_per_param);
    }

    for (int idx : indices) {
      const double original = data[idx];
      data[idx] = original + h;
      const double plus = eval();
      data[idx] = original - h;
      const double minus = eval();
      data[idx] = original;

      const double fd = (plus - minus) / (2.0 * h);
      const double g = analytic[pi][idx];
      const double denom = std::max({1.0, std::abs(g), std::abs(fd)});
      const double rel = std::abs(g - fd) / denom;
      ++report.checked_components;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_location =
            "param " + std::to_string(pi) + "[" + std::to_string(idx) + "] tape=" +
            std::to_string(g) + " fd=" + std::to_string(fd);
      }
    }
  }
  return report;
}

}  // namespace orgnav
