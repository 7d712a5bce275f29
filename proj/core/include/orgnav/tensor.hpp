#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "orgnav/errors.hpp"

namespace orgnav {

enum class Axis { Rows, Cols };

struct Shape {
  int rows = 0;
  int cols = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
  int size() const { return rows * cols; }
  std::string str() const;
};

namespace detail {
struct TensorImpl {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;
  // Present iff the tensor participates in differentiation; same length as data.
  std::optional<std::vector<double>> grad;
};
}  // namespace detail

// Dense row-major 2-D tensor of doubles. 1-D values are rows (1×n).
// Copies share storage (handle semantics); clone() deep-copies. The gradient
// buffer exists exactly when requires_grad() is true.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(int rows, int cols, bool requires_grad = false);
  static Tensor full(int rows, int cols, double value, bool requires_grad = false);
  static Tensor from(std::vector<double> data, int rows, int cols, bool requires_grad = false);
  static Tensor from(std::span<const double> data, int rows, int cols, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor row(std::vector<double> v, bool requires_grad = false);
  static Tensor onehot(int n, int index, bool requires_grad = false);
  static Tensor identity(int n, bool requires_grad = false);
  static Tensor uniform(int rows, int cols, double lo, double hi, class Rng& rng,
                        bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  int rows() const { return impl().rows; }
  int cols() const { return impl().cols; }
  Shape shape() const { return {impl().rows, impl().cols}; }
  int size() const { return impl().rows * impl().cols; }

  double at(int r, int c) const;
  void set(int r, int c, double v);

  std::span<const double> data() const { return impl().data; }
  std::span<double> data() { return impl().data; }

  bool requires_grad() const { return impl().grad.has_value(); }
  std::span<const double> grad() const;
  std::span<double> grad();
  void zero_grad();

  // Value of a 1×1 tensor.
  double item() const;

  bool all_finite() const;

  // Deep copy. requires_grad is preserved unless overridden; gradients reset.
  Tensor clone() const;
  Tensor clone(bool requires_grad) const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

  std::shared_ptr<detail::TensorImpl> impl_ptr() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
  detail::TensorImpl& impl() const;
  std::shared_ptr<detail::TensorImpl> impl_;
};

// Records the backward closures of every differentiable operation, in
// execution order. Reverse traversal therefore visits each node after all of
// its consumers. A tape can run backward once; a second call is rejected.
class Tape {
 public:
  void record(std::function<void()> fn);
  void backward(const Tensor& loss);
  bool consumed() const { return consumed_; }
  std::size_t recorded_ops() const { return records_.size(); }

 private:
  std::vector<std::function<void()>> records_;
  bool consumed_ = false;
};

// --- primitive operations ---------------------------------------------------
// Every op returns a fresh tensor; the result requires grad iff any input
// does, in which case the backward closure is recorded on the tape.

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor relu(Tape& tape, const Tensor& a);
Tensor tanh(Tape& tape, const Tensor& a);
// Stabilized by max subtraction. Axis::Cols normalizes each row.
Tensor softmax(Tape& tape, const Tensor& a, Axis axis);
// -log(p[target]) of a probability vector; the log argument is clamped at
// 1e-12 so saturated predictions stay finite.
Tensor cross_entropy(Tape& tape, const Tensor& predicted_dist, int target_index);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(Tape& tape, const Tensor& a, double k);
Tensor square(Tape& tape, const Tensor& a);
Tensor mean(Tape& tape, const Tensor& a);  // scalar
Tensor sum(Tape& tape, const Tensor& a);   // scalar
Tensor log(Tape& tape, const Tensor& a);   // elementwise, clamped at 1e-12
Tensor concat(Tape& tape, std::span<const Tensor> tensors, Axis axis);
Tensor slice(Tape& tape, const Tensor& a, Axis axis, int begin, int end);
Tensor reshape(Tape& tape, const Tensor& a, int rows, int cols);

inline constexpr double kLogClamp = 1e-12;

}  // namespace orgnav
