#include "orgnav/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "orgnav/rng.hpp"

namespace orgnav {

namespace {

// c = a·b, a: n×k, b: k×m. ikj order keeps the inner loop contiguous.
void matmul_nn(const double* a, const double* b, double* c, int n, int k, int m) {
  std::fill(c, c + static_cast<std::size_t>(n) * m, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + static_cast<std::size_t>(p) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// c += a·bᵀ, a: n×k, b: m×k, c: n×m.
void matmul_nt_acc(const double* a, const double* b, double* c, int n, int k, int m) {
  for (int i = 0; i < n; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * m;
    for (int j = 0; j < m; ++j) {
      const double* brow = b + static_cast<std::size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

// c += aᵀ·b, a: k×n, b: k×m, c: n×m.
void matmul_tn_acc(const double* a, const double* b, double* c, int k, int n, int m) {
  for (int p = 0; p < k; ++p) {
    const double* arow = a + static_cast<std::size_t>(p) * n;
    const double* brow = b + static_cast<std::size_t>(p) * m;
    for (int i = 0; i < n; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

using Impl = detail::TensorImpl;
using ImplPtr = std::shared_ptr<detail::TensorImpl>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shapes " + a.shape().str() + " and " + b.shape().str() +
                     " differ");
  }
}

Tensor make_like_output(int rows, int cols, bool requires_grad) {
  return Tensor::zeros(rows, cols, requires_grad);
}

}  // namespace

std::string Shape::str() const {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

detail::TensorImpl& Tensor::impl() const {
  if (!impl_) throw Error("use of an undefined tensor");
  return *impl_;
}

Tensor Tensor::zeros(int rows, int cols, bool requires_grad) {
  if (rows < 0 || cols < 0) throw ShapeError("negative tensor dimension");
  auto impl = std::make_shared<Impl>();
  impl->rows = rows;
  impl->cols = cols;
  impl->data.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  if (requires_grad) impl->grad.emplace(impl->data.size(), 0.0);
  return Tensor(std::move(impl));
}

Tensor Tensor::full(int rows, int cols, double value, bool requires_grad) {
  Tensor t = zeros(rows, cols, requires_grad);
  std::fill(t.data().begin(), t.data().end(), value);
  return t;
}

Tensor Tensor::from(std::vector<double> data, int rows, int cols, bool requires_grad) {
  if (static_cast<std::size_t>(rows) * cols != data.size()) {
    throw ShapeError("data length " + std::to_string(data.size()) + " does not fill " +
                     Shape{rows, cols}.str());
  }
  auto impl = std::make_shared<Impl>();
  impl->rows = rows;
  impl->cols = cols;
  impl->data = std::move(data);
  if (requires_grad) impl->grad.emplace(impl->data.size(), 0.0);
  return Tensor(std::move(impl));
}

Tensor Tensor::from(std::span<const double> data, int rows, int cols, bool requires_grad) {
  return from(std::vector<double>(data.begin(), data.end()), rows, cols, requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from(std::vector<double>{v}, 1, 1, requires_grad);
}

Tensor Tensor::row(std::vector<double> v, bool requires_grad) {
  const int n = static_cast<int>(v.size());
  return from(std::move(v), 1, n, requires_grad);
}

Tensor Tensor::onehot(int n, int index, bool requires_grad) {
  if (index < 0 || index >= n) throw IndexError("onehot index out of range");
  Tensor t = zeros(1, n, requires_grad);
  t.data()[static_cast<std::size_t>(index)] = 1.0;
  return t;
}

Tensor Tensor::identity(int n, bool requires_grad) {
  Tensor t = zeros(n, n, requires_grad);
  for (int i = 0; i < n; ++i) t.data()[static_cast<std::size_t>(i) * n + i] = 1.0;
  return t;
}

Tensor Tensor::uniform(int rows, int cols, double lo, double hi, Rng& rng, bool requires_grad) {
  Tensor t = zeros(rows, cols, requires_grad);
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

double Tensor::at(int r, int c) const {
  if (r < 0 || r >= rows() || c < 0 || c >= cols()) {
    throw IndexError("tensor index (" + std::to_string(r) + "," + std::to_string(c) +
                     ") out of range for " + shape().str());
  }
  return impl().data[static_cast<std::size_t>(r) * cols() + c];
}

void Tensor::set(int r, int c, double v) {
  if (r < 0 || r >= rows() || c < 0 || c >= cols()) {
    throw IndexError("tensor index out of range for " + shape().str());
  }
  impl().data[static_cast<std::size_t>(r) * cols() + c] = v;
}

std::span<const double> Tensor::grad() const {
  if (!requires_grad()) throw TapeError("tensor has no gradient buffer");
  return *impl().grad;
}

std::span<double> Tensor::grad() {
  if (!requires_grad()) throw TapeError("tensor has no gradient buffer");
  return *impl().grad;
}

void Tensor::zero_grad() {
  if (requires_grad()) std::fill(impl().grad->begin(), impl().grad->end(), 0.0);
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on non-scalar tensor " + shape().str());
  return impl().data[0];
}

bool Tensor::all_finite() const {
  for (double v : impl().data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor Tensor::clone() const { return clone(requires_grad()); }

Tensor Tensor::clone(bool requires_grad) const {
  auto impl = std::make_shared<Impl>();
  impl->rows = rows();
  impl->cols = cols();
  impl->data = std::vector<double>(data().begin(), data().end());
  if (requires_grad) impl->grad.emplace(impl->data.size(), 0.0);
  return Tensor(std::move(impl));
}

void Tape::record(std::function<void()> fn) {
  if (consumed_) throw TapeError("recording onto a consumed tape");
  records_.push_back(std::move(fn));
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw TapeError("backward already ran on this tape");
  if (loss.size() != 1) throw ShapeError("backward root must be a scalar, got " + loss.shape().str());
  if (!loss.requires_grad()) throw TapeError("backward root does not require grad");
  consumed_ = true;
  loss.impl_ptr()->grad->front() = 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
}

// --- ops ---------------------------------------------------------------------

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions of " + a.shape().str() + " and " + b.shape().str() +
                     " do not match");
  }
  const int n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out = make_like_output(n, m, a.requires_grad() || b.requires_grad());
  matmul_nn(a.data().data(), b.data().data(), out.data().data(), n, k, m);
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr(), n, k, m] {
      const double* og = oi->grad->data();
      if (ai->grad) matmul_nt_acc(og, bi->data.data(), ai->grad->data(), n, m, k);
      if (bi->grad) matmul_tn_acc(ai->data.data(), og, bi->grad->data(), n, k, m);
    });
  }
  return out;
}

Tensor relu(Tape& tape, const Tensor& a) {
  Tensor out = make_like_output(a.rows(), a.cols(), a.requires_grad());
  const auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), oi = out.impl_ptr()] {
      if (!ai->grad) return;
      const auto& og = *oi->grad;
      auto& ag = *ai->grad;
      // Subgradient at exactly 0 is 0.
      for (std::size_t i = 0; i < og.size(); ++i) {
        if (ai->data[i] > 0.0) ag[i] += og[i];
      }
    });
  }
  return out;
}

Tensor tanh(Tape& tape, const Tensor& a) {
  Tensor out = make_like_output(a.rows(), a.cols(), a.requires_grad());
  const auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::tanh(src[i]);
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), oi = out.impl_ptr()] {
      if (!ai->grad) return;
      const auto& og = *oi->grad;
      auto& ag = *ai->grad;
      for (std::size_t i = 0; i < og.size(); ++i) {
        const double y = oi->data[i];
        ag[i] += og[i] * (1.0 - y * y);
      }
    });
  }
  return out;
}

Tensor softmax(Tape& tape, const Tensor& a, Axis axis) {
  const int rows = a.rows(), cols = a.cols();
  const int slices = axis == Axis::Cols ? rows : cols;
  const int len = axis == Axis::Cols ? cols : rows;
  if (len == 0) throw ShapeError("softmax over an empty axis");
  const int stride = axis == Axis::Cols ? 1 : cols;
  const int slice_stride = axis == Axis::Cols ? cols : 1;

  Tensor out = make_like_output(rows, cols, a.requires_grad());
  const double* src = a.data().data();
  double* dst = out.data().data();
  for (int s = 0; s < slices; ++s) {
    const double* x = src + static_cast<std::size_t>(s) * slice_stride;
    double* y = dst + static_cast<std::size_t>(s) * slice_stride;
    double mx = x[0];
    for (int i = 1; i < len; ++i) mx = std::max(mx, x[static_cast<std::size_t>(i) * stride]);
    double total = 0.0;
    for (int i = 0; i < len; ++i) {
      const double e = std::exp(x[static_cast<std::size_t>(i) * stride] - mx);
      y[static_cast<std::size_t>(i) * stride] = e;
      total += e;
    }
    for (int i = 0; i < len; ++i) y[static_cast<std::size_t>(i) * stride] /= total;
  }
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), oi = out.impl_ptr(), slices, len, stride, slice_stride] {
      if (!ai->grad) return;
      const double* y = oi->data.data();
      const double* dy = oi->grad->data();
      double* dx = ai->grad->data();
      for (int s = 0; s < slices; ++s) {
        const std::size_t base = static_cast<std::size_t>(s) * slice_stride;
        double dot = 0.0;
        for (int i = 0; i < len; ++i) {
          const std::size_t idx = base + static_cast<std::size_t>(i) * stride;
          dot += dy[idx] * y[idx];
        }
        for (int i = 0; i < len; ++i) {
          const std::size_t idx = base + static_cast<std::size_t>(i) * stride;
          dx[idx] += y[idx] * (dy[idx] - dot);
        }
      }
    });
  }
  return out;
}

Tensor cross_entropy(Tape& tape, const Tensor& predicted_dist, int target_index) {
  if (predicted_dist.rows() != 1 && predicted_dist.cols() != 1) {
    throw ShapeError("cross_entropy expects a vector, got " + predicted_dist.shape().str());
  }
  const int n = predicted_dist.size();
  if (target_index < 0 || target_index >= n) {
    throw IndexError("cross_entropy target " + std::to_string(target_index) +
                     " out of range for " + std::to_string(n) + " classes");
  }
  double total = 0.0;
  for (double v : predicted_dist.data()) total += v;
  if (std::abs(total - 1.0) > 1e-6) {
    throw NumericError("cross_entropy input sums to " + std::to_string(total) +
                       ", not a probability vector");
  }
  const double p = predicted_dist.data()[static_cast<std::size_t>(target_index)];
  const double clamped = std::max(p, kLogClamp);
  Tensor out = Tensor::scalar(-std::log(clamped), predicted_dist.requires_grad());
  if (out.requires_grad()) {
    tape.record([ai = predicted_dist.impl_ptr(), oi = out.impl_ptr(), target_index, p, clamped] {
      if (!ai->grad) return;
      if (p >= kLogClamp) {
        (*ai->grad)[static_cast<std::size_t>(target_index)] += oi->grad->front() * (-1.0 / clamped);
      }
      // In the clamped region the loss is constant in p.
    });
  }
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = make_like_output(a.rows(), a.cols(), a.requires_grad() || b.requires_grad());
  const auto xs = a.data();
  const auto ys = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) dst[i] = xs[i] + ys[i];
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr()] {
      const auto& og = *oi->grad;
      if (ai->grad) {
        for (std::size_t i = 0; i < og.size(); ++i) (*ai->grad)[i] += og[i];
      }
      if (bi->grad) {
        for (std::size_t i = 0; i < og.size(); ++i) (*bi->grad)[i] += og[i];
      }
    });
  }
  return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = make_like_output(a.rows(), a.cols(), a.requires_grad() || b.requires_grad());
  const auto xs = a.data();
  const auto ys = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) dst[i] = xs[i] - ys[i];
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr()] {
      const auto& og = *oi->grad;
      if (ai->grad) {
        for (std::size_t i = 0; i < og.size(); ++i) (*ai->grad)[i] += og[i];
      }
      if (bi->grad) {
        for (std::size_t i = 0; i < og.size(); ++i) (*bi->grad)[i] -= og[i];
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = make_like_output(a.rows(), a.cols(), a.requires_grad() || b.requires_grad());
  const auto xs = a.data();
  const auto ys = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) dst[i] = xs[i] * ys[i];
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), bi = b.impl_ptr(), oi = out.impl_ptr()] {
      const auto& og = *oi->grad;
      if (ai->grad) {
        for (std::size_t i = 0; i < og.size(); ++i) (*ai->grad)[i] += og[i] * bi->data[i];
      }
      if (bi->grad) {
        for (std::size_t i = 0; i < og.size(); ++i) (*bi->grad)[i] += og[i] * ai->data[i];
      }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, double k) {
  Tensor out = make_like_output(a.rows(), a.cols(), a.requires_grad());
  const auto xs = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) dst[i] = xs[i] * k;
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), oi = out.impl_ptr(), k] {
      if (!ai->grad) return;
      const auto& og = *oi->grad;
      for (std::size_t i = 0; i < og.size(); ++i) (*ai->grad)[i] += og[i] * k;
    });
  }
  return out;
}

Tensor square(Tape& tape, const Tensor& a) { return mul(tape, a, a); }

Tensor mean(Tape& tape, const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean of an empty tensor");
  double total = 0.0;
  for (double v : a.data()) total += v;
  const double inv = 1.0 / a.size();
  Tensor out = Tensor::scalar(total * inv, a.requires_grad());
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), oi = out.impl_ptr(), inv] {
      if (!ai->grad) return;
      const double g = oi->grad->front() * inv;
      for (double& v : *ai->grad) v += g;
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  Tensor out = Tensor::scalar(total, a.requires_grad());
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), oi = out.impl_ptr()] {
      if (!ai->grad) return;
      const double g = oi->grad->front();
      for (double& v : *ai->grad) v += g;
    });
  }
  return out;
}

Tensor log(Tape& tape, const Tensor& a) {
  Tensor out = make_like_output(a.rows(), a.cols(), a.requires_grad());
  const auto xs = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) dst[i] = std::log(std::max(xs[i], kLogClamp));
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), oi = out.impl_ptr()] {
      if (!ai->grad) return;
      const auto& og = *oi->grad;
      for (std::size_t i = 0; i < og.size(); ++i) {
        if (ai->data[i] >= kLogClamp) (*ai->grad)[i] += og[i] / ai->data[i];
      }
    });
  }
  return out;
}

Tensor concat(Tape& tape, std::span<const Tensor> tensors, Axis axis) {
  if (tensors.empty()) throw ShapeError("concat of zero tensors");
  bool needs_grad = false;
  int rows = tensors.front().rows();
  int cols = tensors.front().cols();
  if (axis == Axis::Cols) {
    cols = 0;
    for (const Tensor& t : tensors) {
      if (t.rows() != rows) {
        throw ShapeError("concat along cols: row counts differ (" + std::to_string(rows) + " vs " +
                         std::to_string(t.rows()) + ")");
      }
      cols += t.cols();
      needs_grad = needs_grad || t.requires_grad();
    }
  } else {
    rows = 0;
    for (const Tensor& t : tensors) {
      if (t.cols() != cols) {
        throw ShapeError("concat along rows: column counts differ (" + std::to_string(cols) +
                         " vs " + std::to_string(t.cols()) + ")");
      }
      rows += t.rows();
      needs_grad = needs_grad || t.requires_grad();
    }
  }

  Tensor out = make_like_output(rows, cols, needs_grad);
  double* dst = out.data().data();
  if (axis == Axis::Cols) {
    int col_off = 0;
    for (const Tensor& t : tensors) {
      const double* src = t.data().data();
      for (int r = 0; r < rows; ++r) {
        std::memcpy(dst + static_cast<std::size_t>(r) * cols + col_off,
                    src + static_cast<std::size_t>(r) * t.cols(),
                    sizeof(double) * static_cast<std::size_t>(t.cols()));
      }
      col_off += t.cols();
    }
  } else {
    int row_off = 0;
    for (const Tensor& t : tensors) {
      std::memcpy(dst + static_cast<std::size_t>(row_off) * cols, t.data().data(),
                  sizeof(double) * t.data().size());
      row_off += t.rows();
    }
  }

  if (needs_grad) {
    std::vector<std::shared_ptr<detail::TensorImpl>> parts;
    parts.reserve(tensors.size());
    for (const Tensor& t : tensors) parts.push_back(t.impl_ptr());
    tape.record([parts = std::move(parts), oi = out.impl_ptr(), axis, rows, cols] {
      const double* og = oi->grad->data();
      if (axis == Axis::Cols) {
        int col_off = 0;
        for (const auto& p : parts) {
          if (p->grad) {
            for (int r = 0; r < rows; ++r) {
              const double* src = og + static_cast<std::size_t>(r) * cols + col_off;
              double* dst = p->grad->data() + static_cast<std::size_t>(r) * p->cols;
              for (int c = 0; c < p->cols; ++c) dst[c] += src[c];
            }
          }
          col_off += p->cols;
        }
      } else {
        int row_off = 0;
        for (const auto& p : parts) {
          if (p->grad) {
            const double* src = og + static_cast<std::size_t>(row_off) * cols;
            double* dst = p->grad->data();
            for (std::size_t i = 0; i < p->grad->size(); ++i) dst[i] += src[i];
          }
          row_off += p->rows;
        }
      }
    });
  }
  return out;
}

Tensor slice(Tape& tape, const Tensor& a, Axis axis, int begin, int end) {
  const int limit = axis == Axis::Cols ? a.cols() : a.rows();
  if (begin < 0 || end > limit || begin >= end) {
    throw ShapeError("slice range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + a.shape().str());
  }
  const int rows = axis == Axis::Cols ? a.rows() : end - begin;
  const int cols = axis == Axis::Cols ? end - begin : a.cols();
  Tensor out = make_like_output(rows, cols, a.requires_grad());
  double* dst = out.data().data();
  const double* src = a.data().data();
  if (axis == Axis::Cols) {
    for (int r = 0; r < rows; ++r) {
      std::memcpy(dst + static_cast<std::size_t>(r) * cols,
                  src + static_cast<std::size_t>(r) * a.cols() + begin,
                  sizeof(double) * static_cast<std::size_t>(cols));
    }
  } else {
    std::memcpy(dst, src + static_cast<std::size_t>(begin) * a.cols(),
                sizeof(double) * out.data().size());
  }
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), oi = out.impl_ptr(), axis, begin, rows, cols] {
      if (!ai->grad) return;
      const double* og = oi->grad->data();
      if (axis == Axis::Cols) {
        for (int r = 0; r < rows; ++r) {
          double* dst = ai->grad->data() + static_cast<std::size_t>(r) * ai->cols + begin;
          const double* src = og + static_cast<std::size_t>(r) * cols;
          for (int c = 0; c < cols; ++c) dst[c] += src[c];
        }
      } else {
        double* dst = ai->grad->data() + static_cast<std::size_t>(begin) * ai->cols;
        for (std::size_t i = 0; i < oi->grad->size(); ++i) dst[i] += og[i];
      }
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& a, int rows, int cols) {
  if (rows * cols != a.size()) {
    throw ShapeError("reshape " + a.shape().str() + " to " + Shape{rows, cols}.str() +
                     " changes element count");
  }
  Tensor out = Tensor::from(a.data(), rows, cols, a.requires_grad());
  if (out.requires_grad()) {
    tape.record([ai = a.impl_ptr(), oi = out.impl_ptr()] {
      if (!ai->grad) return;
      const auto& og = *oi->grad;
      for (std::size_t i = 0; i < og.size(); ++i) (*ai->grad)[i] += og[i];
    });
  }
  return out;
}

}  // namespace orgnav
