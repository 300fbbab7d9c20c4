#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace galign {

using Shape = std::vector<std::size_t>;

struct TensorData {
  Shape shape;
  std::vector<double> values;
  bool requires_grad = false;
  std::vector<double> grad;  // empty until touched by backward
};

/// Dense row-major tensor of doubles with an optional gradient buffer.
/// Copies are shallow: two Tensors may share the same storage.
class Tensor {
 public:
  Tensor() : d_(std::make_shared<TensorData>()) {}
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);
  explicit Tensor(std::shared_ptr<TensorData> d) : d_(std::move(d)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values, bool requires_grad = false);

  const Shape& shape() const { return d_->shape; }
  std::size_t size() const { return d_->values.size(); }
  std::size_t rank() const { return d_->shape.size(); }
  // 2-D accessors; a rank-1 tensor counts as a single row
  std::size_t rows() const;
  std::size_t cols() const;

  const std::vector<double>& values() const { return d_->values; }
  std::vector<double>& mutable_values() { return d_->values; }
  double at(std::size_t r, std::size_t c) const { return d_->values[r * cols() + c]; }
  double item() const;

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool rg) { d_->requires_grad = rg; }
  bool has_grad() const { return !d_->grad.empty(); }
  const std::vector<double>& grad() const { return d_->grad; }
  std::vector<double>& ensure_grad() const;
  void zero_grad() const;

  /// Value copy with no gradient tracking and no shared storage.
  Tensor detach() const;

  const std::shared_ptr<TensorData>& data() const { return d_; }

 private:
  std::shared_ptr<TensorData> d_;
};

/// Append-only record of differentiable operations. Single-threaded;
/// independent tapes may live on separate threads.
class Tape {
 public:
  void record(std::shared_ptr<TensorData> output, std::function<void()> pull);

  /// Reverse sweep from a scalar loss. Gradients accumulate; the caller
  /// zeroes leaf grads between steps.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    std::shared_ptr<TensorData> output;
    std::function<void()> pull;
  };
  std::vector<Node> nodes_;
};

}  // namespace galign
