#include "galign/tensor.hpp"

#include <numeric>
#include <stdexcept>

namespace galign {

static std::size_t shape_product(const Shape& s) {
  std::size_t p = 1;
  for (auto e : s) p *= e;
  return p;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_product(shape) != values.size())
    throw std::invalid_argument("Tensor: shape/value length mismatch");
  d_ = std::make_shared<TensorData>();
  d_->shape = std::move(shape);
  d_->values = std::move(values);
  d_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  std::vector<double> v(shape_product(shape), 0.0);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<double>{v}, requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values, bool requires_grad) {
  return Tensor(Shape{rows, cols}, std::move(values), requires_grad);
}

std::size_t Tensor::rows() const {
  if (d_->shape.size() == 2) return d_->shape[0];
  if (d_->shape.size() == 1) return 1;
  throw std::invalid_argument("Tensor::rows: rank must be 1 or 2");
}

std::size_t Tensor::cols() const {
  if (d_->shape.size() == 2) return d_->shape[1];
  if (d_->shape.size() == 1) return d_->shape[0];
  throw std::invalid_argument("Tensor::cols: rank must be 1 or 2");
}

double Tensor::item() const {
  if (size() != 1) throw std::invalid_argument("Tensor::item: not a scalar");
  return d_->values[0];
}

std::vector<double>& Tensor::ensure_grad() const {
  if (d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0);
  return d_->grad;
}

void Tensor::zero_grad() const {
  d_->grad.assign(d_->values.size(), 0.0);
}

Tensor Tensor::detach() const {
  auto nd = std::make_shared<TensorData>();
  nd->shape = d_->shape;
  nd->values = d_->values;
  nd->requires_grad = false;
  return Tensor(std::move(nd));
}

void Tape::record(std::shared_ptr<TensorData> output, std::function<void()> pull) {
  nodes_.push_back(Node{std::move(output), std::move(pull)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1)
    throw std::invalid_argument("backward: loss must be scalar");
  loss.ensure_grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output->grad.empty()) continue;  // not reachable from loss
    it->pull();
  }
}

}  // namespace galign
