#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "galign/tensor.hpp"

namespace galign::ops {

enum class OpKind {
  kMatmul,
  kAdd,
  kRelu,
  kConcat,
  kMeanRows,
  kL1Distance,
  kSquaredDistance,
  kSoftmaxCrossEntropy,
  kGatherRows,
  kScale,
  kRowwiseL2,
};

// All primitives record themselves on the tape when any input requires
// gradients; otherwise they are plain value computations. Shape errors
// throw std::invalid_argument naming the op and the offending extents.

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
// Elementwise; b may also be a single row broadcast over a's rows (bias add).
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor relu(Tape& tape, const Tensor& a);
// axis 0 stacks rows (equal widths), axis 1 joins columns (equal heights).
Tensor concat(Tape& tape, std::span<const Tensor> parts, int axis);
Tensor mean_rows(Tape& tape, const Tensor& a);  // n x d -> 1 x d
// Scalar sum of |a - b|; subgradient at 0 is 0.
Tensor l1_distance(Tape& tape, const Tensor& a, const Tensor& b);
Tensor squared_distance(Tape& tape, const Tensor& a, const Tensor& b);
// Mean over (masked) rows of -log softmax(logits)[label]. Fused log-sum-exp
// with max subtraction. mask, when given, must select at least one row.
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             std::span<const int> labels,
                             const std::vector<std::uint8_t>* mask = nullptr);
Tensor gather_rows(Tape& tape, const Tensor& a, std::span<const std::size_t> rows);
Tensor scale(Tape& tape, const Tensor& a, double s);
// Per-row Euclidean distance to a single center row: k x d, 1 x d -> k x 1.
Tensor rowwise_l2(Tape& tape, const Tensor& a, const Tensor& center);

/// Dispatcher over the primitive set. For kSoftmaxCrossEntropy inputs are
/// (logits, labels[, mask]) with labels/mask as value tensors; for
/// kGatherRows inputs are (a, indices); for kScale (a, scalar s);
/// for kConcat the trailing input is a scalar axis.
Tensor forward_op(Tape& tape, OpKind kind, std::span<const Tensor> inputs);

}  // namespace galign::ops
