#include "galign/ops.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace galign::ops {

namespace {

using MatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                              Eigen::Dynamic, Eigen::RowMajor>>;
using MutMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic,
                                        Eigen::Dynamic, Eigen::RowMajor>>;

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  std::ostringstream os;
  os << op << ": " << detail;
  throw std::invalid_argument(os.str());
}

std::string shape_str(const Tensor& t) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < t.shape().size(); ++i)
    os << (i ? "x" : "") << t.shape()[i];
  os << ")";
  return os.str();
}

bool any_rg(std::initializer_list<Tensor> ts) {
  for (const auto& t : ts)
    if (t.requires_grad()) return true;
  return false;
}

Tensor finish(Tape& tape, Tensor out, std::initializer_list<Tensor> ins,
              std::function<void()> pull) {
  if (any_rg(ins)) {
    out.set_requires_grad(true);
    tape.record(out.data(), std::move(pull));
  }
  return out;
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
  if (k != k2)
    shape_error("matmul", "inner extents differ: " + shape_str(a) + " vs " + shape_str(b));
  Tensor out = Tensor::zeros({m, n});
  MatMap A(a.values().data(), m, k), B(b.values().data(), k, n);
  MutMap C(out.mutable_values().data(), m, n);
  C = A * B;
  return finish(tape, out, {a, b}, [a, b, out, m, k, n]() {
    MatMap G(out.grad().data(), m, n);
    if (a.requires_grad()) {
      MatMap B2(b.values().data(), k, n);
      MutMap GA(a.ensure_grad().data(), m, k);
      GA += G * B2.transpose();
    }
    if (b.requires_grad()) {
      MatMap A2(a.values().data(), m, k);
      MutMap GB(b.ensure_grad().data(), k, n);
      GB += A2.transpose() * G;
    }
  });
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  const bool broadcast = a.shape() != b.shape();
  if (broadcast && !(b.rows() == 1 && b.cols() == a.cols()))
    shape_error("add", "shapes " + shape_str(a) + " and " + shape_str(b) + " do not conform");
  Tensor out(a.shape(), a.values());
  auto& v = out.mutable_values();
  const std::size_t d = a.cols();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] += broadcast ? b.values()[i % d] : b.values()[i];
  return finish(tape, out, {a, b}, [a, b, out, broadcast, d]() {
    const auto& g = out.grad();
    if (a.requires_grad()) {
      auto& ga = a.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        gb[broadcast ? i % d : i] += g[i];
    }
  });
}

Tensor relu(Tape& tape, const Tensor& a) {
  Tensor out(a.shape(), a.values());
  for (auto& v : out.mutable_values())
    if (v < 0) v = 0;
  return finish(tape, out, {a}, [a, out]() {
    auto& ga = a.ensure_grad();
    const auto& g = out.grad();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (a.values()[i] > 0) ga[i] += g[i];
  });
}

Tensor concat(Tape& tape, std::span<const Tensor> parts, int axis) {
  if (parts.empty()) shape_error("concat", "no inputs");
  if (axis != 0 && axis != 1) shape_error("concat", "axis must be 0 or 1");
  std::size_t rows = 0, cols = 0;
  if (axis == 0) {
    cols = parts[0].cols();
    for (const auto& p : parts) {
      if (p.cols() != cols)
        shape_error("concat", "width mismatch: " + shape_str(parts[0]) + " vs " + shape_str(p));
      rows += p.rows();
    }
  } else {
    rows = parts[0].rows();
    for (const auto& p : parts) {
      if (p.rows() != rows)
        shape_error("concat", "height mismatch: " + shape_str(parts[0]) + " vs " + shape_str(p));
      cols += p.cols();
    }
  }
  Tensor out = Tensor::zeros({rows, cols});
  auto& v = out.mutable_values();
  std::size_t off = 0;
  for (const auto& p : parts) {
    if (axis == 0) {
      std::copy(p.values().begin(), p.values().end(), v.begin() + off * cols);
      off += p.rows();
    } else {
      for (std::size_t r = 0; r < rows; ++r)
        std::copy(p.values().begin() + r * p.cols(),
                  p.values().begin() + (r + 1) * p.cols(),
                  v.begin() + r * cols + off);
      off += p.cols();
    }
  }
  std::vector<Tensor> held(parts.begin(), parts.end());
  bool rg = false;
  for (const auto& p : held) rg = rg || p.requires_grad();
  if (!rg) return out;
  out.set_requires_grad(true);
  tape.record(out.data(), [held, out, axis, rows, cols]() {
    const auto& g = out.grad();
    std::size_t off = 0;
    for (const auto& p : held) {
      if (p.requires_grad()) {
        auto& gp = p.ensure_grad();
        if (axis == 0) {
          for (std::size_t i = 0; i < p.size(); ++i) gp[i] += g[off * cols + i];
        } else {
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < p.cols(); ++c)
              gp[r * p.cols() + c] += g[r * cols + off + c];
        }
      }
      off += (axis == 0) ? p.rows() : p.cols();
    }
  });
  return out;
}

Tensor mean_rows(Tape& tape, const Tensor& a) {
  const std::size_t n = a.rows(), d = a.cols();
  Tensor out = Tensor::zeros({1, d});
  auto& v = out.mutable_values();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) v[c] += a.values()[r * d + c];
  for (auto& x : v) x /= static_cast<double>(n);
  return finish(tape, out, {a}, [a, out, n, d]() {
    auto& ga = a.ensure_grad();
    const auto& g = out.grad();
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c)
        ga[r * d + c] += g[c] / static_cast<double>(n);
  });
}

Tensor l1_distance(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    shape_error("l1_distance", "shapes differ: " + shape_str(a) + " vs " + shape_str(b));
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::abs(a.values()[i] - b.values()[i]);
  Tensor out = Tensor::scalar(s);
  return finish(tape, out, {a, b}, [a, b, out]() {
    const double g = out.grad()[0];
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double diff = a.values()[i] - b.values()[i];
      const double sg = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
      if (a.requires_grad()) a.ensure_grad()[i] += g * sg;
      if (b.requires_grad()) b.ensure_grad()[i] -= g * sg;
    }
  });
}

Tensor squared_distance(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    shape_error("squared_distance", "shapes differ: " + shape_str(a) + " vs " + shape_str(b));
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a.values()[i] - b.values()[i];
    s += diff * diff;
  }
  Tensor out = Tensor::scalar(s);
  return finish(tape, out, {a, b}, [a, b, out]() {
    const double g = out.grad()[0];
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double diff = a.values()[i] - b.values()[i];
      if (a.requires_grad()) a.ensure_grad()[i] += 2.0 * g * diff;
      if (b.requires_grad()) b.ensure_grad()[i] -= 2.0 * g * diff;
    }
  });
}

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits,
                             std::span<const int> labels,
                             const std::vector<std::uint8_t>* mask) {
  const std::size_t n = logits.rows(), c = logits.cols();
  if (labels.size() != n)
    shape_error("softmax_cross_entropy", "label count != logit rows");
  if (mask && mask->size() != n)
    shape_error("softmax_cross_entropy", "mask length != logit rows");
  std::size_t active = 0;
  double total = 0;
  std::vector<double> lse(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    if (mask && !(*mask)[r]) continue;
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= c)
      shape_error("softmax_cross_entropy", "label out of range");
    const double* row = logits.values().data() + r * c;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double s = 0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(row[j] - mx);
    lse[r] = mx + std::log(s);
    total += lse[r] - row[labels[r]];
    ++active;
  }
  if (active == 0)
    shape_error("softmax_cross_entropy", "mask selects no rows");
  Tensor out = Tensor::scalar(total / static_cast<double>(active));
  std::vector<int> lab(labels.begin(), labels.end());
  std::vector<std::uint8_t> msk = mask ? *mask : std::vector<std::uint8_t>();
  return finish(tape, out, {logits},
                [logits, out, lab, msk, lse, n, c, active]() {
    const double g = out.grad()[0] / static_cast<double>(active);
    auto& gl = logits.ensure_grad();
    for (std::size_t r = 0; r < n; ++r) {
      if (!msk.empty() && !msk[r]) continue;
      const double* row = logits.values().data() + r * c;
      for (std::size_t j = 0; j < c; ++j) {
        double p = std::exp(row[j] - lse[r]);
        gl[r * c + j] += g * (p - (static_cast<int>(j) == lab[r] ? 1.0 : 0.0));
      }
    }
  });
}

Tensor gather_rows(Tape& tape, const Tensor& a, std::span<const std::size_t> rows) {
  const std::size_t n = a.rows(), d = a.cols();
  for (auto r : rows)
    if (r >= n) shape_error("gather_rows", "row index out of range");
  Tensor out = Tensor::zeros({rows.size(), d});
  auto& v = out.mutable_values();
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(a.values().begin() + rows[i] * d,
              a.values().begin() + (rows[i] + 1) * d, v.begin() + i * d);
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return finish(tape, out, {a}, [a, out, idx, d]() {
    auto& ga = a.ensure_grad();
    const auto& g = out.grad();
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t c = 0; c < d; ++c)
        ga[idx[i] * d + c] += g[i * d + c];
  });
}

Tensor scale(Tape& tape, const Tensor& a, double s) {
  Tensor out(a.shape(), a.values());
  for (auto& v : out.mutable_values()) v *= s;
  return finish(tape, out, {a}, [a, out, s]() {
    auto& ga = a.ensure_grad();
    const auto& g = out.grad();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Tensor rowwise_l2(Tape& tape, const Tensor& a, const Tensor& center) {
  const std::size_t k = a.rows(), d = a.cols();
  if (center.rows() != 1 || center.cols() != d)
    shape_error("rowwise_l2", "center must be 1x" + std::to_string(d) +
                              ", got " + shape_str(center));
  Tensor out = Tensor::zeros({k, 1});
  auto& v = out.mutable_values();
  for (std::size_t r = 0; r < k; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const double diff = a.values()[r * d + c] - center.values()[c];
      s += diff * diff;
    }
    v[r] = std::sqrt(s);
  }
  return finish(tape, out, {a, center}, [a, center, out, k, d]() {
    const auto& g = out.grad();
    for (std::size_t r = 0; r < k; ++r) {
      const double e = out.values()[r];
      if (e <= 0) continue;  // subgradient 0 at coincident points
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = a.values()[r * d + c] - center.values()[c];
        const double gr = g[r] * diff / e;
        if (a.requires_grad()) a.ensure_grad()[r * d + c] += gr;
        if (center.requires_grad()) center.ensure_grad()[c] -= gr;
      }
    }
  });
}

Tensor forward_op(Tape& tape, OpKind kind, std::span<const Tensor> in) {
  auto need = [&](std::size_t n) {
    if (in.size() != n) shape_error("forward_op", "wrong input count");
  };
  switch (kind) {
    case OpKind::kMatmul: need(2); return matmul(tape, in[0], in[1]);
    case OpKind::kAdd: need(2); return add(tape, in[0], in[1]);
    case OpKind::kRelu: need(1); return relu(tape, in[0]);
    case OpKind::kConcat: {
      if (in.size() < 2) shape_error("forward_op", "concat needs parts + axis");
      std::vector<Tensor> parts(in.begin(), in.end() - 1);
      return concat(tape, parts, static_cast<int>(in.back().item()));
    }
    case OpKind::kMeanRows: need(1); return mean_rows(tape, in[0]);
    case OpKind::kL1Distance: need(2); return l1_distance(tape, in[0], in[1]);
    case OpKind::kSquaredDistance: need(2); return squared_distance(tape, in[0], in[1]);
    case OpKind::kSoftmaxCrossEntropy: {
      if (in.size() != 2 && in.size() != 3)
        shape_error("forward_op", "softmax_cross_entropy takes 2 or 3 inputs");
      std::vector<int> labels(in[1].size());
      for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = static_cast<int>(in[1].values()[i]);
      if (in.size() == 2) return softmax_cross_entropy(tape, in[0], labels);
      std::vector<std::uint8_t> mask(in[2].size());
      for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = in[2].values()[i] != 0.0;
      return softmax_cross_entropy(tape, in[0], labels, &mask);
    }
    case OpKind::kGatherRows: {
      need(2);
      std::vector<std::size_t> idx(in[1].size());
      for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = static_cast<std::size_t>(in[1].values()[i]);
      return gather_rows(tape, in[0], idx);
    }
    case OpKind::kScale: need(2); return scale(tape, in[0], in[1].item());
    case OpKind::kRowwiseL2: need(2); return rowwise_l2(tape, in[0], in[1]);
  }
  shape_error("forward_op", "unknown op kind");
}

}  // namespace galign::ops
