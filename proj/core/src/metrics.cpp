#include "galign/metrics.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace galign {

EvalReport report_from_confusion(const std::vector<long long>& confusion,
                                 int num_classes) {
  const auto c = static_cast<std::size_t>(num_classes);
  if (confusion.size() != c * c)
    throw std::invalid_argument("report_from_confusion: confusion must be CxC");
  EvalReport r;
  r.confusion = confusion;
  r.iou.assign(c, 0.0);
  r.defined.assign(c, false);
  double sum = 0;
  int defined = 0;
  for (std::size_t k = 0; k < c; ++k) {
    long long tp = confusion[k * c + k], fp = 0, fn = 0;
    for (std::size_t j = 0; j < c; ++j) {
      if (j == k) continue;
      fn += confusion[k * c + j];
      fp += confusion[j * c + k];
    }
    if (tp + fp + fn == 0) continue;
    r.defined[k] = true;
    r.iou[k] = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    sum += r.iou[k];
    ++defined;
  }
  r.miou = defined ? sum / defined : 0.0;
  return r;
}

double miou_from_ious(const std::vector<double>& ious) {
  if (ious.empty()) throw std::invalid_argument("miou_from_ious: no classes");
  double sum = 0;
  for (double v : ious) sum += v;
  return sum / static_cast<double>(ious.size());
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["iou"] = report.iou;
  j["defined"] = report.defined;
  j["miou"] = report.miou;
  const auto c = report.iou.size();
  std::vector<std::vector<long long>> conf(c, std::vector<long long>(c));
  for (std::size_t a = 0; a < c; ++a)
    for (std::size_t b = 0; b < c; ++b) conf[a][b] = report.confusion[a * c + b];
  j["confusion"] = conf;
  return j.dump(2);
}

EvalReport evaluate(const NamedParams& params, const SegnetConfig& net_cfg,
                    const std::vector<LabeledCloud>& clouds, double block_xy,
                    std::size_t points_per_block, std::uint64_t seed) {
  const int c = net_cfg.num_classes;
  std::vector<long long> confusion(static_cast<std::size_t>(c) * c, 0);
  for (const auto& cloud : clouds) {
    if (!cloud.labeled())
      throw std::invalid_argument("evaluate: clouds must be labeled");
    std::vector<int> pred(cloud.size(), -1);
    const auto blocks = sample_blocks(cloud, block_xy, points_per_block, seed);
    for (const auto& block : blocks) {
      Tape tape;
      const auto feats = extract_features(tape, params, block, net_cfg);
      const Tensor logits = classify(tape, params, feats, block, net_cfg);
      for (std::size_t r = 0; r < block.size(); ++r) {
        const double* row = logits.values().data() + r * logits.cols();
        int arg = 0;
        for (int j = 1; j < c; ++j)
          if (row[j] > row[arg]) arg = j;
        pred[block.source_indices[r]] = arg;
      }
    }
    // points the subsampler skipped inherit their nearest covered neighbor
    std::vector<std::size_t> covered;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (pred[i] >= 0) covered.push_back(i);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] >= 0) continue;
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = covered.front();
      for (auto j : covered) {
        double sq = 0;
        for (int k = 0; k < 3; ++k) {
          const double diff = cloud.points[3 * i + k] - cloud.points[3 * j + k];
          sq += diff * diff;
        }
        if (sq < best) {
          best = sq;
          arg = j;
        }
      }
      pred[i] = pred[arg];
    }
    for (std::size_t i = 0; i < pred.size(); ++i)
      ++confusion[static_cast<std::size_t>(cloud.labels[i]) * c + pred[i]];
  }
  return report_from_confusion(confusion, c);
}

}  // namespace galign
