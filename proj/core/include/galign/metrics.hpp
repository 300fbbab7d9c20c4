#pragma once

#include <string>
#include <vector>

#include "galign/segnet.hpp"

namespace galign {

struct EvalReport {
  std::vector<double> iou;       // per class, meaningful where defined[c]
  std::vector<bool> defined;     // false when TP+FP+FN == 0
  double miou = 0;               // mean over defined classes
  std::vector<long long> confusion;  // C x C row-major, rows = ground truth

  long long confusion_at(int truth, int pred, int c) const {
    return confusion[truth * c + pred];
  }
};

EvalReport report_from_confusion(const std::vector<long long>& confusion,
                                 int num_classes);

/// Mean of already-computed per-class IoUs (benchmark-table aggregation).
double miou_from_ious(const std::vector<double>& ious);

std::string report_to_json(const EvalReport& report);

/// Deterministic block-sampled evaluation: predict per block, scatter argmax
/// back through source_indices (last writer wins), accumulate the confusion
/// over all original points. Uncovered points inherit the prediction of their
/// nearest covered neighbor.
EvalReport evaluate(const NamedParams& params, const SegnetConfig& net_cfg,
                    const std::vector<LabeledCloud>& clouds, double block_xy,
                    std::size_t points_per_block, std::uint64_t seed);

}  // namespace galign
