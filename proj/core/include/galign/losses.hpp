#pragma once

#include "galign/otmatch.hpp"

namespace galign {

struct LossReport {
  double seg = 0, loc = 0, con = 0, total = 0;
  int matched_graph_count = 0;
  int skipped_graph_count = 0;
};

/// Mean over (masked) points of -log softmax(logits)[label].
Tensor seg_loss(Tape& tape, const Tensor& logits, std::span<const int> labels,
                const std::vector<std::uint8_t>* mask = nullptr);

struct AlignmentTerms {
  Tensor loc;  // scalar, 0 when nothing matched
  Tensor con;
  int matched = 0;
  int skipped = 0;
};

/// Matches each target graph against the bank once and assembles both the
/// assignment-matrix local feature loss and the category-guided contrastive
/// loss. Per level the L1 gap is normalized by the node-matrix entry count;
/// assignment matrices and all bank-side features are constants.
AlignmentTerms alignment_losses(Tape& tape,
                                const std::vector<FeatureGraph>& target_graphs,
                                const GraphBank& bank, const MatcherConfig& cfg,
                                double alpha);

/// seg + lambda1*loc + lambda2*con as a single backward-able scalar.
Tensor total_loss(Tape& tape, const Tensor& seg, const Tensor& loc,
                  const Tensor& con, double lambda1, double lambda2);

struct PseudoLabels {
  std::vector<int> labels;          // argmax class per point
  std::vector<double> confidence;   // softmax confidence of the argmax
  std::vector<std::uint8_t> accepted;
};

/// Class-balanced confidence filtering: per predicted class, keep the top
/// keep_fraction most confident points (ties toward the lowest point index).
PseudoLabels generate_pseudo_labels(const NamedParams& params, const Block& block,
                                    const SegnetConfig& cfg, double keep_fraction);

}  // namespace galign
