#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "galign/geom.hpp"
#include "galign/ops.hpp"
#include "galign/optim.hpp"
#include "galign/tensor.hpp"

namespace galign {

/// Simplified hierarchical point segmentation network: a 4-level point-MLP
/// encoder with mean-neighbor aggregation, per-level decoder MLPs with
/// nearest-centroid upsampling, and a linear classifier head.
struct SegnetConfig {
  std::array<std::size_t, 4> widths{16, 32, 64, 64};
  int num_classes = 4;
  std::size_t agg_neighbors = 8;  // coordinate-space k for neighbor pooling
};

struct LevelFeatures {
  // per level j: block-point indices present at that level (ascending) and
  // their features, |indices| x widths[j]. Level 0 covers all block points;
  // deeper levels are FPS-nested subsets.
  std::array<std::vector<std::size_t>, 4> point_indices;
  std::array<Tensor, 4> features;
};

/// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] init, seeded. Parameter names:
/// "enc.1.w".."enc.4.b", "dec.1.w".."dec.4.b", "cls.w", "cls.b".
NamedParams init_segnet_params(const SegnetConfig& cfg, std::uint64_t seed);

LevelFeatures extract_features(Tape& tape, const NamedParams& params,
                               const Block& block, const SegnetConfig& cfg);

/// Raw per-point logits, block-size x num_classes.
Tensor classify(Tape& tape, const NamedParams& params, const LevelFeatures& feats,
                const Block& block, const SegnetConfig& cfg);

}  // namespace galign
