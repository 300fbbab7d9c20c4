#pragma once

#include <array>
#include <iosfwd>
#include <optional>

#include "galign/segnet.hpp"

namespace galign {

/// One centroid's four-level bundle of k-NN node matrices. Each node row is
/// the neighbor's vertex feature with its feature-space distance to the
/// centroid appended, so level j rows are width widths[j] + 1. Rows are
/// sorted by ascending edge distance.
struct FeatureGraph {
  std::size_t centroid_block_index = 0;
  std::optional<int> centroid_label;
  std::array<Tensor, 4> levels;

  /// Value copy with no gradient history (bank entries are targets).
  FeatureGraph detach() const;
};

/// ceil(n/64) graphs anchored at FPS centroids over block coordinates.
/// Neighbors are found by exact k-NN in level feature space; a centroid
/// removed by encoder downsampling is represented at deep levels by its
/// nearest surviving level member in coordinate space.
std::vector<FeatureGraph> build_graphs(Tape& tape, const LevelFeatures& feats,
                                       const Block& block,
                                       const std::array<std::size_t, 4>& k_levels);

/// Text record for test fixtures: centroid index, label, per-level matrices.
void dump_graph(std::ostream& os, const FeatureGraph& g);

}  // namespace galign
