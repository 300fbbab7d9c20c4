#include "galign/graphs.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace galign {

FeatureGraph FeatureGraph::detach() const {
  FeatureGraph g;
  g.centroid_block_index = centroid_block_index;
  g.centroid_label = centroid_label;
  for (std::size_t j = 0; j < 4; ++j) g.levels[j] = levels[j].detach();
  return g;
}

namespace {

// position within the level list: the centroid itself when it survived the
// downsampling, otherwise its nearest level member in coordinate space
std::size_t representative_position(const Block& block,
                                    const std::vector<std::size_t>& level_idx,
                                    std::size_t centroid) {
  auto it = std::lower_bound(level_idx.begin(), level_idx.end(), centroid);
  if (it != level_idx.end() && *it == centroid)
    return static_cast<std::size_t>(it - level_idx.begin());
  const double* c = block.points.data() + 3 * centroid;
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < level_idx.size(); ++p) {
    const double* q = block.points.data() + 3 * level_idx[p];
    double sq = 0;
    for (int d = 0; d < 3; ++d) sq += (q[d] - c[d]) * (q[d] - c[d]);
    if (sq < best_sq) {
      best_sq = sq;
      best = p;
    }
  }
  return best;
}

}  // namespace

std::vector<FeatureGraph> build_graphs(Tape& tape, const LevelFeatures& feats,
                                       const Block& block,
                                       const std::array<std::size_t, 4>& k_levels) {
  const std::size_t n = block.size();
  for (std::size_t j = 0; j < 4; ++j)
    if (k_levels[j] > feats.point_indices[j].size())
      throw std::invalid_argument("build_graphs: k=" + std::to_string(k_levels[j]) +
                                  " exceeds level " + std::to_string(j + 1) +
                                  " population " +
                                  std::to_string(feats.point_indices[j].size()));

  const std::size_t num_centroids = (n + 63) / 64;
  const auto centroids = farthest_point_sample(block.points, n, 3, num_centroids, 0);

  std::vector<FeatureGraph> graphs;
  graphs.reserve(num_centroids);
  for (auto centroid : centroids) {
    FeatureGraph g;
    g.centroid_block_index = centroid;
    if (!block.labels.empty()) g.centroid_label = block.labels[centroid];
    for (std::size_t j = 0; j < 4; ++j) {
      const auto& level_idx = feats.point_indices[j];
      const Tensor& f = feats.features[j];
      const std::size_t d = f.cols();
      const std::size_t rep = representative_position(block, level_idx, centroid);
      std::vector<double> query(f.values().begin() + rep * d,
                                f.values().begin() + (rep + 1) * d);
      const auto nb = knn(query, 1, f.values(), level_idx.size(), d, k_levels[j]);
      Tensor center = ops::gather_rows(tape, f, std::array<std::size_t, 1>{rep});
      Tensor vertices = ops::gather_rows(tape, f, nb.indices);
      Tensor edges = ops::rowwise_l2(tape, vertices, center);
      std::array<Tensor, 2> parts{vertices, edges};
      g.levels[j] = ops::concat(tape, parts, 1);
    }
    graphs.push_back(std::move(g));
  }
  return graphs;
}

void dump_graph(std::ostream& os, const FeatureGraph& g) {
  os << "graph centroid=" << g.centroid_block_index << " label=";
  if (g.centroid_label)
    os << *g.centroid_label;
  else
    os << "none";
  os << "\n";
  os.precision(17);
  for (std::size_t j = 0; j < 4; ++j) {
    const Tensor& t = g.levels[j];
    os << "level " << j + 1 << " " << t.rows() << " " << t.cols() << "\n";
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (std::size_t c = 0; c < t.cols(); ++c)
        os << (c ? " " : "") << t.at(r, c);
      os << "\n";
    }
  }
}

}  // namespace galign
