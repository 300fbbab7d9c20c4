#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace galign {

enum class Domain { kSource, kTarget };

struct LabeledCloud {
  std::vector<double> points;          // N x 3 row-major (meters)
  std::vector<int> labels;             // empty when unlabeled, else length N
  Domain domain_tag = Domain::kSource;
  int num_classes = 0;

  std::size_t size() const { return points.size() / 3; }
  bool labeled() const { return !labels.empty(); }
};

struct Block {
  std::vector<double> points;              // n x 3, recentered to cell origin
  std::vector<int> labels;                 // empty when parent is unlabeled
  std::vector<std::size_t> source_indices; // n indices into the parent cloud

  std::size_t size() const { return points.size() / 3; }
};

/// Axis-aligned XY grid of stride block_xy; each non-empty cell yields one
/// block of exactly points_per_block points (resampled with replacement when
/// under-populated, subsampled without replacement when over). Cells are
/// emitted in (cx, cy) order.
std::vector<Block> sample_blocks(const LabeledCloud& cloud, double block_xy,
                                 std::size_t points_per_block,
                                 std::uint64_t rng_seed);

/// Greedy maximin selection of m distinct row indices from an n x d matrix.
/// Ties break toward the lowest index.
std::vector<std::size_t> farthest_point_sample(const std::vector<double>& points,
                                               std::size_t n, std::size_t d,
                                               std::size_t m, std::size_t start);

struct KnnResult {
  std::vector<std::size_t> indices;  // q x k row-major
  std::vector<double> distances;     // q x k, ascending per row
};

/// Exact k-nearest-neighbor search (Euclidean), ties toward the lowest pool
/// index; self-matches allowed.
KnnResult knn(const std::vector<double>& queries, std::size_t q,
              const std::vector<double>& pool, std::size_t n,
              std::size_t d, std::size_t k);

// Cloud text format: header "#domain source|target #classes C", then one
// point per line "x y z [label]". Mixed labeled/unlabeled lines are rejected.
LabeledCloud load_cloud(const std::string& path);
void save_cloud(const std::string& path, const LabeledCloud& cloud);

}  // namespace galign
