#include "galign/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace galign {

std::vector<Block> sample_blocks(const LabeledCloud& cloud, double block_xy,
                                 std::size_t points_per_block,
                                 std::uint64_t rng_seed) {
  if (cloud.size() == 0) throw std::invalid_argument("sample_blocks: empty cloud");
  if (block_xy <= 0) throw std::invalid_argument("sample_blocks: block_xy must be positive");
  if (points_per_block == 0)
    throw std::invalid_argument("sample_blocks: points_per_block must be positive");

  std::map<std::pair<long long, long long>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const long long cx = static_cast<long long>(std::floor(cloud.points[3 * i] / block_xy));
    const long long cy = static_cast<long long>(std::floor(cloud.points[3 * i + 1] / block_xy));
    cells[{cx, cy}].push_back(i);
  }

  std::mt19937_64 rng(rng_seed);
  std::vector<Block> blocks;
  blocks.reserve(cells.size());
  for (const auto& [cell, members] : cells) {
    std::vector<std::size_t> chosen;
    chosen.reserve(points_per_block);
    if (members.size() >= points_per_block) {
      // partial Fisher-Yates over a copy, without replacement
      std::vector<std::size_t> pool = members;
      for (std::size_t i = 0; i < points_per_block; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        chosen.push_back(pool[i]);
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      for (std::size_t i = 0; i < points_per_block; ++i)
        chosen.push_back(members[pick(rng)]);
    }
    Block b;
    const double ox = static_cast<double>(cell.first) * block_xy;
    const double oy = static_cast<double>(cell.second) * block_xy;
    b.points.reserve(3 * chosen.size());
    for (auto idx : chosen) {
      b.points.push_back(cloud.points[3 * idx] - ox);
      b.points.push_back(cloud.points[3 * idx + 1] - oy);
      b.points.push_back(cloud.points[3 * idx + 2]);
      if (cloud.labeled()) b.labels.push_back(cloud.labels[idx]);
      b.source_indices.push_back(idx);
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<std::size_t> farthest_point_sample(const std::vector<double>& points,
                                               std::size_t n, std::size_t d,
                                               std::size_t m, std::size_t start) {
  if (m > n) throw std::invalid_argument("farthest_point_sample: m > n");
  if (start >= n) throw std::invalid_argument("farthest_point_sample: start out of range");
  std::vector<std::size_t> picks;
  picks.reserve(m);
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  std::size_t cur = start;
  for (std::size_t it = 0; it < m; ++it) {
    picks.push_back(cur);
    const double* p = points.data() + cur * d;
    std::size_t best = 0;
    double best_sq = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = points[i * d + c] - p[c];
        sq += diff * diff;
      }
      if (sq < min_sq[i]) min_sq[i] = sq;
      if (min_sq[i] > best_sq) {
        best_sq = min_sq[i];
        best = i;
      }
    }
    cur = best;
  }
  return picks;
}

KnnResult knn(const std::vector<double>& queries, std::size_t q,
              const std::vector<double>& pool, std::size_t n,
              std::size_t d, std::size_t k) {
  if (k == 0 || k > n) throw std::invalid_argument("knn: need 0 < k <= pool size");
  KnnResult res;
  res.indices.resize(q * k);
  res.distances.resize(q * k);
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t qi = 0; qi < q; ++qi) {
    const double* qp = queries.data() + qi * d;
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = pool[i * d + c] - qp[c];
        sq += diff * diff;
      }
      dist[i] = {sq, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                      dist.end());
    for (std::size_t j = 0; j < k; ++j) {
      res.indices[qi * k + j] = dist[j].second;
      res.distances[qi * k + j] = std::sqrt(dist[j].first);
    }
  }
  return res;
}

}  // namespace galign
