#include "galign/segnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace galign {

namespace {

Tensor uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in,
                    std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = dist(rng);
  return Tensor::matrix(rows, cols, std::move(v), true);
}

std::vector<double> level_coords(const Block& block,
                                 const std::vector<std::size_t>& indices) {
  std::vector<double> out;
  out.reserve(indices.size() * 3);
  for (auto i : indices)
    out.insert(out.end(), block.points.begin() + 3 * static_cast<std::ptrdiff_t>(i),
               block.points.begin() + 3 * static_cast<std::ptrdiff_t>(i) + 3);
  return out;
}

Tensor linear_relu(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
  return ops::relu(tape, ops::add(tape, ops::matmul(tape, x, w), b));
}

}  // namespace

NamedParams init_segnet_params(const SegnetConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NamedParams p;
  std::size_t in = 3;
  for (std::size_t j = 0; j < 4; ++j) {
    const std::size_t out = cfg.widths[j];
    p.add("enc." + std::to_string(j + 1) + ".w", uniform_init(in, out, in, rng));
    p.add("enc." + std::to_string(j + 1) + ".b", uniform_init(1, out, in, rng));
    in = 2 * out;  // next level sees own feature ++ neighbor mean
  }
  std::size_t total = 0;
  for (std::size_t j = 0; j < 4; ++j) {
    const std::size_t d = cfg.widths[j];
    p.add("dec." + std::to_string(j + 1) + ".w", uniform_init(d, d, d, rng));
    p.add("dec." + std::to_string(j + 1) + ".b", uniform_init(1, d, d, rng));
    total += d;
  }
  p.add("cls.w", uniform_init(total, static_cast<std::size_t>(cfg.num_classes), total, rng));
  p.add("cls.b", uniform_init(1, static_cast<std::size_t>(cfg.num_classes), total, rng));
  return p;
}

LevelFeatures extract_features(Tape& tape, const NamedParams& params,
                               const Block& block, const SegnetConfig& cfg) {
  const std::size_t n = block.size();
  if (n == 0) throw std::invalid_argument("extract_features: empty block");

  LevelFeatures feats;
  Tensor coords = Tensor::matrix(n, 3, block.points);

  feats.point_indices[0].resize(n);
  for (std::size_t i = 0; i < n; ++i) feats.point_indices[0][i] = i;
  feats.features[0] = linear_relu(tape, coords, *params.find("enc.1.w"),
                                  *params.find("enc.1.b"));

  for (std::size_t j = 0; j < 3; ++j) {
    const auto& idx = feats.point_indices[j];
    const std::size_t nj = idx.size();
    const std::size_t m = (nj + 3) / 4;  // 4x downsample, rounded up
    const auto pts = level_coords(block, idx);
    auto picks = farthest_point_sample(pts, nj, 3, m, 0);
    std::sort(picks.begin(), picks.end());

    const std::size_t k = std::min(cfg.agg_neighbors, nj);
    std::vector<double> queries;
    queries.reserve(m * 3);
    for (auto p : picks)
      queries.insert(queries.end(), pts.begin() + 3 * static_cast<std::ptrdiff_t>(p),
                     pts.begin() + 3 * static_cast<std::ptrdiff_t>(p) + 3);
    const auto nb = knn(queries, m, pts, nj, 3, k);

    // constant averaging matrix: row per kept point, 1/k at its neighbors
    std::vector<double> avg(m * nj, 0.0);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < k; ++c)
        avg[r * nj + nb.indices[r * k + c]] += 1.0 / static_cast<double>(k);
    Tensor avg_t = Tensor::matrix(m, nj, std::move(avg));

    Tensor own = ops::gather_rows(tape, feats.features[j], picks);
    Tensor neigh = ops::matmul(tape, avg_t, feats.features[j]);
    std::array<Tensor, 2> parts{own, neigh};
    Tensor input = ops::concat(tape, parts, 1);
    const std::string lvl = std::to_string(j + 2);
    feats.features[j + 1] = linear_relu(tape, input, *params.find("enc." + lvl + ".w"),
                                        *params.find("enc." + lvl + ".b"));
    feats.point_indices[j + 1].reserve(m);
    for (auto p : picks) feats.point_indices[j + 1].push_back(idx[p]);
  }
  return feats;
}

Tensor classify(Tape& tape, const NamedParams& params, const LevelFeatures& feats,
                const Block& block, const SegnetConfig& cfg) {
  const std::size_t n = block.size();
  std::vector<Tensor> upsampled;
  upsampled.reserve(4);
  for (std::size_t j = 0; j < 4; ++j) {
    const std::string lvl = std::to_string(j + 1);
    Tensor dec = linear_relu(tape, feats.features[j],
                             *params.find("dec." + lvl + ".w"),
                             *params.find("dec." + lvl + ".b"));
    if (j == 0) {
      upsampled.push_back(dec);
      continue;
    }
    const auto pts = level_coords(block, feats.point_indices[j]);
    const auto near = knn(block.points, n, pts, feats.point_indices[j].size(), 3, 1);
    upsampled.push_back(ops::gather_rows(tape, dec, near.indices));
  }
  Tensor cat = ops::concat(tape, upsampled, 1);
  return ops::add(tape, ops::matmul(tape, cat, *params.find("cls.w")),
                  *params.find("cls.b"));
}

}  // namespace galign
