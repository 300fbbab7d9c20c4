#include "galign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace galign {

Shift parse_shift(const std::string& name) {
  if (name == "none") return Shift::kNone;
  if (name == "density_drop") return Shift::kDensityDrop;
  if (name == "jitter") return Shift::kJitter;
  if (name == "dropout_class") return Shift::kDropoutClass;
  if (name == "rotate") return Shift::kRotate;
  throw std::invalid_argument("unknown shift: " + name);
}

std::string shift_name(Shift s) {
  switch (s) {
    case Shift::kNone: return "none";
    case Shift::kDensityDrop: return "density_drop";
    case Shift::kJitter: return "jitter";
    case Shift::kDropoutClass: return "dropout_class";
    case Shift::kRotate: return "rotate";
  }
  return "?";
}

namespace {

void push_point(LabeledCloud& c, double x, double y, double z, int label) {
  c.points.insert(c.points.end(), {x, y, z});
  c.labels.push_back(label);
}

LabeledCloud make_scene(const SynthConfig& cfg, std::mt19937_64& rng) {
  LabeledCloud cloud;
  cloud.num_classes = 4;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double e = cfg.extent;
  const auto n = cfg.points_per_scene;

  // category 0: ground plane
  for (std::size_t i = 0; i < n * 2 / 5; ++i)
    push_point(cloud, uni(rng) * e, uni(rng) * e, gauss(rng) * 0.02, 0);

  // category 1: box clusters (surface points)
  for (int b = 0; b < 2; ++b) {
    const double cx = 1.0 + uni(rng) * (e - 2.0), cy = 1.0 + uni(rng) * (e - 2.0);
    const double sx = 0.8 + uni(rng), sy = 0.8 + uni(rng), h = 1.0 + 2.0 * uni(rng);
    for (std::size_t i = 0; i < n / 8; ++i) {
      const int face = static_cast<int>(uni(rng) * 5.0);
      double x = cx + (uni(rng) - 0.5) * sx;
      double y = cy + (uni(rng) - 0.5) * sy;
      double z = uni(rng) * h;
      if (face == 0) z = h;               // top
      else if (face == 1) x = cx - sx / 2; // sides
      else if (face == 2) x = cx + sx / 2;
      else if (face == 3) y = cy - sy / 2;
      else y = cy + sy / 2;
      push_point(cloud, x, y, z, 1);
    }
  }

  // category 2: vertical cylinder shells
  for (int cy2 = 0; cy2 < 2; ++cy2) {
    const double cx = 1.0 + uni(rng) * (e - 2.0), cyy = 1.0 + uni(rng) * (e - 2.0);
    const double r = 0.2 + 0.3 * uni(rng), h = 2.0 + 2.0 * uni(rng);
    for (std::size_t i = 0; i < n / 10; ++i) {
      const double theta = uni(rng) * 2.0 * std::numbers::pi;
      push_point(cloud, cx + r * std::cos(theta), cyy + r * std::sin(theta),
                 uni(rng) * h, 2);
    }
  }

  // category 3: scattered elevated blobs
  for (int b = 0; b < 3; ++b) {
    const double cx = 1.0 + uni(rng) * (e - 2.0), cyy = 1.0 + uni(rng) * (e - 2.0);
    const double cz = 1.0 + uni(rng), s = 0.3 + 0.3 * uni(rng);
    for (std::size_t i = 0; i < n / 20; ++i)
      push_point(cloud, cx + gauss(rng) * s, cyy + gauss(rng) * s,
                 cz + gauss(rng) * s, 3);
  }
  return cloud;
}

void apply_shift(LabeledCloud& cloud, const SynthConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  switch (cfg.shift) {
    case Shift::kNone:
      break;
    case Shift::kDensityDrop: {
      const auto keep = static_cast<std::size_t>(
          std::ceil(cfg.density_keep * static_cast<double>(cloud.size())));
      // uniform subset without replacement, order preserved
      std::vector<std::size_t> idx(cloud.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (std::size_t i = 0; i < keep; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
      }
      idx.resize(keep);
      std::sort(idx.begin(), idx.end());
      LabeledCloud kept;
      kept.num_classes = cloud.num_classes;
      for (auto i : idx)
        push_point(kept, cloud.points[3 * i], cloud.points[3 * i + 1],
                   cloud.points[3 * i + 2], cloud.labels[i]);
      cloud.points = std::move(kept.points);
      cloud.labels = std::move(kept.labels);
      break;
    }
    case Shift::kJitter:
      for (auto& v : cloud.points) v += gauss(rng) * cfg.jitter_sigma;
      break;
    case Shift::kDropoutClass: {
      LabeledCloud kept;
      kept.num_classes = cloud.num_classes;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.labels[i] == 1 && uni(rng) < cfg.class_drop_frac) continue;
        push_point(kept, cloud.points[3 * i], cloud.points[3 * i + 1],
                   cloud.points[3 * i + 2], cloud.labels[i]);
      }
      cloud.points = std::move(kept.points);
      cloud.labels = std::move(kept.labels);
      break;
    }
    case Shift::kRotate: {
      const double theta = uni(rng) * 2.0 * std::numbers::pi;
      const double cx = cfg.extent / 2, cy = cfg.extent / 2;
      const double c = std::cos(theta), s = std::sin(theta);
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double x = cloud.points[3 * i] - cx, y = cloud.points[3 * i + 1] - cy;
        cloud.points[3 * i] = cx + c * x - s * y;
        cloud.points[3 * i + 1] = cy + s * x + c * y;
      }
      break;
    }
  }
}

}  // namespace

std::pair<std::vector<LabeledCloud>, std::vector<LabeledCloud>>
synth_domain_pair(const SynthConfig& cfg) {
  if (cfg.n_scenes < 1)
    throw std::invalid_argument("synth_domain_pair: n_scenes must be >= 1");
  std::mt19937_64 src_rng(cfg.seed);
  std::mt19937_64 tgt_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<LabeledCloud> source, target;
  for (int i = 0; i < cfg.n_scenes; ++i) {
    auto s = make_scene(cfg, src_rng);
    s.domain_tag = Domain::kSource;
    source.push_back(std::move(s));
    auto t = make_scene(cfg, tgt_rng);
    t.domain_tag = Domain::kTarget;
    apply_shift(t, cfg, tgt_rng);
    target.push_back(std::move(t));
  }
  return {std::move(source), std::move(target)};
}

}  // namespace galign
