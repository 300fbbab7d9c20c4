#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "galign/geom.hpp"

namespace galign {

/// Perturbation applied to target scenes of a synthetic domain pair.
enum class Shift { kNone, kDensityDrop, kJitter, kDropoutClass, kRotate };

Shift parse_shift(const std::string& name);  // throws on unknown names
std::string shift_name(Shift s);

struct SynthConfig {
  int n_scenes = 4;
  Shift shift = Shift::kDensityDrop;
  std::uint64_t seed = 1;
  std::size_t points_per_scene = 1200;
  double extent = 15.0;          // scenes span [0, extent]^2 in XY
  double density_keep = 0.3;     // kDensityDrop
  double jitter_sigma = 0.05;    // kJitter, meters
  double class_drop_frac = 0.7;  // kDropoutClass, applied to category 1
};

/// Labeled scenes of 4 categories (ground plane, boxes, cylinders, blobs).
/// Target scenes come from the same generator with independent seeds and the
/// configured shift applied; their labels are retained for evaluation only.
std::pair<std::vector<LabeledCloud>, std::vector<LabeledCloud>>
synth_domain_pair(const SynthConfig& cfg);

}  // namespace galign
