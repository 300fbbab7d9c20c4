#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace galign {

enum class Stage { kSourceOnly, kAdapt, kPseudoLabel };

Stage parse_stage(const std::string& name);
std::string stage_name(Stage s);

struct RunConfig {
  std::uint64_t seed = 1;
  int epochs = 10;
  int batch_size = 4;
  double lr0 = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int lr_step = 30;
  double lr_drop = 0.1;
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  double alpha = 0.4;
  std::size_t bank_capacity = 16;
  std::array<std::size_t, 4> k_levels{1, 4, 16, 64};
  double block_xy = 15.0;
  std::size_t points_per_block = 4096;
  double eps_scale = 0.05;
  int sinkhorn_iters = 100;
  double keep_fraction = 0.8;
  Stage stage = Stage::kSourceOnly;
  int num_classes = 4;
  bool stage2_keep_alignment = true;

  void validate() const;  // throws std::invalid_argument on bad values
};

/// Flat key=value file; '#' starts a comment. Unknown keys are rejected.
RunConfig parse_config_file(const std::string& path);
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);
void write_config_file(const std::string& path, const RunConfig& cfg);

}  // namespace galign
