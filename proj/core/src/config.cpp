#include "galign/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace galign {

Stage parse_stage(const std::string& name) {
  if (name == "source_only") return Stage::kSourceOnly;
  if (name == "adapt") return Stage::kAdapt;
  if (name == "pseudo_label") return Stage::kPseudoLabel;
  throw std::invalid_argument("unknown stage: " + name);
}

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::kSourceOnly: return "source_only";
    case Stage::kAdapt: return "adapt";
    case Stage::kPseudoLabel: return "pseudo_label";
  }
  return "?";
}

void RunConfig::validate() const {
  auto bad = [](const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
  };
  if (epochs <= 0) bad("epochs must be positive");
  if (batch_size <= 0) bad("batch_size must be positive");
  if (lr0 <= 0) bad("lr0 must be positive");
  if (momentum < 0 || momentum >= 1) bad("momentum must be in [0,1)");
  if (weight_decay < 0) bad("weight_decay must be nonnegative");
  if (lr_step <= 0) bad("lr_step must be positive");
  if (lr_drop <= 0 || lr_drop > 1) bad("lr_drop must be in (0,1]");
  if (alpha < 0) bad("alpha must be nonnegative");
  if (bank_capacity == 0) bad("bank_capacity must be positive");
  for (auto k : k_levels)
    if (k == 0) bad("k_levels entries must be positive");
  if (block_xy <= 0) bad("block_xy must be positive");
  if (points_per_block == 0) bad("points_per_block must be positive");
  if (eps_scale <= 0) bad("eps_scale must be positive");
  if (sinkhorn_iters <= 0) bad("sinkhorn_iters must be positive");
  if (keep_fraction <= 0 || keep_fraction > 1) bad("keep_fraction must be in (0,1]");
  if (num_classes <= 1) bad("num_classes must be at least 2");
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  std::istringstream vs(value);
  auto parse = [&](auto& field) {
    if (!(vs >> field) || !vs.eof())
      throw std::invalid_argument("config: bad value for " + key + ": " + value);
  };
  if (key == "seed") parse(cfg.seed);
  else if (key == "epochs") parse(cfg.epochs);
  else if (key == "batch_size") parse(cfg.batch_size);
  else if (key == "lr0") parse(cfg.lr0);
  else if (key == "momentum") parse(cfg.momentum);
  else if (key == "weight_decay") parse(cfg.weight_decay);
  else if (key == "lr_step") parse(cfg.lr_step);
  else if (key == "lr_drop") parse(cfg.lr_drop);
  else if (key == "lambda1") parse(cfg.lambda1);
  else if (key == "lambda2") parse(cfg.lambda2);
  else if (key == "alpha") parse(cfg.alpha);
  else if (key == "bank_capacity") parse(cfg.bank_capacity);
  else if (key == "k1") parse(cfg.k_levels[0]);
  else if (key == "k2") parse(cfg.k_levels[1]);
  else if (key == "k3") parse(cfg.k_levels[2]);
  else if (key == "k4") parse(cfg.k_levels[3]);
  else if (key == "block_xy") parse(cfg.block_xy);
  else if (key == "points_per_block") parse(cfg.points_per_block);
  else if (key == "eps_scale") parse(cfg.eps_scale);
  else if (key == "sinkhorn_iters") parse(cfg.sinkhorn_iters);
  else if (key == "keep_fraction") parse(cfg.keep_fraction);
  else if (key == "stage") cfg.stage = parse_stage(value);
  else if (key == "num_classes") parse(cfg.num_classes);
  else if (key == "stage2_keep_alignment") {
    int v;
    parse(v);
    cfg.stage2_keep_alignment = v != 0;
  } else {
    throw std::invalid_argument("config: unknown key " + key);
  }
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::string trimmed;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c)) || !trimmed.empty()) trimmed += c;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
      trimmed.pop_back();
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not key=value");
    std::string key = trimmed.substr(0, eq), value = trimmed.substr(eq + 1);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back())))
      key.pop_back();
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.front())))
      value.erase(value.begin());
    apply_override(cfg, key, value);
  }
  return cfg;
}

void write_config_file(const std::string& path, const RunConfig& cfg) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::invalid_argument("config: cannot open " + path + " for writing");
  os.precision(17);
  os << "seed=" << cfg.seed << "\n"
     << "epochs=" << cfg.epochs << "\n"
     << "batch_size=" << cfg.batch_size << "\n"
     << "lr0=" << cfg.lr0 << "\n"
     << "momentum=" << cfg.momentum << "\n"
     << "weight_decay=" << cfg.weight_decay << "\n"
     << "lr_step=" << cfg.lr_step << "\n"
     << "lr_drop=" << cfg.lr_drop << "\n"
     << "lambda1=" << cfg.lambda1 << "\n"
     << "lambda2=" << cfg.lambda2 << "\n"
     << "alpha=" << cfg.alpha << "\n"
     << "bank_capacity=" << cfg.bank_capacity << "\n"
     << "k1=" << cfg.k_levels[0] << "\n"
     << "k2=" << cfg.k_levels[1] << "\n"
     << "k3=" << cfg.k_levels[2] << "\n"
     << "k4=" << cfg.k_levels[3] << "\n"
     << "block_xy=" << cfg.block_xy << "\n"
     << "points_per_block=" << cfg.points_per_block << "\n"
     << "eps_scale=" << cfg.eps_scale << "\n"
     << "sinkhorn_iters=" << cfg.sinkhorn_iters << "\n"
     << "keep_fraction=" << cfg.keep_fraction << "\n"
     << "stage=" << stage_name(cfg.stage) << "\n"
     << "num_classes=" << cfg.num_classes << "\n"
     << "stage2_keep_alignment=" << (cfg.stage2_keep_alignment ? 1 : 0) << "\n";
}

}  // namespace galign
