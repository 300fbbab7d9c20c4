#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "galign/checkpoint.hpp"
#include "galign/train.hpp"

namespace fs = std::filesystem;
using namespace galign;

namespace {

std::vector<LabeledCloud> load_matching(const std::string& dir,
                                        const std::string& prefix) {
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && e.path().extension() == ".txt")
      paths.push_back(e.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<LabeledCloud> clouds;
  for (const auto& p : paths) clouds.push_back(load_cloud(p));
  if (clouds.empty())
    throw std::invalid_argument("no " + prefix + "*.txt clouds found in " + dir);
  return clouds;
}

RunConfig build_config(const std::string& config_path,
                       const std::vector<std::string>& overrides,
                       const std::optional<std::uint64_t>& seed) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = parse_config_file(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got: " + kv);
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"graph-based local feature alignment for point-cloud UDA"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic domain pair");
  int scenes = 4;
  std::string shift = "density_drop", out_dir = "out";
  std::uint64_t synth_seed = 1;
  std::size_t pts = 1200;
  synth->add_option("--scenes", scenes, "number of scenes per domain");
  synth->add_option("--shift", shift, "none|density_drop|jitter|dropout_class|rotate");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out", out_dir, "output directory");
  synth->add_option("--points-per-scene", pts);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model");
  std::string config_path, data_dir = ".", train_out = "out", init_ckpt;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed_flag;
  train_cmd->add_option("--config", config_path, "key=value config file");
  train_cmd->add_option("--set", overrides, "config override key=value")->take_all();
  train_cmd->add_option("--seed", seed_flag);
  train_cmd->add_option("--data", data_dir, "directory with source_*/target_*.txt");
  train_cmd->add_option("--out", train_out, "output directory");
  std::string stage_flag;
  train_cmd->add_option("--stage", stage_flag, "source_only|adapt|pseudo_label");
  train_cmd->add_option("--init", init_ckpt, "checkpoint to start from (pseudo_label)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_ckpt, eval_data = ".", eval_prefix = "target_", eval_out,
              eval_config;
  std::vector<std::string> eval_overrides;
  std::optional<std::uint64_t> eval_seed;
  eval_cmd->add_option("--checkpoint", eval_ckpt)->required();
  eval_cmd->add_option("--data", eval_data, "directory with labeled clouds");
  eval_cmd->add_option("--prefix", eval_prefix, "cloud filename prefix");
  eval_cmd->add_option("--config", eval_config);
  eval_cmd->add_option("--set", eval_overrides)->take_all();
  eval_cmd->add_option("--seed", eval_seed);
  eval_cmd->add_option("--out", eval_out, "write the JSON report here");

  // pseudo
  auto* pseudo_cmd = app.add_subcommand("pseudo", "export pseudo labels");
  std::string ps_ckpt, ps_data = ".", ps_out = "out", ps_config;
  std::vector<std::string> ps_overrides;
  std::optional<std::uint64_t> ps_seed;
  pseudo_cmd->add_option("--checkpoint", ps_ckpt)->required();
  pseudo_cmd->add_option("--data", ps_data);
  pseudo_cmd->add_option("--config", ps_config);
  pseudo_cmd->add_option("--set", ps_overrides)->take_all();
  pseudo_cmd->add_option("--seed", ps_seed);
  pseudo_cmd->add_option("--out", ps_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  if (synth->parsed()) {
    SynthConfig cfg;
    cfg.n_scenes = scenes;
    cfg.shift = parse_shift(shift);
    cfg.seed = synth_seed;
    cfg.points_per_scene = pts;
    fs::create_directories(out_dir);
    auto [source, target] = synth_domain_pair(cfg);
    for (std::size_t i = 0; i < source.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "source_%03zu.txt", i);
      save_cloud((fs::path(out_dir) / name).string(), source[i]);
      std::snprintf(name, sizeof name, "target_%03zu.txt", i);
      save_cloud((fs::path(out_dir) / name).string(), target[i]);
    }
    std::cout << "wrote " << source.size() << " source + " << target.size()
              << " target clouds to " << out_dir << "\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    RunConfig cfg = build_config(config_path, overrides, seed_flag);
    if (!stage_flag.empty()) cfg.stage = parse_stage(stage_flag);
    auto source = load_matching(data_dir, "source_");
    std::vector<LabeledCloud> target;
    if (cfg.stage != Stage::kSourceOnly) target = load_matching(data_dir, "target_");
    std::optional<NamedParams> init;
    if (!init_ckpt.empty()) init = load_checkpoint(init_ckpt);
    if (cfg.stage == Stage::kPseudoLabel && !init)
      throw std::invalid_argument("train: --stage pseudo_label requires --init");
    fs::create_directories(train_out);
    auto result = train(cfg, source, target, init ? &*init : nullptr);
    save_checkpoint((fs::path(train_out) / "model.ckpt").string(), result.params);
    write_loss_csv((fs::path(train_out) / "losses.csv").string(), result.steps);
    write_config_file((fs::path(train_out) / "config.txt").string(), cfg);
    std::cout << "trained " << result.steps.size() << " steps, checkpoint in "
              << train_out << "\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    RunConfig cfg = build_config(eval_config, eval_overrides, eval_seed);
    auto params = load_checkpoint(eval_ckpt);
    auto clouds = load_matching(eval_data, eval_prefix);
    SegnetConfig net_cfg;
    net_cfg.num_classes = cfg.num_classes;
    auto report = evaluate(params, net_cfg, clouds, cfg.block_xy,
                           cfg.points_per_block, cfg.seed);
    const std::string json = report_to_json(report);
    std::cout << json << "\n";
    if (!eval_out.empty()) {
      std::ofstream os(eval_out, std::ios::trunc);
      os << json << "\n";
      if (!os) throw std::runtime_error("cannot write " + eval_out);
    }
    return 0;
  }

  // pseudo
  RunConfig cfg = build_config(ps_config, ps_overrides, ps_seed);
  auto params = load_checkpoint(ps_ckpt);
  auto clouds = load_matching(ps_data, "target_");
  SegnetConfig net_cfg;
  net_cfg.num_classes = cfg.num_classes;
  fs::create_directories(ps_out);
  for (std::size_t ci = 0; ci < clouds.size(); ++ci) {
    auto& cloud = clouds[ci];
    const auto blocks = sample_blocks(cloud, cfg.block_xy, cfg.points_per_block, cfg.seed);
    std::vector<int> label(cloud.size(), -1);
    std::vector<double> conf(cloud.size(), 0.0);
    for (const auto& b : blocks) {
      const auto pl = generate_pseudo_labels(params, b, net_cfg, cfg.keep_fraction);
      for (std::size_t r = 0; r < b.size(); ++r)
        if (pl.accepted[r]) {
          label[b.source_indices[r]] = pl.labels[r];
          conf[b.source_indices[r]] = pl.confidence[r];
        }
    }
    char name[64];
    std::snprintf(name, sizeof name, "pseudo_%03zu.txt", ci);
    std::ofstream os(fs::path(ps_out) / name, std::ios::trunc);
    os << "#domain target #classes " << cfg.num_classes << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (label[i] < 0) continue;
      os << cloud.points[3 * i] << " " << cloud.points[3 * i + 1] << " "
         << cloud.points[3 * i + 2] << " " << label[i] << " " << conf[i] << "\n";
    }
    if (!os) throw std::runtime_error("cannot write pseudo labels");
  }
  std::cout << "wrote pseudo labels for " << clouds.size() << " clouds to "
            << ps_out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
