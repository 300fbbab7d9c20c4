#include "galign/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace galign {

namespace {

NamedParams copy_params(const NamedParams& src) {
  NamedParams out;
  for (const auto& [name, t] : src.items) {
    Tensor c = t.detach();
    c.set_requires_grad(true);
    out.add(name, c);
  }
  return out;
}

std::vector<Block> collect_blocks(const std::vector<LabeledCloud>& clouds,
                                  const RunConfig& cfg, std::uint64_t salt) {
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    auto b = sample_blocks(clouds[i], cfg.block_xy, cfg.points_per_block,
                           cfg.seed ^ (salt + i * 0x9e3779b97f4a7c15ULL));
    for (auto& blk : b) blocks.push_back(std::move(blk));
  }
  return blocks;
}

void check_k_levels(const RunConfig& cfg) {
  std::size_t pop = cfg.points_per_block;
  for (std::size_t j = 0; j < 4; ++j) {
    if (cfg.k_levels[j] > pop)
      throw std::invalid_argument(
          "config: k" + std::to_string(j + 1) + "=" + std::to_string(cfg.k_levels[j]) +
          " exceeds level population " + std::to_string(pop) + " at points_per_block " +
          std::to_string(cfg.points_per_block));
    pop = (pop + 3) / 4;
  }
}

}  // namespace

TrainResult train(const RunConfig& cfg, const std::vector<LabeledCloud>& source,
                  const std::vector<LabeledCloud>& target,
                  const NamedParams* init_params) {
  cfg.validate();
  check_k_levels(cfg);
  if (source.empty()) throw std::invalid_argument("train: no source clouds");
  for (const auto& c : source)
    if (!c.labeled())
      throw std::invalid_argument("train: source clouds must carry labels");
  const bool adapt = cfg.stage != Stage::kSourceOnly;
  const bool pseudo = cfg.stage == Stage::kPseudoLabel;
  if (adapt && target.empty())
    throw std::invalid_argument("train: stage " + stage_name(cfg.stage) +
                                " needs target clouds");
  if (pseudo && !init_params)
    throw std::invalid_argument("train: stage pseudo_label needs a prior adapt checkpoint");

  SegnetConfig net_cfg;
  net_cfg.num_classes = cfg.num_classes;
  const MatcherConfig matcher{0.0, cfg.eps_scale, cfg.sinkhorn_iters};
  const bool align = cfg.stage == Stage::kAdapt || (pseudo && cfg.stage2_keep_alignment);
  const double l1w = align ? cfg.lambda1 : 0.0;
  const double l2w = align ? cfg.lambda2 : 0.0;

  // target labels never reach the training path
  std::vector<LabeledCloud> target_unlabeled = target;
  for (auto& c : target_unlabeled) c.labels.clear();

  auto source_blocks = collect_blocks(source, cfg, 0x51ULL);
  std::vector<Block> target_blocks;
  if (adapt) target_blocks = collect_blocks(target_unlabeled, cfg, 0x71ULL);

  TrainResult result;
  result.params = init_params ? copy_params(*init_params)
                              : init_segnet_params(net_cfg, cfg.seed);

  // stage 2: label target blocks once with the frozen incoming model
  std::vector<PseudoLabels> pseudo_labels;
  if (pseudo) {
    pseudo_labels.reserve(target_blocks.size());
    for (const auto& b : target_blocks)
      pseudo_labels.push_back(
          generate_pseudo_labels(result.params, b, net_cfg, cfg.keep_fraction));
  }

  GraphBank bank(cfg.num_classes, cfg.bank_capacity);
  OptimState state;
  state.momentum = cfg.momentum;
  state.weight_decay = cfg.weight_decay;
  state.step_size = cfg.lr_step;
  state.drop_factor = cfg.lr_drop;

  std::mt19937_64 order_rng(cfg.seed ^ 0xabcdef12345ULL);
  std::vector<std::size_t> order(source_blocks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  int step = 0;
  std::size_t tgt_pos = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    state.lr = scheduled_lr(cfg.lr0, cfg.lr_drop, cfg.lr_step, epoch);
    std::shuffle(order.begin(), order.end(), order_rng);
    for (std::size_t pos = 0; pos < order.size();) {
      result.params.zero_grads();
      LossReport log{};
      const std::size_t batch =
          std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                order.size() - pos);
      for (std::size_t b = 0; b < batch; ++b, ++pos) {
        const Block& sblock = source_blocks[order[pos]];
        Tape tape;
        const auto sfeats = extract_features(tape, result.params, sblock, net_cfg);
        const Tensor slogits = classify(tape, result.params, sfeats, sblock, net_cfg);
        Tensor seg = seg_loss(tape, slogits, sblock.labels);

        AlignmentTerms terms;
        terms.loc = Tensor::scalar(0.0);
        terms.con = Tensor::scalar(0.0);
        if (align) {
          for (const auto& g : build_graphs(tape, sfeats, sblock, cfg.k_levels))
            bank.insert(g);
          const Block& tblock = target_blocks[tgt_pos % target_blocks.size()];
          const auto tfeats = extract_features(tape, result.params, tblock, net_cfg);
          const auto tgraphs = build_graphs(tape, tfeats, tblock, cfg.k_levels);
          terms = alignment_losses(tape, tgraphs, bank, matcher, cfg.alpha);
          if (pseudo) {
            const auto& pl = pseudo_labels[tgt_pos % target_blocks.size()];
            if (std::count(pl.accepted.begin(), pl.accepted.end(), 1) > 0) {
              const Tensor tlogits =
                  classify(tape, result.params, tfeats, tblock, net_cfg);
              Tensor tseg = seg_loss(tape, tlogits, pl.labels, &pl.accepted);
              seg = ops::add(tape, seg, tseg);
            }
          }
          ++tgt_pos;
        } else if (pseudo) {
          // alignment off in stage 2: still consume the target stream
          const Block& tblock = target_blocks[tgt_pos % target_blocks.size()];
          const auto& pl = pseudo_labels[tgt_pos % target_blocks.size()];
          if (std::count(pl.accepted.begin(), pl.accepted.end(), 1) > 0) {
            const auto tfeats = extract_features(tape, result.params, tblock, net_cfg);
            const Tensor tlogits = classify(tape, result.params, tfeats, tblock, net_cfg);
            Tensor tseg = seg_loss(tape, tlogits, pl.labels, &pl.accepted);
            seg = ops::add(tape, seg, tseg);
          }
          ++tgt_pos;
        }

        Tensor total = total_loss(tape, seg, terms.loc, terms.con, l1w, l2w);
        if (!std::isfinite(total.item()))
          throw std::runtime_error("train: non-finite loss at step " +
                                   std::to_string(step));
        Tensor scaled = ops::scale(tape, total, 1.0 / static_cast<double>(batch));
        tape.backward(scaled);

        log.seg += seg.item() / static_cast<double>(batch);
        log.loc += terms.loc.item() / static_cast<double>(batch);
        log.con += terms.con.item() / static_cast<double>(batch);
        log.total += total.item() / static_cast<double>(batch);
        log.matched_graph_count += terms.matched;
        log.skipped_graph_count += terms.skipped;
      }
      sgd_step(result.params, state);
      result.steps.push_back(StepLog{step, log});
      ++step;
    }
  }
  return result;
}

void write_loss_csv(const std::string& path, const std::vector<StepLog>& steps) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_loss_csv: cannot open " + path);
  os << "step,seg,loc,con,total,matched,skipped\n";
  os.precision(17);
  for (const auto& s : steps)
    os << s.step << "," << s.losses.seg << "," << s.losses.loc << ","
       << s.losses.con << "," << s.losses.total << ","
       << s.losses.matched_graph_count << "," << s.losses.skipped_graph_count << "\n";
}

}  // namespace galign
