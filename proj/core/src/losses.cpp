#include "galign/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace galign {

Tensor seg_loss(Tape& tape, const Tensor& logits, std::span<const int> labels,
                const std::vector<std::uint8_t>* mask) {
  return ops::softmax_cross_entropy(tape, logits, labels, mask);
}

AlignmentTerms alignment_losses(Tape& tape,
                                const std::vector<FeatureGraph>& target_graphs,
                                const GraphBank& bank, const MatcherConfig& cfg,
                                double alpha) {
  if (alpha < 0) throw std::invalid_argument("alignment_losses: alpha must be >= 0");
  AlignmentTerms out;
  out.loc = Tensor::scalar(0.0);
  out.con = Tensor::scalar(0.0);
  if (target_graphs.empty()) return out;

  const auto means = bank.category_means();
  Tensor alpha_t = Tensor::scalar(alpha);

  for (const auto& g : target_graphs) {
    auto match = best_match(g, bank, cfg);
    if (!match) {
      ++out.skipped;
      continue;
    }
    ++out.matched;

    // Eq-style local term: per level, normalized L1 between the target node
    // matrix and the assignment-weighted matched source nodes
    for (std::size_t j = 0; j < 4; ++j) {
      const Tensor& tgt = g.levels[j];
      Tensor weighted = ops::matmul(tape, match->assignments[j],
                                    match->matched->graph.levels[j]);
      Tensor gap = ops::l1_distance(tape, tgt, weighted);
      out.loc = ops::add(tape, out.loc,
                         ops::scale(tape, gap, 1.0 / static_cast<double>(tgt.size())));
    }

    // contrastive hinge against the bank's category means
    std::vector<double> neg;
    std::size_t neg_count = 0;
    for (int c = 0; c < bank.num_categories(); ++c) {
      if (c == match->category || !means.mask[c]) continue;
      if (neg.empty()) neg.assign(means.means[c].size(), 0.0);
      for (std::size_t i = 0; i < neg.size(); ++i) neg[i] += means.means[c][i];
      ++neg_count;
    }
    if (neg_count == 0) continue;  // no negatives yet: term contributes 0
    for (auto& v : neg) v /= static_cast<double>(neg_count);

    std::array<Tensor, 4> level_means;
    for (std::size_t j = 0; j < 4; ++j)
      level_means[j] = ops::mean_rows(tape, g.levels[j]);
    Tensor f_t = ops::concat(tape, level_means, 1);
    Tensor f_pos = Tensor::matrix(1, means.means[match->category].size(),
                                  means.means[match->category]);
    const std::size_t neg_width = neg.size();
    Tensor f_neg = Tensor::matrix(1, neg_width, std::move(neg));
    Tensor d_pos = ops::l1_distance(tape, f_t, f_pos);
    Tensor d_neg = ops::l1_distance(tape, f_t, f_neg);
    Tensor hinge = ops::relu(
        tape, ops::add(tape, ops::add(tape, d_pos, ops::scale(tape, d_neg, -1.0)),
                       alpha_t));
    out.con = ops::add(tape, out.con, hinge);
  }

  if (out.matched > 0) {
    const double inv = 1.0 / static_cast<double>(out.matched);
    out.loc = ops::scale(tape, out.loc, inv);
    out.con = ops::scale(tape, out.con, inv);
  }
  return out;
}

Tensor total_loss(Tape& tape, const Tensor& seg, const Tensor& loc,
                  const Tensor& con, double lambda1, double lambda2) {
  return ops::add(tape, seg,
                  ops::add(tape, ops::scale(tape, loc, lambda1),
                           ops::scale(tape, con, lambda2)));
}

PseudoLabels generate_pseudo_labels(const NamedParams& params, const Block& block,
                                    const SegnetConfig& cfg, double keep_fraction) {
  if (keep_fraction <= 0 || keep_fraction > 1)
    throw std::invalid_argument("generate_pseudo_labels: keep_fraction must be in (0,1]");
  Tape tape;  // throwaway; no backward pass happens
  const auto feats = extract_features(tape, params, block, cfg);
  const Tensor logits = classify(tape, params, feats, block, cfg);
  const std::size_t n = logits.rows(), c = logits.cols();

  PseudoLabels out;
  out.labels.resize(n);
  out.confidence.resize(n);
  out.accepted.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = logits.values().data() + r * c;
    std::size_t arg = 0;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j)
      if (row[j] > mx) { mx = row[j]; arg = j; }
    double denom = 0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(row[j] - mx);
    out.labels[r] = static_cast<int>(arg);
    out.confidence[r] = 1.0 / denom;
  }

  for (std::size_t cls = 0; cls < c; ++cls) {
    std::vector<std::pair<double, std::size_t>> members;
    for (std::size_t r = 0; r < n; ++r)
      if (out.labels[r] == static_cast<int>(cls))
        members.emplace_back(-out.confidence[r], r);
    if (members.empty()) continue;
    std::sort(members.begin(), members.end());
    const auto keep = static_cast<std::size_t>(
        std::ceil(keep_fraction * static_cast<double>(members.size()) - 1e-12));
    for (std::size_t i = 0; i < keep; ++i) out.accepted[members[i].second] = 1;
  }
  return out;
}

}  // namespace galign
