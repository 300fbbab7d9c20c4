#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "galign/losses.hpp"

using namespace galign;

namespace {

// single-node graph, four 1x2 levels filled with `fill`
FeatureGraph tiny_graph(double fill, int label = -1) {
  FeatureGraph g;
  if (label >= 0) g.centroid_label = label;
  for (std::size_t j = 0; j < 4; ++j)
    g.levels[j] = Tensor::matrix(1, 2, {fill, fill});
  return g;
}

double softmax_ce_oracle(const Tensor& logits, const std::vector<int>& labels,
                         const std::vector<std::uint8_t>* mask = nullptr) {
  double total = 0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (mask && !(*mask)[r]) continue;
    double mx = logits.at(r, 0);
    for (std::size_t c = 1; c < logits.cols(); ++c) mx = std::max(mx, logits.at(r, c));
    double denom = 0;
    for (std::size_t c = 0; c < logits.cols(); ++c)
      denom += std::exp(logits.at(r, c) - mx);
    total += -(logits.at(r, labels[r]) - mx - std::log(denom));
    ++count;
  }
  return total / static_cast<double>(count);
}

}  // namespace

TEST_CASE("uniform logits cost log(num_classes)") {
  Tape tape;
  std::vector<int> l4{0};
  CHECK(seg_loss(tape, Tensor::matrix(1, 4, {2, 2, 2, 2}), l4).item() ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  std::vector<int> l6{3};
  CHECK(seg_loss(tape, Tensor::matrix(1, 6, std::vector<double>(6, -1.0)), l6).item() ==
        doctest::Approx(std::log(6.0)).epsilon(1e-12));  // ~1.7918
}

TEST_CASE("segmentation loss matches a direct recomputation") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dist(-30, 30);  // stresses the LSE shift
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng() % 40, c = 2 + rng() % 6;
    std::vector<double> v(n * c);
    for (auto& x : v) x = dist(rng);
    std::vector<int> labels(n);
    for (auto& l : labels) l = static_cast<int>(rng() % c);
    Tensor logits = Tensor::matrix(n, c, std::move(v));
    Tape tape;
    CHECK(seg_loss(tape, logits, labels).item() ==
          doctest::Approx(softmax_ce_oracle(logits, labels)).epsilon(1e-10));
  }
}

TEST_CASE("masked loss equals the loss over the kept subset") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-3, 3);
  std::vector<double> v(12 * 4);
  for (auto& x : v) x = dist(rng);
  std::vector<int> labels(12);
  for (auto& l : labels) l = static_cast<int>(rng() % 4);
  std::vector<std::uint8_t> mask(12, 0);
  for (std::size_t i = 0; i < 12; i += 3) mask[i] = 1;
  Tensor logits = Tensor::matrix(12, 4, std::move(v));
  Tape tape;
  CHECK(seg_loss(tape, logits, labels, &mask).item() ==
        doctest::Approx(softmax_ce_oracle(logits, labels, &mask)).epsilon(1e-10));
}

TEST_CASE("local loss hand case: unit offset per level") {
  GraphBank bank(2, 4);
  bank.insert(tiny_graph(1.0, 0));
  Tape tape;
  std::vector<FeatureGraph> targets{tiny_graph(0.0)};
  auto terms = alignment_losses(tape, targets, bank, MatcherConfig{}, 0.4);
  CHECK(terms.matched == 1);
  CHECK(terms.skipped == 0);
  // per level: |0-1|*2 entries / 2 = 1, four levels -> 4
  CHECK(terms.loc.item() == doctest::Approx(4.0).epsilon(1e-9));
  // single occupied category: no negatives, contrastive term stays 0
  CHECK(terms.con.item() == 0.0);
}

TEST_CASE("exact bank copy drives the local loss to zero") {
  std::mt19937_64 rng(5);
  GraphBank bank(2, 4);
  FeatureGraph g;
  g.centroid_label = 1;
  std::uniform_real_distribution<double> dist(-1, 1);
  for (std::size_t j = 0; j < 4; ++j) {
    std::vector<double> v(3 * 5);
    for (auto& x : v) x = dist(rng);
    g.levels[j] = Tensor::matrix(3, 5, std::move(v));
  }
  bank.insert(g);
  MatcherConfig cfg;
  cfg.eps_abs = 1e-4;
  cfg.iters = 300;
  Tape tape;
  std::vector<FeatureGraph> targets{g};
  auto terms = alignment_losses(tape, targets, bank, cfg, 0.4);
  CHECK(terms.matched == 1);
  CHECK(terms.loc.item() < 1e-4);
}

TEST_CASE("empty bank skips every graph and contributes nothing") {
  GraphBank bank(3, 4);
  Tape tape;
  std::vector<FeatureGraph> targets{tiny_graph(1.0), tiny_graph(2.0)};
  auto terms = alignment_losses(tape, targets, bank, MatcherConfig{}, 0.4);
  CHECK(terms.matched == 0);
  CHECK(terms.skipped == 2);
  CHECK(terms.loc.item() == 0.0);
  CHECK(terms.con.item() == 0.0);
}

TEST_CASE("contrastive hinge hand cases") {
  // target sits exactly on category 0; category 1 lives far away
  GraphBank bank(2, 4);
  bank.insert(tiny_graph(0.0, 0));
  bank.insert(tiny_graph(1.0, 1));

  // d_pos = 0, d_neg = 8 entries * 1.0 = 8
  {
    Tape tape;
    std::vector<FeatureGraph> targets{tiny_graph(0.0)};
    auto t = alignment_losses(tape, targets, bank, MatcherConfig{}, 0.4);
    CHECK(t.con.item() == doctest::Approx(0.0));  // relu(0 - 8 + 0.4)
  }
  // margin larger than the gap leaves a residual: relu(0 - 8 + 8.5) = 0.5
  {
    Tape tape;
    std::vector<FeatureGraph> targets{tiny_graph(0.0)};
    auto t = alignment_losses(tape, targets, bank, MatcherConfig{}, 8.5);
    CHECK(t.con.item() == doctest::Approx(0.5).epsilon(1e-9));
  }
  // positive and negative means coincide: hinge collapses to alpha
  {
    GraphBank twin(2, 4);
    twin.insert(tiny_graph(1.0, 0));
    twin.insert(tiny_graph(1.0, 1));
    Tape tape;
    std::vector<FeatureGraph> targets{tiny_graph(0.3)};
    auto t = alignment_losses(tape, targets, twin, MatcherConfig{}, 0.4);
    CHECK(t.con.item() == doctest::Approx(0.4).epsilon(1e-9));
  }
}

TEST_CASE("local term averages over matched graphs") {
  GraphBank bank(2, 4);
  bank.insert(tiny_graph(1.0, 0));
  Tape tape;
  std::vector<FeatureGraph> one{tiny_graph(0.0)};
  std::vector<FeatureGraph> two{tiny_graph(0.0), tiny_graph(0.0)};
  const double a = alignment_losses(tape, one, bank, MatcherConfig{}, 0.4).loc.item();
  const double b = alignment_losses(tape, two, bank, MatcherConfig{}, 0.4).loc.item();
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("alignment gradients reach the target graphs, never the bank") {
  GraphBank bank(2, 4);
  auto stored = tiny_graph(1.0, 0);
  bank.insert(stored);
  FeatureGraph target = tiny_graph(0.0);
  for (auto& lvl : target.levels) lvl.set_requires_grad(true);
  Tape tape;
  std::vector<FeatureGraph> targets{target};
  auto terms = alignment_losses(tape, targets, bank, MatcherConfig{}, 0.4);
  tape.backward(terms.loc);
  for (const auto& lvl : target.levels) {
    REQUIRE(lvl.has_grad());
    bool nonzero = false;
    for (double g : lvl.grad()) nonzero = nonzero || g != 0.0;
    CHECK(nonzero);
  }
  for (const auto& s : bank.category(0))
    for (const auto& lvl : s.graph.levels) CHECK_FALSE(lvl.requires_grad());
}

TEST_CASE("total combines the three terms with the given weights") {
  Tape tape;
  Tensor t = total_loss(tape, Tensor::scalar(1.0), Tensor::scalar(2.0),
                        Tensor::scalar(3.0), 1.0, 0.1);
  CHECK(t.item() == doctest::Approx(3.3).epsilon(1e-12));
  Tensor zero = total_loss(tape, Tensor::scalar(1.0), Tensor::scalar(2.0),
                           Tensor::scalar(3.0), 0.0, 0.0);
  CHECK(zero.item() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("total gradient is the weighted superposition of term gradients") {
  auto make_terms = [](const Tensor& x, Tape& tape) {
    Tensor a = Tensor::matrix(1, 3, {0.5, -1.0, 2.0});
    Tensor b = Tensor::matrix(1, 3, {-2.0, 0.25, 1.0});
    Tensor seg = ops::squared_distance(tape, x, a);
    Tensor loc = ops::l1_distance(tape, x, b);
    Tensor con = ops::l1_distance(tape, ops::relu(tape, x), Tensor::zeros({1, 3}));
    return std::array<Tensor, 3>{seg, loc, con};
  };
  const double l1 = 0.7, l2 = 0.3;
  std::vector<double> xv{1.0, -0.5, 0.75};

  Tensor x = Tensor::matrix(1, 3, xv, true);
  Tape tape;
  auto [seg, loc, con] = make_terms(x, tape);
  tape.backward(total_loss(tape, seg, loc, con, l1, l2));
  auto combined = x.grad();

  std::vector<double> expected(3, 0.0);
  const std::array<double, 3> weights{1.0, l1, l2};
  for (int term = 0; term < 3; ++term) {
    Tensor y = Tensor::matrix(1, 3, xv, true);
    Tape t2;
    auto parts = make_terms(y, t2);
    t2.backward(parts[term]);
    for (int i = 0; i < 3; ++i) expected[i] += weights[term] * y.grad()[i];
  }
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(combined[i] - expected[i]) <= 1e-9);
}

TEST_CASE("pseudo labels keep the top slice of each predicted class") {
  std::mt19937_64 rng(7);
  Block b;
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  for (std::size_t i = 0; i < 40; ++i) {
    b.points.insert(b.points.end(), {dist(rng), dist(rng), dist(rng)});
    b.labels.push_back(-1);
    b.source_indices.push_back(i);
  }
  SegnetConfig cfg;
  auto params = init_segnet_params(cfg, 11);
  auto pl = generate_pseudo_labels(params, b, cfg, 0.8);
  REQUIRE(pl.labels.size() == 40);
  for (int cls = 0; cls < cfg.num_classes; ++cls) {
    std::size_t members = 0, kept = 0;
    double min_kept = 2.0, max_dropped = -1.0;
    for (std::size_t i = 0; i < 40; ++i) {
      if (pl.labels[i] != cls) continue;
      ++members;
      if (pl.accepted[i]) {
        ++kept;
        min_kept = std::min(min_kept, pl.confidence[i]);
      } else {
        max_dropped = std::max(max_dropped, pl.confidence[i]);
      }
    }
    if (members == 0) continue;  // absent class: nothing to keep
    CHECK(kept == static_cast<std::size_t>(
                      std::ceil(0.8 * static_cast<double>(members) - 1e-12)));
    if (kept < members) CHECK(min_kept >= max_dropped);
  }

  auto all = generate_pseudo_labels(params, b, cfg, 1.0);
  for (auto a : all.accepted) CHECK(a == 1);

  CHECK_THROWS_AS(generate_pseudo_labels(params, b, cfg, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(generate_pseudo_labels(params, b, cfg, 1.5), std::invalid_argument);
}

TEST_CASE("negative margin is rejected") {
  GraphBank bank(2, 4);
  Tape tape;
  std::vector<FeatureGraph> targets;
  CHECK_THROWS_AS(alignment_losses(tape, targets, bank, MatcherConfig{}, -0.1),
                  std::invalid_argument);
}
