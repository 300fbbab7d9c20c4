#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "galign/graphs.hpp"
#include "galign/losses.hpp"

using namespace galign;

namespace {

Block random_block(std::size_t n, std::mt19937_64& rng, int num_classes = 4) {
  Block b;
  std::uniform_real_distribution<double> dist(0.0, 10.0);
  for (std::size_t i = 0; i < n; ++i) {
    b.points.insert(b.points.end(), {dist(rng), dist(rng), dist(rng)});
    b.labels.push_back(static_cast<int>(rng() % num_classes));
    b.source_indices.push_back(i);
  }
  return b;
}

constexpr std::array<std::size_t, 4> kSmallK{1, 4, 8, 4};

}  // namespace

TEST_CASE("graph count and node-matrix shapes") {
  std::mt19937_64 rng(1);
  Block b = random_block(256, rng);
  SegnetConfig cfg;
  Tape tape;
  auto params = init_segnet_params(cfg, 2);
  auto feats = extract_features(tape, params, b, cfg);
  auto graphs = build_graphs(tape, feats, b, kSmallK);
  CHECK(graphs.size() == 4);  // ceil(256/64)
  for (const auto& g : graphs) {
    REQUIRE(g.centroid_label.has_value());
    CHECK(*g.centroid_label == b.labels[g.centroid_block_index]);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(g.levels[j].rows() == kSmallK[j]);
      CHECK(g.levels[j].cols() == cfg.widths[j] + 1);
    }
  }
}

TEST_CASE("edge column is ascending and recomputable") {
  std::mt19937_64 rng(3);
  Block b = random_block(200, rng);
  SegnetConfig cfg;
  Tape tape;
  auto params = init_segnet_params(cfg, 4);
  auto feats = extract_features(tape, params, b, cfg);
  auto graphs = build_graphs(tape, feats, b, kSmallK);
  for (const auto& g : graphs) {
    for (std::size_t j = 0; j < 4; ++j) {
      const Tensor& nodes = g.levels[j];
      const std::size_t d = nodes.cols() - 1;
      // the closest node to the centroid defines the centroid feature
      // (self-inclusion: row 0 edge distance is the smallest, often 0)
      for (std::size_t r = 0; r < nodes.rows(); ++r) {
        CHECK(nodes.at(r, d) >= 0.0);
        if (r) CHECK(nodes.at(r, d) >= nodes.at(r - 1, d) - 1e-15);
      }
      // recompute edges against the centroid feature recovered from row 0:
      // row 0 vertex sits at distance e0 from the centroid; when e0 == 0 it
      // IS the centroid feature, which the self-inclusion decision ensures
      if (nodes.at(0, d) == 0.0) {
        for (std::size_t r = 0; r < nodes.rows(); ++r) {
          double sq = 0;
          for (std::size_t c = 0; c < d; ++c) {
            const double diff = nodes.at(r, c) - nodes.at(0, c);
            sq += diff * diff;
          }
          CHECK(std::abs(std::sqrt(sq) - nodes.at(r, d)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("identical points give all-zero edges") {
  Block b;
  for (int i = 0; i < 64; ++i) {
    b.points.insert(b.points.end(), {2.0, 2.0, 2.0});
    b.labels.push_back(1);
    b.source_indices.push_back(i);
  }
  SegnetConfig cfg;
  Tape tape;
  auto params = init_segnet_params(cfg, 5);
  auto feats = extract_features(tape, params, b, cfg);
  auto graphs = build_graphs(tape, feats, b, {1, 4, 4, 1});
  for (const auto& g : graphs)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t r = 0; r < g.levels[j].rows(); ++r)
        CHECK(g.levels[j].at(r, g.levels[j].cols() - 1) == 0.0);
}

TEST_CASE("rebuild is bit-deterministic") {
  std::mt19937_64 rng(7);
  Block b = random_block(256, rng);
  SegnetConfig cfg;
  auto params = init_segnet_params(cfg, 8);
  auto build = [&] {
    Tape tape;
    auto feats = extract_features(tape, params, b, cfg);
    return build_graphs(tape, feats, b, kSmallK);
  };
  auto g1 = build(), g2 = build();
  REQUIRE(g1.size() == g2.size());
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(g1[i].centroid_block_index == g2[i].centroid_block_index);
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(g1[i].levels[j].values() == g2[i].levels[j].values());
  }
}

TEST_CASE("oversized k names the offending level") {
  std::mt19937_64 rng(9);
  Block b = random_block(64, rng);
  SegnetConfig cfg;
  Tape tape;
  auto params = init_segnet_params(cfg, 10);
  auto feats = extract_features(tape, params, b, cfg);
  // level 4 holds a single point for n=64
  CHECK_THROWS_WITH_AS(build_graphs(tape, feats, b, {1, 4, 4, 2}),
                       doctest::Contains("level 4"), std::invalid_argument);
}

TEST_CASE("gradients flow from graph nodes into network parameters") {
  std::mt19937_64 rng(11);
  Block b = random_block(256, rng);
  SegnetConfig cfg;
  auto params = init_segnet_params(cfg, 12);
  Tape tape;
  auto feats = extract_features(tape, params, b, cfg);
  auto graphs = build_graphs(tape, feats, b, kSmallK);
  // L1 pull of the first graph's deepest level toward zero
  Tensor target = Tensor::zeros(graphs[0].levels[3].shape());
  tape.backward(ops::l1_distance(tape, graphs[0].levels[3], target));
  bool any = false;
  for (double g : params.find("enc.4.w")->grad()) any = any || g != 0.0;
  CHECK(any);
}

TEST_CASE("detached copies carry no gradient history") {
  std::mt19937_64 rng(13);
  Block b = random_block(64, rng);
  SegnetConfig cfg;
  auto params = init_segnet_params(cfg, 14);
  Tape tape;
  auto feats = extract_features(tape, params, b, cfg);
  auto graphs = build_graphs(tape, feats, b, {1, 2, 4, 1});
  auto copy = graphs[0].detach();
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK_FALSE(copy.levels[j].requires_grad());
    CHECK(copy.levels[j].values() == graphs[0].levels[j].values());
  }
}

TEST_CASE("debug dump is parseable text") {
  std::mt19937_64 rng(15);
  Block b = random_block(64, rng);
  SegnetConfig cfg;
  Tape tape;
  auto params = init_segnet_params(cfg, 16);
  auto feats = extract_features(tape, params, b, cfg);
  auto graphs = build_graphs(tape, feats, b, {1, 2, 4, 1});
  std::ostringstream os;
  dump_graph(os, graphs[0]);
  CHECK(os.str().find("graph centroid=") == 0);
  CHECK(os.str().find("level 4") != std::string::npos);
}
