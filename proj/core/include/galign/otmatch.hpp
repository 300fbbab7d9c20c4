#pragma once

#include <optional>

#include "galign/bank.hpp"

namespace galign {

struct CostMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> entries;  // row-major, nonnegative
  int level = 0;

  double at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
};

/// entry (m, n) = squared Euclidean distance between row m of X and row n of Y
CostMatrix pairwise_sq_dist(const std::vector<double>& x, std::size_t a,
                            const std::vector<double>& y, std::size_t b,
                            std::size_t d);

struct SinkhornPlan {
  std::size_t rows = 0, cols = 0;
  std::vector<double> plan;  // coupling with uniform marginals 1/rows, 1/cols
  double cost = 0;           // <P, D>

  double at(std::size_t r, std::size_t c) const { return plan[r * cols + c]; }
};

/// Log-domain entropic OT with uniform marginals; `iters` rounds of
/// alternating row/column potential updates.
SinkhornPlan sinkhorn(const CostMatrix& cost, double eps, int iters);

struct MatcherConfig {
  double eps_abs = 0.0;     // fixed epsilon when > 0
  double eps_scale = 0.05;  // else eps = eps_scale * mean(D) per instance
  int iters = 100;
};

struct TransportPlan {
  std::array<SinkhornPlan, 4> levels;
  std::array<double, 4> level_costs{};
  double total_cost = 0;
};

/// Per level: costs from the node matrices (divided by the level's feature
/// width so no level dominates), Sinkhorn plan, summed level costs.
TransportPlan graph_transport(const FeatureGraph& g1, const FeatureGraph& g2,
                              const MatcherConfig& cfg);

struct MatchResult {
  int category = 0;
  std::size_t bank_index = 0;  // age position within the category slot
  std::array<Tensor, 4> assignments;  // A_j = k_j * P_j, rows sum to 1
  double total_cost = 0;
  const GraphBank::StoredGraph* matched = nullptr;
};

/// Full bank scan; minimum total cost wins, ties toward the lowest category
/// then the lowest age. Empty bank -> nullopt.
std::optional<MatchResult> best_match(const FeatureGraph& target,
                                      const GraphBank& bank,
                                      const MatcherConfig& cfg);

}  // namespace galign
