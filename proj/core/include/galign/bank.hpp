#pragma once

#include <cstdint>
#include <deque>

#include "galign/graphs.hpp"

namespace galign {

/// Category-keyed FIFO store of detached source-domain feature graphs,
/// capacity B per category. Single writer; snapshots are read-only views.
class GraphBank {
 public:
  struct StoredGraph {
    FeatureGraph graph;
    std::uint64_t counter = 0;
  };

  GraphBank(int num_categories, std::size_t capacity_per_category);

  /// Rejects unlabeled graphs; evicts the oldest entry of the category when
  /// the slot is full. The stored copy carries no gradient history.
  void insert(const FeatureGraph& graph);

  int num_categories() const { return static_cast<int>(slots_.size()); }
  std::size_t capacity() const { return capacity_; }
  std::size_t category_count(int c) const { return slots_.at(c).size(); }
  std::size_t total_count() const;
  bool empty() const { return total_count() == 0; }

  /// Stable view: category ascending, then age ascending.
  const std::deque<StoredGraph>& category(int c) const { return slots_.at(c); }

  struct CategoryMeans {
    // per category, the per-level node-row means concatenated
    // (length sum_j(width_j)); only rows with mask set are meaningful
    std::vector<std::vector<double>> means;
    std::vector<bool> mask;
  };
  CategoryMeans category_means() const;

 private:
  std::vector<std::deque<StoredGraph>> slots_;
  std::size_t capacity_;
  std::uint64_t next_counter_ = 0;
};

}  // namespace galign
