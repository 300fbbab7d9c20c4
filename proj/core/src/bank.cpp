#include "galign/bank.hpp"

#include <stdexcept>

namespace galign {

GraphBank::GraphBank(int num_categories, std::size_t capacity_per_category)
    : slots_(static_cast<std::size_t>(num_categories)), capacity_(capacity_per_category) {
  if (num_categories <= 0 || capacity_per_category == 0)
    throw std::invalid_argument("GraphBank: need positive category count and capacity");
}

void GraphBank::insert(const FeatureGraph& graph) {
  if (!graph.centroid_label)
    throw std::invalid_argument("GraphBank::insert: graph has no centroid label");
  const int c = *graph.centroid_label;
  if (c < 0 || c >= num_categories())
    throw std::invalid_argument("GraphBank::insert: category out of range");
  auto& slot = slots_[static_cast<std::size_t>(c)];
  if (slot.size() == capacity_) slot.pop_front();
  slot.push_back(StoredGraph{graph.detach(), next_counter_++});
}

std::size_t GraphBank::total_count() const {
  std::size_t n = 0;
  for (const auto& s : slots_) n += s.size();
  return n;
}

GraphBank::CategoryMeans GraphBank::category_means() const {
  CategoryMeans out;
  out.means.resize(slots_.size());
  out.mask.assign(slots_.size(), false);
  for (std::size_t c = 0; c < slots_.size(); ++c) {
    const auto& slot = slots_[c];
    if (slot.empty()) continue;
    out.mask[c] = true;
    auto& vec = out.means[c];
    for (std::size_t j = 0; j < 4; ++j) {
      const std::size_t width = slot.front().graph.levels[j].cols();
      std::vector<double> mean(width, 0.0);
      std::size_t rows = 0;
      for (const auto& s : slot) {
        const Tensor& t = s.graph.levels[j];
        for (std::size_t r = 0; r < t.rows(); ++r)
          for (std::size_t k = 0; k < width; ++k) mean[k] += t.at(r, k);
        rows += t.rows();
      }
      for (auto& v : mean) v /= static_cast<double>(rows);
      vec.insert(vec.end(), mean.begin(), mean.end());
    }
  }
  return out;
}

}  // namespace galign
