#include "galign/otmatch.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace galign {

CostMatrix pairwise_sq_dist(const std::vector<double>& x, std::size_t a,
                            const std::vector<double>& y, std::size_t b,
                            std::size_t d) {
  if (x.size() != a * d || y.size() != b * d)
    throw std::invalid_argument("pairwise_sq_dist: feature width mismatch");
  CostMatrix cm;
  cm.rows = a;
  cm.cols = b;
  cm.entries.resize(a * b);
  for (std::size_t m = 0; m < a; ++m)
    for (std::size_t n = 0; n < b; ++n) {
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = x[m * d + k] - y[n * d + k];
        s += diff * diff;
      }
      cm.entries[m * b + n] = s;
    }
  return cm;
}

namespace {

double lse(const std::vector<double>& terms) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double t : terms) mx = std::max(mx, t);
  if (!std::isfinite(mx)) return mx;
  double s = 0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

}  // namespace

SinkhornPlan sinkhorn(const CostMatrix& cost, double eps, int iters) {
  if (eps <= 0) throw std::invalid_argument("sinkhorn: eps must be positive");
  if (iters <= 0) throw std::invalid_argument("sinkhorn: iters must be positive");
  for (double v : cost.entries)
    if (!std::isfinite(v)) throw std::invalid_argument("sinkhorn: non-finite cost");

  const std::size_t a = cost.rows, b = cost.cols;
  const double log_mu = -std::log(static_cast<double>(a));
  const double log_nu = -std::log(static_cast<double>(b));
  std::vector<double> f(a, 0.0), g(b, 0.0);
  std::vector<double> row_terms(b), col_terms(a);

  // Annealed regularization: start near the cost scale and decay toward the
  // requested eps over the first half of the budget, then polish at eps.
  // This keeps small-eps runs from stalling far from the optimal vertex.
  double spread = 0;
  for (double v : cost.entries) spread = std::max(spread, std::abs(v));
  const double eps_start = std::max(eps, spread);
  const int anneal = iters / 2;
  const double decay =
      anneal > 0 && eps_start > eps
          ? std::pow(eps / eps_start, 1.0 / static_cast<double>(anneal))
          : 1.0;

  double eps_t = eps_start;
  for (int it = 0; it < iters; ++it) {
    eps_t = it < anneal ? std::max(eps, eps_t * decay) : eps;
    for (std::size_t m = 0; m < a; ++m) {
      for (std::size_t n = 0; n < b; ++n)
        row_terms[n] = (g[n] - cost.at(m, n)) / eps_t;
      f[m] = eps_t * (log_mu - lse(row_terms));
    }
    for (std::size_t n = 0; n < b; ++n) {
      for (std::size_t m = 0; m < a; ++m)
        col_terms[m] = (f[m] - cost.at(m, n)) / eps_t;
      g[n] = eps_t * (log_nu - lse(col_terms));
    }
  }
  SinkhornPlan out;
  out.rows = a;
  out.cols = b;
  out.plan.resize(a * b);
  for (std::size_t m = 0; m < a; ++m)
    for (std::size_t n = 0; n < b; ++n) {
      const double p = std::exp((f[m] + g[n] - cost.at(m, n)) / eps);
      out.plan[m * b + n] = p;
      out.cost += p * cost.at(m, n);
    }
  return out;
}

TransportPlan graph_transport(const FeatureGraph& g1, const FeatureGraph& g2,
                              const MatcherConfig& cfg) {
  TransportPlan tp;
  for (std::size_t j = 0; j < 4; ++j) {
    const Tensor& t1 = g1.levels[j];
    const Tensor& t2 = g2.levels[j];
    if (t1.rows() != t2.rows() || t1.cols() != t2.cols())
      throw std::invalid_argument("graph_transport: level " + std::to_string(j + 1) +
                                  " shape mismatch");
    CostMatrix cm = pairwise_sq_dist(t1.values(), t1.rows(), t2.values(), t2.rows(),
                                     t1.cols());
    cm.level = static_cast<int>(j + 1);
    // feature-width normalization so wide levels do not dominate the sum
    const double inv_width = 1.0 / static_cast<double>(t1.cols());
    double mean = 0;
    for (auto& e : cm.entries) {
      e *= inv_width;
      mean += e;
    }
    mean /= static_cast<double>(cm.entries.size());
    const double eps = cfg.eps_abs > 0 ? cfg.eps_abs
                                       : std::max(cfg.eps_scale * mean, 1e-12);
    tp.levels[j] = sinkhorn(cm, eps, cfg.iters);
    tp.level_costs[j] = tp.levels[j].cost;
    tp.total_cost += tp.levels[j].cost;
  }
  return tp;
}

std::optional<MatchResult> best_match(const FeatureGraph& target,
                                      const GraphBank& bank,
                                      const MatcherConfig& cfg) {
  std::optional<MatchResult> best;
  for (int c = 0; c < bank.num_categories(); ++c) {
    const auto& slot = bank.category(c);
    for (std::size_t l = 0; l < slot.size(); ++l) {
      TransportPlan tp = graph_transport(target, slot[l].graph, cfg);
      if (!best || tp.total_cost < best->total_cost) {
        MatchResult r;
        r.category = c;
        r.bank_index = l;
        r.total_cost = tp.total_cost;
        r.matched = &slot[l];
        for (std::size_t j = 0; j < 4; ++j) {
          const auto& p = tp.levels[j];
          std::vector<double> a(p.plan);
          // scale to row-stochastic; exact normalization absorbs whatever
          // marginal slack the finite iteration count left behind
          for (std::size_t m = 0; m < p.rows; ++m) {
            double row = 0;
            for (std::size_t n = 0; n < p.cols; ++n) row += a[m * p.cols + n];
            if (row > 0)
              for (std::size_t n = 0; n < p.cols; ++n) a[m * p.cols + n] /= row;
          }
          r.assignments[j] = Tensor::matrix(p.rows, p.cols, std::move(a));
        }
        best = std::move(r);
      }
    }
  }
  return best;
}

}  // namespace galign
