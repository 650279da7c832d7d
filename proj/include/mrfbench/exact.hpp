#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mrfbench/dataset.hpp"
#include "mrfbench/model.hpp"

namespace mrfbench {

/// Full joint over 2^d outcomes; bit v of the index is x_v.
struct ExactDistribution {
  int d = 0;
  std::vector<double> probs;
};

using PairTable = std::array<std::array<double, 2>, 2>;

inline constexpr int kMaxEnumerableNodes = 20;

inline ExactDistribution enumerate_distribution(const IsingModel& model) {
  const int d = model.num_nodes();
  if (d > kMaxEnumerableNodes) throw std::invalid_argument("enumerate_distribution: d > 20");
  const std::size_t states = std::size_t{1} << d;
  const auto& edges = model.graph.edges();

  std::vector<double> log_weight(states);
  double top = -INFINITY;
  for (std::size_t s = 0; s < states; ++s) {
    double e = 0.0;
    for (int v = 0; v < d; ++v)
      if ((s >> v) & 1u) e += model.bias[v];
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (((s >> edges[i].u) & 1u) && ((s >> edges[i].v) & 1u)) e += model.coupling[i];
    log_weight[s] = e;
    top = std::max(top, e);
  }
  ExactDistribution dist{d, std::vector<double>(states)};
  double z = 0.0;
  for (std::size_t s = 0; s < states; ++s) z += (dist.probs[s] = std::exp(log_weight[s] - top));
  for (auto& p : dist.probs) p /= z;
  return dist;
}

/// table[a][b] = P(X_v = a, X_w = b).
inline PairTable exact_pair_marginal(const ExactDistribution& dist, int v, int w) {
  if (v == w) throw std::invalid_argument("exact_pair_marginal: nodes must differ");
  if (v < 0 || w < 0 || v >= dist.d || w >= dist.d) throw std::out_of_range("exact_pair_marginal: node index");
  PairTable t{};
  for (std::size_t s = 0; s < dist.probs.size(); ++s) t[(s >> v) & 1u][(s >> w) & 1u] += dist.probs[s];
  return t;
}

/// Relative frequencies of each joint outcome, same indexing as ExactDistribution.
inline std::vector<double> empirical_distribution(const Dataset& data) {
  if (data.cols() > static_cast<std::size_t>(kMaxEnumerableNodes))
    throw std::invalid_argument("empirical_distribution: d > 20");
  std::vector<double> freq(std::size_t{1} << data.cols(), 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    std::size_t s = 0;
    for (std::size_t v = 0; v < data.cols(); ++v) s |= std::size_t{data(i, v)} << v;
    freq[s] += 1.0;
  }
  for (auto& f : freq) f /= static_cast<double>(data.rows());
  return freq;
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

/// Mutual information (natural log) of a 2x2 joint table.
inline double table_mutual_information(const PairTable& t) {
  const double row[2] = {t[0][0] + t[0][1], t[1][0] + t[1][1]};
  const double col[2] = {t[0][0] + t[1][0], t[0][1] + t[1][1]};
  double mi = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (t[a][b] > 0.0) mi += t[a][b] * std::log(t[a][b] / (row[a] * col[b]));
  return mi;
}

}  // namespace mrfbench
