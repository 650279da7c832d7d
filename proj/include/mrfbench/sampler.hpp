#pragma once

#include <algorithm>
#include <barrier>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mrfbench/dataset.hpp"
#include "mrfbench/model.hpp"
#include "mrfbench/rng.hpp"

namespace mrfbench {

/// Sparse RBM with one Gaussian hidden unit per edge. Marginalizing the hidden
/// layer gives back the Ising distribution because the off-diagonal of WᵀW is A.
struct SrbmMapping {
  struct Row {
    int col_a, col_b;   // col_a < col_b
    double w_a, w_b;
  };
  struct Incidence {
    int row;
    double w;
  };

  int d = 0;
  std::vector<Row> rows;                          // one per edge, edge order of the graph
  std::vector<std::vector<Incidence>> columns;    // per visible node
  std::vector<double> bias;
  std::vector<double> wtw_diag;

  std::size_t num_hidden() const noexcept { return rows.size(); }

  /// Dense WᵀW (row-major d*d), for checks.
  std::vector<double> gram() const {
    const auto n = static_cast<std::size_t>(d);
    std::vector<double> g(n * n, 0.0);
    for (const auto& r : rows) {
      g[r.col_a * n + r.col_a] += r.w_a * r.w_a;
      g[r.col_b * n + r.col_b] += r.w_b * r.w_b;
      g[r.col_a * n + r.col_b] += r.w_a * r.w_b;
      g[r.col_b * n + r.col_a] += r.w_a * r.w_b;
    }
    return g;
  }
};

inline SrbmMapping build_srbm(const IsingModel& model) {
  SrbmMapping m;
  m.d = model.num_nodes();
  m.bias = model.bias;
  m.wtw_diag.assign(static_cast<std::size_t>(m.d), 0.0);
  m.columns.resize(static_cast<std::size_t>(m.d));
  const auto& edges = model.graph.edges();
  m.rows.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double theta = model.coupling[i];
    const double root = std::sqrt(std::abs(theta));
    const double sign = theta < 0 ? -1.0 : 1.0;
    SrbmMapping::Row row{edges[i].u, edges[i].v, root, sign * root};
    m.rows.push_back(row);
    m.columns[row.col_a].push_back({static_cast<int>(i), row.w_a});
    m.columns[row.col_b].push_back({static_cast<int>(i), row.w_b});
    m.wtw_diag[row.col_a] += std::abs(theta);
    m.wtw_diag[row.col_b] += std::abs(theta);
  }
  return m;
}

inline double logistic(double a) noexcept {
  return a >= 0 ? 1.0 / (1.0 + std::exp(-a)) : std::exp(a) / (1.0 + std::exp(a));
}

struct GibbsSettings {
  std::size_t burn_in = 2000;
  std::size_t thinning = 50;
  unsigned threads = 1;
};

/// Block-Gibbs on the sRBM: hidden y_e | x ~ N(W_e·x, 1), then
/// x_v | y ~ Bernoulli(σ(b_v - ½(WᵀW)_vv + yᵀW_:v)). One chain; after burn_in
/// sweeps every thinning-th visible state is kept. Every draw comes from a
/// counter stream keyed by (seed, sweep, phase) and indexed by the variable, so
/// the output is independent of the worker count.
inline Dataset gibbs_sample(const SrbmMapping& m, std::size_t n, const GibbsSettings& cfg, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gibbs_sample: n must be positive");
  if (cfg.thinning < 1) throw std::invalid_argument("gibbs_sample: thinning must be positive");

  const auto d = static_cast<std::size_t>(m.d);
  const std::size_t hidden = m.rows.size();
  Dataset out(n, d);
  std::vector<std::uint8_t> x(d);
  std::vector<double> y(hidden);

  const CounterStream init(derive_key(seed, 0));
  for (std::size_t v = 0; v < d; ++v) x[v] = init.uniform(v) < 0.5 ? 1 : 0;

  std::vector<double> offset(d);
  for (std::size_t v = 0; v < d; ++v) offset[v] = m.bias[v] - 0.5 * m.wtw_diag[v];

  const std::size_t sweeps = cfg.burn_in + n * cfg.thinning;
  const unsigned workers = std::max(1u, cfg.threads);

  auto hidden_phase = [&](std::size_t sweep, std::size_t lo, std::size_t hi) {
    const CounterStream rng(derive_key(derive_key(seed, sweep), 0));
    for (std::size_t e = lo; e < hi; ++e) {
      const auto& r = m.rows[e];
      const double mean = r.w_a * x[r.col_a] + r.w_b * x[r.col_b];
      y[e] = mean + rng.normal(e);
    }
  };
  auto visible_phase = [&](std::size_t sweep, std::size_t lo, std::size_t hi) {
    const CounterStream rng(derive_key(derive_key(seed, sweep), 1));
    for (std::size_t v = lo; v < hi; ++v) {
      double a = offset[v];
      for (const auto& inc : m.columns[v]) a += y[inc.row] * inc.w;
      x[v] = rng.uniform(v) < logistic(a) ? 1 : 0;
    }
  };
  auto record = [&](std::size_t sweep) {
    if (sweep <= cfg.burn_in || (sweep - cfg.burn_in) % cfg.thinning != 0) return;
    const std::size_t i = (sweep - cfg.burn_in) / cfg.thinning - 1;
    auto row = out.row(i);
    std::copy(x.begin(), x.end(), row.begin());
  };

  if (workers == 1) {
    for (std::size_t s = 1; s <= sweeps; ++s) {
      hidden_phase(s, 0, hidden);
      visible_phase(s, 0, d);
      record(s);
    }
    return out;
  }

  std::barrier sync(static_cast<std::ptrdiff_t>(workers));
  auto slice = [workers](std::size_t total, unsigned w) {
    return std::pair{total * w / workers, total * (w + 1) / workers};
  };
  auto body = [&](unsigned w) {
    const auto [h_lo, h_hi] = slice(hidden, w);
    const auto [v_lo, v_hi] = slice(d, w);
    for (std::size_t s = 1; s <= sweeps; ++s) {
      hidden_phase(s, h_lo, h_hi);
      sync.arrive_and_wait();
      visible_phase(s, v_lo, v_hi);
      sync.arrive_and_wait();
      if (w == 0) record(s);
    }
  };
  {
    std::vector<std::jthread> team;
    for (unsigned w = 1; w < workers; ++w) team.emplace_back(body, w);
    body(0);
  }
  return out;
}

}  // namespace mrfbench
