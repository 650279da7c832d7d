#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mrfbench/graph.hpp"
#include "mrfbench/rng.hpp"

namespace mrfbench {

/// Binary pairwise Markov network: p(x) ∝ exp(Σ_v x_v bias_v + Σ_{uv∈E} x_u x_v coupling_uv).
/// coupling[i] belongs to graph.edges()[i].
struct IsingModel {
  Graph graph;
  std::vector<double> bias;
  std::vector<double> coupling;

  IsingModel() = default;
  IsingModel(Graph g, std::vector<double> b, std::vector<double> c)
      : graph(std::move(g)), bias(std::move(b)), coupling(std::move(c)) {
    if (bias.size() != static_cast<std::size_t>(graph.num_nodes()))
      throw std::invalid_argument("bias length must equal node count");
    if (coupling.size() != graph.num_edges())
      throw std::invalid_argument("need exactly one coupling per edge");
  }

  int num_nodes() const noexcept { return graph.num_nodes(); }

  /// Dense symmetric interaction matrix A (row-major d*d), zero diagonal.
  std::vector<double> interaction_matrix() const {
    const auto d = static_cast<std::size_t>(num_nodes());
    std::vector<double> a(d * d, 0.0);
    const auto& edges = graph.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
      a[edges[i].u * d + edges[i].v] = coupling[i];
      a[edges[i].v * d + edges[i].u] = coupling[i];
    }
    return a;
  }
};

/// |bias| ~ U(0,1), |coupling| ~ U(1,2), signs from independent fair coins.
inline IsingModel draw_parameters(const Graph& graph, Engine& rng) {
  auto signed_draw = [&rng](double lo, double hi) {
    const double magnitude = lo + (hi - lo) * uniform01(rng);
    return uniform01(rng) < 0.5 ? -magnitude : magnitude;
  };
  std::vector<double> bias(static_cast<std::size_t>(graph.num_nodes()));
  for (auto& b : bias) b = signed_draw(0.0, 1.0);
  std::vector<double> coupling(graph.num_edges());
  for (auto& c : coupling) c = signed_draw(1.0, 2.0);
  return IsingModel(graph, std::move(bias), std::move(coupling));
}

// JSON model format: {"d": int, "edges": [[v, v', theta], ...] (1-based), "bias": [...]}

inline nlohmann::json model_to_json(const IsingModel& m) {
  nlohmann::json edges = nlohmann::json::array();
  const auto& e = m.graph.edges();
  for (std::size_t i = 0; i < e.size(); ++i) edges.push_back({e[i].u + 1, e[i].v + 1, m.coupling[i]});
  return {{"d", m.num_nodes()}, {"edges", std::move(edges)}, {"bias", m.bias}};
}

inline IsingModel model_from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>();
  std::vector<std::pair<Edge, double>> entries;
  for (const auto& row : j.at("edges")) {
    if (!row.is_array() || row.size() != 3) throw std::runtime_error("model edge entries must be [v, v', theta]");
    const int a = row[0].get<int>(), b = row[1].get<int>();
    if (a < 1 || b < 1 || a > d || b > d) throw std::runtime_error("model edge node index out of range");
    entries.emplace_back(make_edge(a - 1, b - 1), row[2].get<double>());
  }
  std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Edge> edges;
  std::vector<double> coupling;
  for (const auto& [edge, theta] : entries) {
    edges.push_back(edge);
    coupling.push_back(theta);
  }
  return IsingModel(Graph(d, std::move(edges)), j.at("bias").get<std::vector<double>>(), std::move(coupling));
}

}  // namespace mrfbench
