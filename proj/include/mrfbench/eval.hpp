#pragma once

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mrfbench/graph.hpp"
#include "mrfbench/scores.hpp"

namespace mrfbench {

struct RankedEdge {
  Edge edge;
  double score;
};

using EdgeRanking = std::vector<RankedEdge>;

/// All d(d-1)/2 pairs, descending by score; ties in canonical (lexicographic) edge order.
inline EdgeRanking rank_edges(const ScoreMatrix& scores) {
  EdgeRanking r;
  const int d = scores.dim();
  r.reserve(static_cast<std::size_t>(d) * (d - 1) / 2);
  for (int u = 0; u < d; ++u)
    for (int v = u + 1; v < d; ++v) r.push_back({{u, v}, scores(u, v)});
  std::stable_sort(r.begin(), r.end(), [](const RankedEdge& a, const RankedEdge& b) { return a.score > b.score; });
  return r;
}

struct PRPoint {
  double recall;
  double precision;
};

struct PRCurve {
  std::vector<PRPoint> points;   // one per ranked prefix k = 1..K
  double auc = 0.0;
  std::map<double, double> rc_at;

  double recall_at_precision(double threshold) const {
    double best = 0.0;
    for (const auto& p : points)
      if (p.precision >= threshold) best = std::max(best, p.recall);
    return best;
  }
};

/// Trapezoidal area over (recall, precision), anchored at (0, first precision),
/// runs of equal recall collapsed to their maximum precision.
inline double pr_auc(const std::vector<PRPoint>& points) {
  if (points.empty()) return 0.0;
  std::vector<PRPoint> curve{{0.0, points.front().precision}};
  for (const auto& p : points) {
    if (p.recall == curve.back().recall) curve.back().precision = std::max(curve.back().precision, p.precision);
    else curve.push_back(p);
  }
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve[i].recall - curve[i - 1].recall) * 0.5 * (curve[i].precision + curve[i - 1].precision);
  return area;
}

inline PRCurve pr_curve(const EdgeRanking& ranking, const Graph& truth, const std::vector<double>& thresholds = {0.90}) {
  if (truth.num_edges() == 0) throw std::invalid_argument("pr_curve: truth graph has no edges");
  const double total = static_cast<double>(truth.num_edges());
  PRCurve c;
  c.points.reserve(ranking.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    const auto& e = ranking[k].edge;
    if (e.v >= truth.num_nodes()) throw std::invalid_argument("pr_curve: ranking and truth dimensions differ");
    if (truth.has_edge(e.u, e.v)) ++tp;
    c.points.push_back({static_cast<double>(tp) / total, static_cast<double>(tp) / static_cast<double>(k + 1)});
  }
  c.auc = pr_auc(c.points);
  for (double t : thresholds) c.rc_at[t] = c.recall_at_precision(t);
  return c;
}

inline void write_pr_csv(std::ostream& os, const PRCurve& c) {
  std::ostringstream out;
  out << std::setprecision(17) << "prefix_k,recall,precision\n";
  for (std::size_t k = 0; k < c.points.size(); ++k)
    out << k + 1 << ',' << c.points[k].recall << ',' << c.points[k].precision << '\n';
  os << out.str();
}

/// Ranked edge list "v v' score", 1-based, descending.
inline void write_ranked_edges(std::ostream& os, const EdgeRanking& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& e : r) out << e.edge.u + 1 << ' ' << e.edge.v + 1 << ' ' << e.score << '\n';
  os << out.str();
}

}  // namespace mrfbench
