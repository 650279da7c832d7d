#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mrfbench/dataset.hpp"
#include "mrfbench/scores.hpp"

namespace mrfbench {

/// Smoothed joint estimate for one pair from its 2x2 counts: (count + 1/4) / (n + 1).
inline double smoothed_mutual_information(double n00, double n01, double n10, double n11) {
  const double n = n00 + n01 + n10 + n11;
  const double p[2][2] = {{(n00 + 0.25) / (n + 1), (n01 + 0.25) / (n + 1)},
                          {(n10 + 0.25) / (n + 1), (n11 + 0.25) / (n + 1)}};
  const double row[2] = {p[0][0] + p[0][1], p[1][0] + p[1][1]};
  const double col[2] = {p[0][0] + p[1][0], p[0][1] + p[1][1]};
  double mi = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) mi += p[a][b] * std::log(p[a][b] / (row[a] * col[b]));
  // rounding can leave tiny negatives for factorizing tables
  return std::max(mi, 0.0);
}

inline Eigen::MatrixXd design_matrix(const Dataset& data) {
  Eigen::MatrixXd x(data.rows(), data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t v = 0; v < data.cols(); ++v) x(i, v) = data(i, v);
  return x;
}

inline ScoreMatrix mutual_information_matrix(const Dataset& data) {
  if (data.rows() < 1) throw std::invalid_argument("mutual_information_matrix: empty dataset");
  if (data.cols() < 2) throw std::invalid_argument("mutual_information_matrix: need d >= 2");
  const Eigen::MatrixXd x = design_matrix(data);
  const Eigen::MatrixXd both = x.transpose() * x;  // n11 counts; diagonal = column sums
  const double n = static_cast<double>(data.rows());
  const int d = static_cast<int>(data.cols());
  ScoreMatrix mi(d);
  for (int v = 0; v < d; ++v) {
    for (int w = v + 1; w < d; ++w) {
      const double n11 = both(v, w);
      const double n10 = both(v, v) - n11;
      const double n01 = both(w, w) - n11;
      const double n00 = n - n11 - n10 - n01;
      mi.set(v, w, smoothed_mutual_information(n00, n01, n10, n11));
    }
  }
  return mi;
}

/// Context likelihood of relatedness: row-wise z-scores (sample sd over the
/// d-1 off-diagonal entries), negatives clipped to 0, combined as sqrt(z_v² + z_w²).
inline ScoreMatrix clr(const ScoreMatrix& mi) {
  const int d = mi.dim();
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (int v = 0; v < d && d > 2; ++v) {
    double s = 0.0;
    for (int w = 0; w < d; ++w)
      if (w != v) s += mi(v, w);
    mean[v] = s / (d - 1);
    double ss = 0.0;
    for (int w = 0; w < d; ++w)
      if (w != v) ss += (mi(v, w) - mean[v]) * (mi(v, w) - mean[v]);
    sd[v] = std::sqrt(ss / (d - 2));
  }
  auto z = [&](int v, double value) {
    if (sd[v] <= 0.0) return 0.0;
    return std::max(0.0, (value - mean[v]) / sd[v]);
  };
  ScoreMatrix out(d);
  for (int v = 0; v < d; ++v) {
    for (int w = v + 1; w < d; ++w) {
      const double zv = z(v, mi(v, w)), zw = z(w, mi(v, w));
      out.set(v, w, std::sqrt(zv * zv + zw * zw));
    }
  }
  return out;
}

struct Triplet {
  int a, b, c;
};

inline std::vector<Triplet> all_triplets(int d) {
  std::vector<Triplet> t;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int c = b + 1; c < d; ++c) t.push_back({a, b, c});
  return t;
}

/// ARACNE data-processing-inequality filter over an explicit triplet list.
/// Every triplet is judged against the input matrix, so the order does not matter.
inline ScoreMatrix aracne(const ScoreMatrix& mi, double tolerance, std::span<const Triplet> triplets) {
  if (tolerance < 0) throw std::invalid_argument("aracne: tolerance must be non-negative");
  const int d = mi.dim();
  std::vector<char> removed(static_cast<std::size_t>(d) * d, 0);
  for (const auto& t : triplets) {
    std::array<std::pair<double, std::pair<int, int>>, 3> e = {{
        {mi(t.a, t.b), {t.a, t.b}}, {mi(t.a, t.c), {t.a, t.c}}, {mi(t.b, t.c), {t.b, t.c}}}};
    if (e[0].first <= 0 || e[1].first <= 0 || e[2].first <= 0) continue;
    std::sort(e.begin(), e.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    if (e[0].first + tolerance < e[1].first) {
      const auto [u, v] = e[0].second;
      removed[static_cast<std::size_t>(u) * d + v] = 1;
    }
  }
  ScoreMatrix out = mi;
  for (int u = 0; u < d; ++u)
    for (int v = u + 1; v < d; ++v)
      if (removed[static_cast<std::size_t>(u) * d + v]) out.set(u, v, 0.0);
  return out;
}

inline ScoreMatrix aracne(const ScoreMatrix& mi, double tolerance = 0.0) {
  const auto t = all_triplets(mi.dim());
  return aracne(mi, tolerance, t);
}

/// Spectral inverse of the series map G_obs = G_dir + G_dir² + ...:
/// G_dir = G_obs (I + G_obs)⁻¹, applied eigenvalue-wise as λ ↦ λ/(1+λ).
/// With `beta`, G_obs is first scaled by γ so the largest |γλ/(1+γλ)| equals beta.
inline Eigen::MatrixXd deconvolve(const Eigen::MatrixXd& obs, std::optional<double> beta) {
  if (obs.rows() != obs.cols()) throw std::invalid_argument("deconvolve: matrix must be square");
  const double scale = std::max(1.0, obs.cwiseAbs().maxCoeff());
  if (obs.size() > 0 && (obs - obs.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("deconvolve: matrix must be symmetric");
  if (beta && !(*beta > 0.0 && *beta < 1.0)) throw std::invalid_argument("deconvolve: beta must lie in (0, 1)");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(obs);
  Eigen::VectorXd lambda = eig.eigenvalues();
  if (beta) {
    const double top = std::max(0.0, lambda.maxCoeff());
    const double bottom = std::max(0.0, -lambda.minCoeff());
    double gamma = INFINITY;
    if (top > 0) gamma = std::min(gamma, *beta / ((1.0 - *beta) * top));
    if (bottom > 0) gamma = std::min(gamma, *beta / ((1.0 + *beta) * bottom));
    if (!std::isfinite(gamma)) return Eigen::MatrixXd::Zero(obs.rows(), obs.cols());
    lambda *= gamma;
  }
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(1.0 + lambda(i)) < 1e-12) throw std::domain_error("deconvolve: eigenvalue at -1");
    lambda(i) = lambda(i) / (1.0 + lambda(i));
  }
  const Eigen::MatrixXd& u = eig.eigenvectors();
  Eigen::MatrixXd dir = u * lambda.asDiagonal() * u.transpose();
  return 0.5 * (dir + dir.transpose());
}

inline ScoreMatrix network_deconvolution(const ScoreMatrix& obs, double beta = 0.95) {
  const int d = obs.dim();
  const Eigen::MatrixXd g = Eigen::Map<const Eigen::MatrixXd>(obs.dense().data(), d, d);
  const Eigen::MatrixXd dir = deconvolve(g, beta);
  ScoreMatrix out(d);
  for (int v = 0; v < d; ++v)
    for (int w = v + 1; w < d; ++w) out.set(v, w, dir(v, w));
  return out;
}

}  // namespace mrfbench
