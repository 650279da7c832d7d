#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "mrfbench/dataset.hpp"
#include "mrfbench/pairwise.hpp"
#include "mrfbench/scores.hpp"

namespace mrfbench {

/// Parameters of one node-wise conditional: theta(node) is the bias, theta(w) for
/// w != node the (asymmetric) coupling towards w.
struct NodeParameters {
  int node = 0;
  Eigen::VectorXd theta;

  double bias() const { return theta(node); }
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double softplus(double a) noexcept { return a > 0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); }

inline double sigmoid(double a) noexcept {
  return a >= 0 ? 1.0 / (1.0 + std::exp(-a)) : std::exp(a) / (1.0 + std::exp(a));
}

/// Logistic regression of x_v on x_{-v}: design Z equals the data with column v
/// replaced by ones, so eta = Z·theta.
class NodeDesign {
 public:
  NodeDesign(const Eigen::MatrixXd& x, int v) : z_(x), y_(x.col(v)), v_(v) {
    if (v < 0 || v >= x.cols()) throw std::out_of_range("NodeDesign: node index");
    z_.col(v).setOnes();
  }

  int node() const noexcept { return v_; }
  Eigen::Index rows() const noexcept { return z_.rows(); }
  Eigen::Index cols() const noexcept { return z_.cols(); }
  const Eigen::MatrixXd& z() const noexcept { return z_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }

  Eigen::VectorXd linear_predictor(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(z_.rows());
    for (Eigen::Index j = 0; j < theta.size(); ++j)
      if (theta(j) != 0.0) eta.noalias() += theta(j) * z_.col(j);
    return eta;
  }

  double objective(const Eigen::VectorXd& theta) const { return objective_from_eta(linear_predictor(theta)); }

  double objective_from_eta(const Eigen::VectorXd& eta) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) s += y_(i) * eta(i) - softplus(eta(i));
    return s;
  }

  /// Residuals y - σ(eta).
  Eigen::VectorXd residual(const Eigen::VectorXd& eta) const {
    Eigen::VectorXd r(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) r(i) = y_(i) - sigmoid(eta(i));
    return r;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const { return z_.transpose() * residual(linear_predictor(theta)); }

  /// Zᵀ diag(σ(1-σ)) Z, the negated Hessian of the objective.
  Eigen::MatrixXd information(const Eigen::VectorXd& eta) const {
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double p = sigmoid(eta(i));
      w(i) = p * (1.0 - p);
    }
    Eigen::MatrixXd info(z_.cols(), z_.cols());
    info.setZero();
    info.selfadjointView<Eigen::Lower>().rankUpdate((z_.array().colwise() * w.array().sqrt()).matrix().transpose());
    return info.selfadjointView<Eigen::Lower>();
  }

 private:
  Eigen::MatrixXd z_;
  Eigen::VectorXd y_;
  int v_;
};

inline void check_params(const NodeParameters& p, const Dataset& data) {
  if (p.theta.size() != static_cast<Eigen::Index>(data.cols()) || p.node < 0 ||
      p.node >= static_cast<int>(data.cols()))
    throw std::invalid_argument("node parameters do not match the dataset dimension");
}

/// Σ_i [x_v η_i - log(1 + e^{η_i})], η_i = θ_v + Σ_{w≠v} x_w θ_vw.
inline double node_objective(const NodeParameters& p, const Dataset& data) {
  check_params(p, data);
  return NodeDesign(design_matrix(data), p.node).objective(p.theta);
}

inline Eigen::VectorXd node_gradient(const NodeParameters& p, const Dataset& data) {
  check_params(p, data);
  return NodeDesign(design_matrix(data), p.node).gradient(p.theta);
}

struct L2Options {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;  // on the max-norm of the gradient divided by n
};

/// Maximizes objective - λ_bias θ_v² - λ_couple Σ_{w≠v} θ_vw² by damped Newton.
inline NodeParameters fit_node_l2(const NodeDesign& design, double lambda_bias, double lambda_couple,
                                  std::optional<Eigen::VectorXd> start = std::nullopt, const L2Options& opt = {}) {
  if (lambda_bias < 0 || lambda_couple < 0) throw std::invalid_argument("fit_node_l2: negative penalty");
  const int v = design.node();
  const Eigen::Index d = design.cols();
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d, lambda_couple);
  penalty(v) = lambda_bias;

  Eigen::VectorXd theta = start ? *start : Eigen::VectorXd::Zero(d);
  if (theta.size() != d) throw std::invalid_argument("fit_node_l2: start has wrong length");

  auto penalized = [&](const Eigen::VectorXd& eta, const Eigen::VectorXd& t) {
    return design.objective_from_eta(eta) - (penalty.array() * t.array().square()).sum();
  };

  const double tol = opt.gradient_tolerance * std::max<double>(1.0, static_cast<double>(design.rows()));
  Eigen::VectorXd eta = design.linear_predictor(theta);
  double value = penalized(eta, theta);
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    const Eigen::VectorXd grad = design.z().transpose() * design.residual(eta) - 2.0 * penalty.cwiseProduct(theta);
    if (grad.lpNorm<Eigen::Infinity>() < tol) return {v, theta};

    Eigen::MatrixXd h = design.information(eta);
    h.diagonal() += 2.0 * penalty;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || grad.dot(step) <= 0) {
      h.diagonal().array() += 1e-8 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
      step = h.ldlt().solve(grad);
      if (!step.allFinite() || grad.dot(step) <= 0) step = grad;
    }

    const double slope = grad.dot(step);
    if (slope <= 1e-12 * (1.0 + std::abs(value))) {
      // Newton decrement below what the objective can resolve: Armijo is blind
      // here, and this close to the optimum the full step is safe
      theta += step;
      eta = design.linear_predictor(theta);
      value = penalized(eta, theta);
      continue;
    }
    double s = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, s *= 0.5) {
      const Eigen::VectorXd trial = theta + s * step;
      const Eigen::VectorXd trial_eta = design.linear_predictor(trial);
      const double trial_value = penalized(trial_eta, trial);
      if (trial_value >= value + 1e-4 * s * slope) {
        theta = trial;
        eta = trial_eta;
        value = trial_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  const Eigen::VectorXd grad = design.z().transpose() * design.residual(eta) - 2.0 * penalty.cwiseProduct(theta);
  if (grad.lpNorm<Eigen::Infinity>() < tol) return {v, theta};
  throw ConvergenceError("fit_node_l2: node " + std::to_string(v) + " did not reach gradient tolerance (max-norm " +
                         std::to_string(grad.lpNorm<Eigen::Infinity>()) + ")");
}

inline NodeParameters fit_node_l2(const Dataset& data, int v, double lambda_bias, double lambda_couple,
                                  std::optional<Eigen::VectorXd> start = std::nullopt, const L2Options& opt = {}) {
  if (data.rows() < 1) throw std::invalid_argument("fit_node_l2: empty dataset");
  return fit_node_l2(NodeDesign(design_matrix(data), v), lambda_bias, lambda_couple, std::move(start), opt);
}

/// Per-node KKT threshold: max_{w≠v} |Σ_i x_w (x_v - p̄_v)| at the bias-only fit σ(θ_v) = p̄_v.
inline std::vector<double> lambda_max_per_node(const Dataset& data) {
  if (data.rows() < 1) throw std::invalid_argument("lambda_max: empty dataset");
  const Eigen::MatrixXd x = design_matrix(data);
  const Eigen::MatrixXd both = x.transpose() * x;
  const double n = static_cast<double>(data.rows());
  const Eigen::Index d = x.cols();
  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index v = 0; v < d; ++v) {
    const double mean = both(v, v) / n;
    for (Eigen::Index w = 0; w < d; ++w)
      if (w != v) out[v] = std::max(out[v], std::abs(both(w, v) - mean * both(w, w)));
  }
  return out;
}

inline double lambda_max(const Dataset& data) {
  const auto per_node = lambda_max_per_node(data);
  return per_node.empty() ? 0.0 : *std::max_element(per_node.begin(), per_node.end());
}

struct L1Options {
  int max_outer = 200;
  int max_sweeps = 2000;
  double kkt_tolerance = 1e-9;  // on the gradient divided by n
};

namespace detail {
inline double soft_threshold(double z, double t) noexcept { return z > t ? z - t : (z < -t ? z + t : 0.0); }
}  // namespace detail

/// Maximizes objective - λ Σ_{w≠v} |θ_vw| (bias unpenalized) by proximal Newton:
/// coordinate descent with soft-thresholding on the local quadratic model over an
/// active set, Armijo backtracking, and a full KKT check. Zeros are exact.
inline Eigen::VectorXd fit_node_l1(const NodeDesign& design, double lambda, Eigen::VectorXd theta,
                                   const L1Options& opt = {}) {
  const int v = design.node();
  const Eigen::Index d = design.cols();
  const double n = static_cast<double>(design.rows());
  const double tol = opt.kkt_tolerance * std::max(1.0, n);
  if (theta.size() != d) throw std::invalid_argument("fit_node_l1: start has wrong length");

  auto l1 = [&](const Eigen::VectorXd& t) { return t.cwiseAbs().sum() - std::abs(t(v)); };
  auto loss = [&](const Eigen::VectorXd& eta, const Eigen::VectorXd& t) {
    return -design.objective_from_eta(eta) + lambda * l1(t);
  };

  Eigen::VectorXd eta = design.linear_predictor(theta);
  double value = loss(eta, theta);
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    const Eigen::VectorXd grad = design.z().transpose() * design.residual(eta);

    double violation = std::abs(grad(v));
    std::vector<int> active{v};
    for (Eigen::Index j = 0; j < d; ++j) {
      if (j == v) continue;
      if (theta(j) != 0.0) {
        violation = std::max(violation, std::abs(grad(j) - lambda * (theta(j) > 0 ? 1.0 : -1.0)));
        active.push_back(static_cast<int>(j));
      } else if (std::abs(grad(j)) > lambda) {
        violation = std::max(violation, std::abs(grad(j)) - lambda);
        active.push_back(static_cast<int>(j));
      }
    }
    if (violation <= tol) return theta;

    // local quadratic model restricted to the active coordinates
    const Eigen::Index k = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double p = sigmoid(eta(i));
      w(i) = p * (1.0 - p);
    }
    const Eigen::MatrixXd za = design.z()(Eigen::all, active);
    Eigen::MatrixXd h = za.transpose() * w.asDiagonal() * za;
    h.diagonal().array() += 1e-10 * n;
    Eigen::VectorXd g(k), a(k), a0(k);
    for (Eigen::Index q = 0; q < k; ++q) {
      g(q) = grad(active[q]);
      a(q) = a0(q) = theta(active[q]);
    }
    Eigen::VectorXd hd = Eigen::VectorXd::Zero(k);  // h * (a - a0)
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
      double biggest = 0.0;
      for (Eigen::Index q = 0; q < k; ++q) {
        const double c = -g(q) + hd(q);
        const double target = a(q) - c / h(q, q);
        const double next = active[q] == v ? target : detail::soft_threshold(target, lambda / h(q, q));
        const double delta = next - a(q);
        if (delta != 0.0) {
          a(q) = next;
          hd += delta * h.col(q);
          biggest = std::max(biggest, std::abs(delta) * std::sqrt(h(q, q)));
        }
      }
      if (biggest < 1e-10) break;
    }

    Eigen::VectorXd direction = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd proposal = theta;
    for (Eigen::Index q = 0; q < k; ++q) {
      direction(active[q]) = a(q) - a0(q);
      proposal(active[q]) = a(q);
    }
    const double decrease = -grad.dot(direction) + lambda * (l1(proposal) - l1(theta));
    if (decrease > -1e-12 * (1.0 + std::abs(value))) {
      // the predicted gain is below what the objective can resolve, so Armijo cannot
      // judge it; this close to the optimum the full proximal Newton step is safe
      theta = proposal;
      eta = design.linear_predictor(theta);
      value = loss(eta, theta);
      continue;
    }
    double s = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls, s *= 0.5) {
      Eigen::VectorXd trial = s == 1.0 ? proposal : Eigen::VectorXd(theta + s * direction);
      const Eigen::VectorXd trial_eta = design.linear_predictor(trial);
      const double trial_value = loss(trial_eta, trial);
      if (trial_value <= value + 1e-4 * s * decrease) {
        theta = std::move(trial);
        eta = trial_eta;
        value = trial_value;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  throw ConvergenceError("fit_node_l1: node " + std::to_string(v) + " did not satisfy KKT conditions at lambda " +
                         std::to_string(lambda));
}

struct RegularizationPath {
  int node = 0;
  std::vector<double> lambdas;             // strictly descending
  std::vector<NodeParameters> solutions;   // one per lambda
};

/// Descending grid {k/size · λ_max}, k = size..1.
inline std::vector<double> lambda_grid(double lambda_max_value, int size) {
  if (size < 1) throw std::invalid_argument("lambda_grid: size must be >= 1");
  std::vector<double> grid;
  for (int k = size; k >= 1; --k) grid.push_back(lambda_max_value * k / size);
  return grid;
}

/// Warm-started L1 path for one node. A constant column has no finite maximizer:
/// its couplings stay at zero and the bias is reported from half-count smoothing.
inline RegularizationPath regularization_path(const NodeDesign& design, const std::vector<double>& lambdas,
                                              const L1Options& opt = {}) {
  const int v = design.node();
  const Eigen::Index d = design.cols();
  const double n = static_cast<double>(design.rows());
  const double ones = design.y().sum();
  RegularizationPath path{v, lambdas, {}};
  path.solutions.reserve(lambdas.size());

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  const bool constant = ones == 0.0 || ones == n;
  if (constant) theta(v) = std::log((ones + 0.5) / (n - ones + 0.5));
  else theta(v) = std::log(ones / (n - ones));

  for (double lambda : lambdas) {
    if (!constant) theta = fit_node_l1(design, lambda, theta, opt);
    path.solutions.push_back({v, theta});
  }
  return path;
}

enum class EdgeRule { either, both };  // ∨ (max) and ∧ (min) criteria

namespace detail {
template <typename Fn>
void parallel_nodes(int d, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max(d, 1))));
  if (threads == 1) {
    for (int v = 0; v < d; ++v) fn(v);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> team;
    for (unsigned t = 0; t < threads; ++t) {
      team.emplace_back([&, t] {
        try {
          for (int v = static_cast<int>(t); v < d; v += static_cast<int>(threads)) fn(v);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}
}  // namespace detail

struct PlmL1Settings {
  int grid_size = 100;
  EdgeRule rule = EdgeRule::either;
  unsigned threads = 1;
  L1Options solver{};
};

/// Edge score = largest grid λ at which the edge is present under the chosen rule; 0 if never.
inline ScoreMatrix plml1_scores(const Dataset& data, const PlmL1Settings& cfg = {}) {
  if (cfg.grid_size < 1) throw std::invalid_argument("plml1_scores: grid_size must be >= 1");
  const int d = static_cast<int>(data.cols());
  const double top = lambda_max(data);
  ScoreMatrix scores(d);
  if (top <= 0.0) return scores;
  const auto grid = lambda_grid(top, cfg.grid_size);
  const auto steps = grid.size();
  const Eigen::MatrixXd x = design_matrix(data);

  // nonzero[v][k*d + w]: θ_vw != 0 at grid step k
  std::vector<std::vector<char>> nonzero(static_cast<std::size_t>(d));
  detail::parallel_nodes(d, cfg.threads, [&](int v) {
    const auto path = regularization_path(NodeDesign(x, v), grid, cfg.solver);
    auto& mask = nonzero[v];
    mask.assign(steps * d, 0);
    for (std::size_t k = 0; k < steps; ++k)
      for (int w = 0; w < d; ++w)
        if (w != v && path.solutions[k].theta(w) != 0.0) mask[k * d + w] = 1;
  });

  for (int v = 0; v < d; ++v) {
    for (int w = v + 1; w < d; ++w) {
      for (std::size_t k = 0; k < steps; ++k) {
        const bool a = nonzero[v][k * d + w], b = nonzero[w][k * d + v];
        if (cfg.rule == EdgeRule::either ? (a || b) : (a && b)) {
          scores.set(v, w, grid[k]);
          break;
        }
      }
    }
  }
  return scores;
}

/// λ for the bias; couplings use half of it.
inline double plmdca_lambda(std::size_t n) {
  const double nn = static_cast<double>(n);
  return n > 500 ? 0.01 * nn : (0.1 - (0.1 - 0.01) * nn / 500.0) * nn;
}

using CouplingBlock = std::array<std::array<double, 2>, 2>;

/// Zero-sum (Ising) gauge: subtract row and column means, add back the grand mean.
inline CouplingBlock ising_gauge(const CouplingBlock& k) {
  const double row[2] = {(k[0][0] + k[0][1]) / 2, (k[1][0] + k[1][1]) / 2};
  const double col[2] = {(k[0][0] + k[1][0]) / 2, (k[0][1] + k[1][1]) / 2};
  const double all = (row[0] + row[1]) / 2;
  CouplingBlock g{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) g[a][b] = k[a][b] - row[a] - col[b] + all;
  return g;
}

inline double frobenius(const CouplingBlock& k) {
  double s = 0.0;
  for (const auto& r : k)
    for (double x : r) s += x * x;
  return std::sqrt(s);
}

/// Average-product correction: S(v,w) - S̄(v,·) S̄(·,w) / S̄, means over off-diagonal entries.
inline ScoreMatrix apc(const ScoreMatrix& raw) {
  const int d = raw.dim();
  if (d < 2) return raw;
  std::vector<double> row_mean(d, 0.0);
  double total = 0.0;
  for (int v = 0; v < d; ++v) {
    for (int w = 0; w < d; ++w)
      if (w != v) row_mean[v] += raw(v, w);
    total += row_mean[v];
    row_mean[v] /= d - 1;
  }
  const double grand = total / (static_cast<double>(d) * (d - 1));
  if (grand == 0.0) return raw;
  ScoreMatrix out(d);
  for (int v = 0; v < d; ++v)
    for (int w = v + 1; w < d; ++w) out.set(v, w, raw(v, w) - row_mean[v] * row_mean[w] / grand);
  return out;
}

struct PlmDcaSettings {
  std::optional<double> lambda_bias;    // default: plmdca_lambda(n)
  std::optional<double> lambda_couple;  // default: lambda_bias / 2
  bool apply_apc = true;
  unsigned threads = 1;
  L2Options solver{};
};

inline std::vector<NodeParameters> fit_all_nodes_l2(const Dataset& data, double lambda_bias, double lambda_couple,
                                                    unsigned threads = 1, const L2Options& opt = {}) {
  const int d = static_cast<int>(data.cols());
  const Eigen::MatrixXd x = design_matrix(data);
  std::vector<NodeParameters> fits(static_cast<std::size_t>(d));
  detail::parallel_nodes(d, threads, [&](int v) { fits[v] = fit_node_l2(NodeDesign(x, v), lambda_bias, lambda_couple, std::nullopt, opt); });
  return fits;
}

/// Frobenius norm of the averaged, gauged 2x2 coupling blocks (before APC).
inline ScoreMatrix plmdca_raw_scores(const std::vector<NodeParameters>& fits) {
  const int d = static_cast<int>(fits.size());
  ScoreMatrix raw(d);
  for (int v = 0; v < d; ++v) {
    for (int w = v + 1; w < d; ++w) {
      // block from v's regression indexed (x_v, x_w); w's block indexed (x_w, x_v) is transposed
      CouplingBlock from_v{}, from_w{};
      from_v[1][1] = fits[v].theta(w);
      from_w[1][1] = fits[w].theta(v);
      const auto gv = ising_gauge(from_v);
      const auto gw = ising_gauge(from_w);
      CouplingBlock avg{};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) avg[a][b] = 0.5 * (gv[a][b] + gw[b][a]);
      raw.set(v, w, frobenius(avg));
    }
  }
  return raw;
}

inline ScoreMatrix plmdca_scores(const Dataset& data, const PlmDcaSettings& cfg = {}) {
  if (data.rows() < 1) throw std::invalid_argument("plmdca_scores: empty dataset");
  const double lb = cfg.lambda_bias.value_or(plmdca_lambda(data.rows()));
  const double lc = cfg.lambda_couple.value_or(lb / 2);
  const auto fits = fit_all_nodes_l2(data, lb, lc, cfg.threads, cfg.solver);
  const auto raw = plmdca_raw_scores(fits);
  return cfg.apply_apc ? apc(raw) : raw;
}

}  // namespace mrfbench
