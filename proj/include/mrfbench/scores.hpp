#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrfbench {

/// Symmetric d x d edge scores with zero diagonal. Writes go to both (v,w) and (w,v).
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  explicit ScoreMatrix(int d) : d_(d), s_(static_cast<std::size_t>(d) * d, 0.0) {
    if (d < 0) throw std::invalid_argument("ScoreMatrix: negative dimension");
  }

  /// From a dense row-major matrix; rejects asymmetric input beyond `tol`, zeroes the diagonal.
  static ScoreMatrix from_dense(int d, const std::vector<double>& dense, double tol = 0.0) {
    if (dense.size() != static_cast<std::size_t>(d) * d) throw std::invalid_argument("ScoreMatrix: size mismatch");
    ScoreMatrix m(d);
    for (int v = 0; v < d; ++v) {
      for (int w = v + 1; w < d; ++w) {
        const double a = dense[v * d + w], b = dense[w * d + v];
        if (std::abs(a - b) > tol) throw std::invalid_argument("ScoreMatrix: input is not symmetric");
        m.set(v, w, 0.5 * (a + b));
      }
    }
    return m;
  }

  int dim() const noexcept { return d_; }
  double operator()(int v, int w) const { return s_[index(v, w)]; }

  void set(int v, int w, double x) {
    if (v == w) throw std::invalid_argument("ScoreMatrix: diagonal is fixed at zero");
    s_[index(v, w)] = x;
    s_[index(w, v)] = x;
  }

  const std::vector<double>& dense() const& noexcept { return s_; }
  std::vector<double> dense() && noexcept { return std::move(s_); }

 private:
  std::size_t index(int v, int w) const { return static_cast<std::size_t>(v) * d_ + w; }

  int d_ = 0;
  std::vector<double> s_;
};

inline void write_scores_csv(std::ostream& os, const ScoreMatrix& m) {
  std::ostringstream line;
  line << std::setprecision(17);
  for (int v = 0; v < m.dim(); ++v) {
    for (int w = 0; w < m.dim(); ++w) {
      if (w) line << ',';
      line << m(v, w);
    }
    line << '\n';
  }
  os << line.str();
}

inline ScoreMatrix read_scores_csv(std::istream& is) {
  std::vector<double> dense;
  std::string line;
  int rows = 0;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ls, cell, ',')) {
      dense.push_back(std::stod(cell));
      ++count;
    }
    if (rows == 0) width = count;
    else if (count != width) throw std::runtime_error("score csv: ragged row");
    ++rows;
  }
  if (static_cast<std::size_t>(rows) != width) throw std::runtime_error("score csv: matrix is not square");
  return ScoreMatrix::from_dense(rows, dense, 1e-9);
}

}  // namespace mrfbench
