#pragma once

// Min-plus linear algebra over action kernels: the discrete Lax-Oleinik
// generator, its powers, and the tropical eigenvalue via Karp's minimum mean
// cycle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wkam/action.hpp"
#include "wkam/error.hpp"
#include "wkam/lagrangian.hpp"

namespace wkam {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Grid {
  int n = 8;

  explicit Grid(int points = 8) : n(points) {
    if (n < 8) throw ConfigError("--grid must be >= 8");
  }
  double point(int i) const { return static_cast<double>(i) / n; }
  int size() const { return n; }
  /// Index of the grid point nearest to x on the circle.
  int nearest(double x) const {
    const long i = std::lround(reduce_mod1(x) * n);
    return static_cast<int>(((i % n) + n) % n);
  }
  /// Cyclic index distance.
  int distance(int i, int j) const {
    const int d = std::abs(i - j) % n;
    return std::min(d, n - d);
  }
  bool operator==(const Grid&) const = default;
};

/// Dense square matrix over the (min, +) semiring, row-major.
class MinPlusMatrix {
 public:
  MinPlusMatrix() = default;
  explicit MinPlusMatrix(std::size_t n, double fill = kInf) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  const std::vector<double>& data() const { return data_; }

  static MinPlusMatrix identity(std::size_t n) {
    MinPlusMatrix m(n, kInf);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 0.0;
    return m;
  }

  MinPlusMatrix shifted(double s) const {
    MinPlusMatrix m = *this;
    for (double& e : m.data_) e += s;
    return m;
  }

  bool operator==(const MinPlusMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// (A (x) B)[i][j] = min_k A[i][k] + B[k][j].
inline MinPlusMatrix minplus_product(const MinPlusMatrix& a, const MinPlusMatrix& b) {
  if (a.size() != b.size()) throw PreconditionError("minplus_product: shape mismatch");
  const std::size_t n = a.size();
  MinPlusMatrix c(n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    double* out = &c(i, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == kInf) continue;
      const double* brow = &b.data()[k * n];
      for (std::size_t j = 0; j < n; ++j) {
        const double v = aik + brow[j];
        if (v < out[j]) out[j] = v;
      }
    }
  }
  return c;
}

inline MinPlusMatrix entrywise_min(const MinPlusMatrix& a, const MinPlusMatrix& b) {
  MinPlusMatrix c = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) c(i, j) = std::min(a(i, j), b(i, j));
  return c;
}

struct MinPlusApplication {
  std::vector<double> values;
  std::vector<int> argmin;
};

/// u'[j] = min_i u[i] + K[i][j]; ties resolve to the smallest i.
inline MinPlusApplication minplus_apply(const MinPlusMatrix& k, std::span<const double> u) {
  if (u.size() != k.size()) throw PreconditionError("minplus_apply: shape mismatch");
  const std::size_t n = k.size();
  MinPlusApplication out{std::vector<double>(n, kInf), std::vector<int>(n, -1)};
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = u[i];
    if (ui == kInf) continue;
    const std::span<const double> row = k.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = ui + row[j];
      if (v < out.values[j]) {
        out.values[j] = v;
        out.argmin[j] = static_cast<int>(i);
      }
    }
  }
  return out;
}

/// Minimum mean weight over cycles of the complete digraph with weights K,
/// by Karp's dynamic program with a zero-weight virtual source.
inline double min_mean_cycle(const MinPlusMatrix& k) {
  const std::size_t n = k.size();
  if (n == 0) throw PreconditionError("min_mean_cycle: empty matrix");
  // D[l][v]: least weight of an l-edge walk ending at v.
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(n, kInf));
  std::fill(d[0].begin(), d[0].end(), 0.0);
  for (std::size_t l = 1; l <= n; ++l) {
    const std::vector<double>& prev = d[l - 1];
    std::vector<double>& cur = d[l];
    for (std::size_t u = 0; u < n; ++u) {
      if (prev[u] == kInf) continue;
      const std::span<const double> row = k.row(u);
      for (std::size_t v = 0; v < n; ++v) {
        const double w = prev[u] + row[v];
        if (w < cur[v]) cur[v] = w;
      }
    }
  }
  double best = kInf;
  for (std::size_t v = 0; v < n; ++v) {
    if (d[n][v] == kInf) continue;
    double worst = -kInf;
    for (std::size_t l = 0; l < n; ++l) {
      if (d[l][v] == kInf) continue;
      worst = std::max(worst, (d[n][v] - d[l][v]) / static_cast<double>(n - l));
    }
    best = std::min(best, worst);
  }
  return best;
}

/// Discrete Lax-Oleinik generator: K[i][j] = F_{s, s+duration}(x_i, x_j).
struct TropicalKernel {
  Grid grid;
  double start = 0.0;
  double duration = 1.0;
  MinPlusMatrix matrix;

  double operator()(int i, int j) const { return matrix(i, j); }
};

struct GridFunction {
  Grid grid;
  std::vector<double> values;

  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
};

/// Per-pair minimization. Failures are re-raised annotated with (i, j).
template <Lagrangian S>
TropicalKernel assemble_kernel(const S& sys, const Grid& grid, double start, double duration,
                               const MinimizationSettings& cfg = {}) {
  if (!(duration > 0.0)) throw PreconditionError("assemble_kernel: duration must be positive");
  cfg.validate();
  TropicalKernel k{grid, start, duration, MinPlusMatrix(grid.n, kInf)};
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      try {
        k.matrix(i, j) =
            minimal_action(sys, grid.point(i), start, grid.point(j), start + duration, cfg).value;
      } catch (const NumericalError& e) {
        throw NumericalError("assemble_kernel (" + std::to_string(i) + "," + std::to_string(j) +
                                 "): " + e.what(),
                             e.residual());
      }
    }
  }
  return k;
}

inline MinPlusApplication minplus_apply(const TropicalKernel& k, const GridFunction& u) {
  if (!(u.grid == k.grid)) throw PreconditionError("minplus_apply: grid mismatch");
  return minplus_apply(k.matrix, u.values);
}

/// c = -(min mean cycle) / duration.
inline double karp_eigenvalue(const MinPlusMatrix& k, double duration = 1.0) {
  return -min_mean_cycle(k) / duration + 0.0;  // no negative zero
}

inline double karp_eigenvalue(const TropicalKernel& k) {
  return karp_eigenvalue(k.matrix, k.duration);
}

struct EigenvectorResult {
  std::vector<double> values;
  bool converged = false;
  int iterations = 0;
  double residual = kInf;  // sup |K (x) u + c - u|
};

/// Iterates u <- K (x) u + c from u = 0, subtracting min u after every sweep.
inline EigenvectorResult tropical_eigenvector(const MinPlusMatrix& k, double c, double tol,
                                              int max_iter) {
  const std::size_t n = k.size();
  std::vector<double> u(n, 0.0);
  EigenvectorResult out;
  auto normalize = [](std::vector<double>& w) {
    const double m = *std::min_element(w.begin(), w.end());
    for (double& e : w) e -= m;
  };
  auto sweep = [&](const std::vector<double>& w) {
    std::vector<double> next = minplus_apply(k, w).values;
    for (double& e : next) e += c;
    return next;
  };
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<double> next = sweep(u);
    normalize(next);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - u[i]));
    u.swap(next);
    out.iterations = it;
    if (change <= tol) {
      out.converged = true;
      break;
    }
  }
  const std::vector<double> image = sweep(u);
  out.residual = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    out.residual = std::max(out.residual, std::abs(image[i] - u[i]));
  out.converged = out.converged && out.residual <= tol;
  out.values = std::move(u);
  return out;
}

}  // namespace wkam
