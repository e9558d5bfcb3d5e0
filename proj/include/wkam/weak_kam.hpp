#pragma once

// Weak KAM quantities on a grid: critical value, Peierls barrier, Aubry set,
// backward/forward solutions, conjugate pairs, the semigroup limit and the
// connection graph between Aubry orbits.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wkam/action.hpp"
#include "wkam/error.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/tropical.hpp"

namespace wkam {

template <Lagrangian S>
double critical_value(const S& sys, const Grid& grid, const MinimizationSettings& cfg = {}) {
  return karp_eigenvalue(assemble_kernel(sys, grid, 0.0, 1.0, cfg));
}

/// h[i][j] ~ h(x_i,[s], x_j,[t]) at finite horizon.
struct BarrierMatrix {
  Grid grid;
  double s_frac = 0.0;
  double t_frac = 0.0;
  MinPlusMatrix entries;
  int horizon = 0;
  double defect = kInf;  // spread of the tail window around its minimum
  bool stabilized = false;

  double operator()(int i, int j) const { return entries(i, j); }
};

inline constexpr double kStabilizationTolerance = 1e-9;

/// Liminf of the c-corrected tropical powers M_n = (K + c)^n, realized as
/// the entrywise minimum over the tail window n in (horizon/2, horizon].
/// When a fractional kernel K_{0,t} is given the result is post-composed
/// with K_{0,t} + c t, giving offsets (0, t).
inline BarrierMatrix peierls_barrier(const TropicalKernel& unit, double c, int horizon,
                                     const TropicalKernel* fractional = nullptr,
                                     double stabilization_tol = kStabilizationTolerance) {
  if (horizon < 2) throw PreconditionError("peierls_barrier: horizon must be >= 2");
  if (unit.duration != 1.0) throw PreconditionError("peierls_barrier: need a unit-time kernel");
  const MinPlusMatrix step = unit.matrix.shifted(c);
  const int tail_start = horizon - std::max(1, horizon / 2) + 1;

  std::vector<MinPlusMatrix> tail;
  MinPlusMatrix power = step;
  for (int n = 1; n <= horizon; ++n) {
    if (n > 1) power = minplus_product(power, step);
    if (n >= tail_start) tail.push_back(power);
  }
  MinPlusMatrix h = tail.front();
  for (const MinPlusMatrix& m : tail) h = entrywise_min(h, m);
  double defect = 0.0;
  for (const MinPlusMatrix& m : tail)
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) defect = std::max(defect, m(i, j) - h(i, j));

  BarrierMatrix out;
  out.grid = unit.grid;
  out.s_frac = reduce_mod1(unit.start);
  out.t_frac = reduce_mod1(unit.start);
  if (fractional) {
    if (!(fractional->grid == unit.grid))
      throw PreconditionError("peierls_barrier: fractional kernel grid mismatch");
    h = minplus_product(h, fractional->matrix.shifted(c * fractional->duration));
    out.t_frac = reduce_mod1(unit.start + fractional->duration);
  }
  out.entries = std::move(h);
  out.horizon = horizon;
  out.defect = defect;
  out.stabilized = defect <= stabilization_tol;
  return out;
}

template <Lagrangian S>
BarrierMatrix peierls_barrier(const S& sys, const Grid& grid, double c, int horizon,
                              const MinimizationSettings& cfg = {}) {
  return peierls_barrier(assemble_kernel(sys, grid, 0.0, 1.0, cfg), c, horizon);
}

/// Grid-index sequence of an n-step walk from p to j realizing
/// ((K + c)^n)[p][j]; the walk has n + 1 entries.
struct BarrierPath {
  std::vector<int> nodes;
  double cost = kInf;
};

inline BarrierPath barrier_path(const TropicalKernel& unit, double c, int p, int j, int n) {
  if (n < 1) throw PreconditionError("barrier_path: n must be >= 1");
  const std::size_t size = unit.matrix.size();
  const MinPlusMatrix step = unit.matrix.shifted(c);
  std::vector<std::vector<int>> parent;
  std::vector<double> cost(size, kInf);
  cost[p] = 0.0;
  for (int l = 0; l < n; ++l) {
    MinPlusApplication next = minplus_apply(step, cost);
    parent.push_back(std::move(next.argmin));
    cost = std::move(next.values);
  }
  BarrierPath path;
  path.cost = cost[j];
  path.nodes.assign(n + 1, 0);
  path.nodes[n] = j;
  for (int l = n; l > 0; --l) path.nodes[l - 1] = parent[l - 1][path.nodes[l]];
  return path;
}

struct AubrySet {
  std::vector<int> members;
  std::vector<std::vector<int>> clusters;  // cyclically contiguous runs
  std::vector<int> representatives;        // cluster argmin of h[i][i]
  bool empty = true;
};

/// {x_i : h[i][i] <= tol}, clustered by grid adjacency on the circle.
inline AubrySet aubry_set(const BarrierMatrix& h, double tol) {
  if (h.s_frac != h.t_frac) throw PreconditionError("aubry_set: barrier offsets must match");
  const int n = h.grid.n;
  AubrySet out;
  std::vector<bool> in(n, false);
  for (int i = 0; i < n; ++i) {
    if (h(i, i) <= tol) {
      in[i] = true;
      out.members.push_back(i);
    }
  }
  out.empty = out.members.empty();
  if (out.empty) return out;
  if (static_cast<int>(out.members.size()) == n) {
    out.clusters.push_back(out.members);
  } else {
    // start scanning just after a gap so wrap-around runs stay whole
    int start = 0;
    while (in[start]) ++start;
    std::vector<int> run;
    for (int k = 1; k <= n; ++k) {
      const int i = (start + k) % n;
      if (in[i]) {
        run.push_back(i);
      } else if (!run.empty()) {
        out.clusters.push_back(run);
        run.clear();
      }
    }
    if (!run.empty()) out.clusters.push_back(run);
    std::sort(out.clusters.begin(), out.clusters.end(),
              [](const auto& a, const auto& b) {
                return *std::min_element(a.begin(), a.end()) <
                       *std::min_element(b.begin(), b.end());
              });
  }
  for (const auto& cl : out.clusters) {
    int best = cl.front();
    for (int i : cl)
      if (h(i, i) < h(best, best) || (h(i, i) == h(best, best) && i < best)) best = i;
    out.representatives.push_back(best);
  }
  return out;
}

/// u^-(x) = h(p, x).
inline GridFunction backward_solution(const BarrierMatrix& h, int p) {
  if (p < 0 || p >= h.grid.n) throw PreconditionError("backward_solution: index out of range");
  GridFunction u{h.grid, std::vector<double>(h.grid.n)};
  for (int j = 0; j < h.grid.n; ++j) u.values[j] = h(p, j);
  return u;
}

/// u^+(x) = -h(x, p).
inline GridFunction forward_solution(const BarrierMatrix& h, int p) {
  if (p < 0 || p >= h.grid.n) throw PreconditionError("forward_solution: index out of range");
  GridFunction u{h.grid, std::vector<double>(h.grid.n)};
  for (int j = 0; j < h.grid.n; ++j) u.values[j] = -h(j, p);
  return u;
}

struct CoincidenceSet {
  std::vector<int> points;
  double shift = 0.0;  // constant added to u^+ before comparison
};

/// I(u^-, u^+) = {x_i : |u^-[i] - u^+[i]| <= tol} after shifting u^+ so that
/// min over Aubry representatives of (u^- - u^+) vanishes. Throws when the
/// pair does not agree on the representatives.
inline CoincidenceSet conjugate_pair_coincidence(const GridFunction& u_minus,
                                                 const GridFunction& u_plus,
                                                 const std::vector<int>& aubry_representatives,
                                                 double tol) {
  if (!(u_minus.grid == u_plus.grid))
    throw PreconditionError("conjugate_pair_coincidence: grid mismatch");
  if (aubry_representatives.empty())
    throw PreconditionError("conjugate_pair_coincidence: no Aubry representatives");
  CoincidenceSet out;
  double shift = kInf;
  for (int r : aubry_representatives)
    shift = std::min(shift, u_minus.values[r] - u_plus.values[r]);
  out.shift = shift;
  double worst = 0.0;
  for (int r : aubry_representatives)
    worst = std::max(worst, std::abs(u_minus.values[r] - (u_plus.values[r] + shift)));
  if (worst > tol)
    throw PreconditionError("conjugate_pair_coincidence: pair is not conjugated (gap " +
                                std::to_string(worst) + ")",
                            worst);
  for (int i = 0; i < u_minus.grid.n; ++i)
    if (std::abs(u_minus.values[i] - (u_plus.values[i] + shift)) <= tol) out.points.push_back(i);
  return out;
}

/// u_bar[j] = min_i u0[i] + h[i][j].
inline GridFunction bar_u(const GridFunction& u0, const BarrierMatrix& h) {
  if (!(u0.grid == h.grid)) throw PreconditionError("bar_u: grid mismatch");
  return {h.grid, minplus_apply(h.entries, u0.values).values};
}

struct SemigroupLimit {
  GridFunction limit;
  int iterations = 0;
  bool converged = false;
};

/// Iterates u <- K (x) u + c until consecutive iterates agree within tol.
inline SemigroupLimit semigroup_limit(const TropicalKernel& unit, double c,
                                      const GridFunction& u0, int max_iter = 2000,
                                      double tol = 1e-13) {
  SemigroupLimit out{u0, 0, false};
  const MinPlusMatrix step = unit.matrix.shifted(c);
  for (int k = 1; k <= max_iter; ++k) {
    std::vector<double> next = minplus_apply(step, out.limit.values).values;
    double change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i)
      change = std::max(change, std::abs(next[i] - out.limit.values[i]));
    out.limit.values.swap(next);
    out.iterations = k;
    if (change <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

struct GraphEdge {
  int from = 0;  // index into the vertex list
  int to = 0;
  double slack = 0.0;
};

struct ConnectionGraph {
  std::vector<int> vertices;  // grid indices of Aubry representatives
  int target = 0;
  std::vector<GraphEdge> edges;
  std::vector<int> roots;     // vertex list indices with no incoming edge
  bool acyclic = true;
  std::vector<int> cycle;     // offending cycle (vertex list indices) if any
};

/// Edge j -> k iff |h(x_k, z) - h(x_k, x_j) - h(x_j, z)| <= tol.
inline ConnectionGraph connection_graph(const BarrierMatrix& h,
                                        const std::vector<int>& representatives, int target,
                                        double tol) {
  if (representatives.empty())
    throw PreconditionError("connection_graph: need at least one Aubry representative");
  ConnectionGraph g;
  g.vertices = representatives;
  g.target = target;
  const int m = static_cast<int>(representatives.size());
  std::vector<std::vector<int>> adj(m);
  std::vector<int> indegree(m, 0);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      if (j == k) continue;
      const int xj = representatives[j];
      const int xk = representatives[k];
      const double slack = std::abs(h(xk, target) - h(xk, xj) - h(xj, target));
      if (slack <= tol) {
        g.edges.push_back({j, k, slack});
        adj[j].push_back(k);
        ++indegree[k];
      }
    }
  }
  for (int k = 0; k < m; ++k)
    if (indegree[k] == 0) g.roots.push_back(k);

  // Depth-first search with colors; records the first back-edge cycle.
  std::vector<int> color(m, 0), parent(m, -1);
  auto dfs = [&](auto&& self, int u) -> bool {
    color[u] = 1;
    for (int w : adj[u]) {
      if (color[w] == 1) {
        std::vector<int> cyc{w};
        for (int x = u; x != w; x = parent[x]) cyc.push_back(x);
        std::reverse(cyc.begin() + 1, cyc.end());
        g.cycle = cyc;
        return true;
      }
      if (color[w] == 0) {
        parent[w] = u;
        if (self(self, w)) return true;
      }
    }
    color[u] = 2;
    return false;
  };
  for (int u = 0; u < m && g.acyclic; ++u)
    if (color[u] == 0 && dfs(dfs, u)) g.acyclic = false;
  return g;
}

/// Aubry-detection tolerance: ten times the kernel error of the free system
/// against its closed form at the same resolution, floored at 1e-6.
inline double default_aubry_tolerance(const Grid& grid, const MinimizationSettings& cfg = {}) {
  const TropicalKernel k = assemble_kernel(LagrangianSystem::free(), grid, 0.0, 1.0, cfg);
  double err = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      const double d = grid.point(j) - grid.point(i);
      double exact = kInf;
      for (long w : winding_candidates(1.0, cfg.winding_range))
        exact = std::min(exact, 0.5 * (d + w) * (d + w));
      err = std::max(err, std::abs(k(i, j) - exact));
    }
  }
  return std::max(10.0 * err, 1e-6);
}

}  // namespace wkam
