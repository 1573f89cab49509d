#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "treegap/error.hpp"
#include "treegap/generic.hpp"
#include "treegap/metric.hpp"
#include "treegap/simplex.hpp"
#include "treegap/tree.hpp"

// Independent checks on the closed-form results. Everything here works from
// raw distances (or finite differences) rather than from the edge formulas.

namespace treegap {

struct MinimizationResult {
  double value = 0.0;
  /// May contain zeros: the minimum is taken over the closed simplex product.
  LoadVector argmin;
  long iterations = 0;
  bool converged = false;
};

struct MinimizerOptions {
  double gradient_tol = 1e-11;
  long max_iterations = 1'000'000;
};

namespace detail {

/// Euclidean projection onto {x >= 0, sum x = 1} (sort-based).
inline void project_to_simplex(Eigen::Ref<Eigen::VectorXd> x) {
  const Eigen::Index k = x.size();
  std::vector<double> u(x.data(), x.data() + k);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (Eigen::Index r = 0; r < k; ++r) {
    cumulative += u[static_cast<std::size_t>(r)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(r + 1);
    if (u[static_cast<std::size_t>(r)] - candidate > 0.0) theta = candidate;
  }
  for (Eigen::Index i = 0; i < k; ++i) x(i) = std::max(x(i) - theta, 0.0);
}

inline void project(Eigen::VectorXd& x, Eigen::Index q) {
  project_to_simplex(x.head(q));
  project_to_simplex(x.tail(x.size() - q));
}

/// Symmetric H with gap(w) = w' H w / 2 on the normalized set: cross-team
/// entries d^p, within-team entries -d^p.
inline Eigen::MatrixXd gap_hessian(const std::function<double(std::size_t, std::size_t)>& dist,
                                   std::size_t q, std::size_t t, double p) {
  const auto k = static_cast<Eigen::Index>(q + t);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const bool same = (static_cast<std::size_t>(i) < q) == (static_cast<std::size_t>(j) < q);
      const double d = std::pow(dist(static_cast<std::size_t>(i), static_cast<std::size_t>(j)), p);
      h(i, j) = h(j, i) = same ? -d : d;
    }
  return h;
}

/// Extreme eigenvalues of H compressed to the tangent space of the simplex product.
inline std::pair<double, double> tangent_spectrum(const Eigen::MatrixXd& h, Eigen::Index q) {
  const Eigen::Index k = h.rows();
  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(k, k);
  proj.topLeftCorner(q, q).array() -= 1.0 / static_cast<double>(q);
  proj.bottomRightCorner(k - q, k - q).array() -= 1.0 / static_cast<double>(k - q);
  Eigen::MatrixXd c = proj * h * proj;
  c = (0.5 * (c + c.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c, Eigen::EigenvaluesOnly);
  return {solver.eigenvalues()(0), solver.eigenvalues()(k - 1)};
}

struct PgRun {
  Eigen::VectorXd x;
  long iterations = 0;
  bool converged = false;
};

/// Projected gradient with step 1/L, optionally accelerated (FISTA with
/// gradient-based restart). Stops on the gradient-mapping norm.
inline PgRun projected_gradient(const Eigen::MatrixXd& h, Eigen::Index q, Eigen::VectorXd x, double lipschitz,
                                bool accelerate, double tol, long max_iterations) {
  PgRun run;
  project(x, q);
  if (!(lipschitz > 0.0)) {
    run.x = std::move(x);
    run.converged = true;
    return run;
  }
  Eigen::VectorXd y = x, next;
  double t = 1.0;
  for (long it = 1; it <= max_iterations; ++it) {
    next = y - (h * y) / lipschitz;
    project(next, q);
    run.iterations = it;
    if (lipschitz * (y - next).norm() <= tol) {
      run.converged = true;
      x = std::move(next);
      break;
    }
    if (accelerate) {
      if ((y - next).dot(next - x) > 0.0) {
        t = 1.0;
        y = next;
      } else {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = next + ((t - 1.0) / t_next) * (next - x);
        t = t_next;
      }
    } else {
      y = next;
    }
    x = std::move(next);
  }
  run.x = std::move(x);
  return run;
}

inline LoadVector split_load(const Eigen::VectorXd& x, std::size_t q) {
  LoadVector w;
  for (Eigen::Index i = 0; i < x.size(); ++i) (static_cast<std::size_t>(i) < q ? w.m : w.n).push_back(x(i));
  return w;
}

}  // namespace detail

/// Minimum of the gap over the closed product of the two probability
/// simplexes, for a simplex in a metric tree. The objective is the direct
/// quadratic in the distances, which is convex on that set for tree hosts.
inline MinimizationResult minimize_gap_over_loads(const Simplex& s, const MinimizerOptions& opts = {}) {
  s.tree();
  const auto q = static_cast<Eigen::Index>(s.q());
  const Eigen::MatrixXd h =
      detail::gap_hessian([&](std::size_t i, std::size_t j) { return s.distance(i, j); }, s.q(), s.t(), 1.0);
  const double lipschitz = std::max(0.0, detail::tangent_spectrum(h, q).second);

  Eigen::VectorXd start(h.rows());
  start.head(q).setConstant(1.0 / static_cast<double>(s.q()));
  start.tail(h.rows() - q).setConstant(1.0 / static_cast<double>(s.t()));
  const auto run = detail::projected_gradient(h, q, start, lipschitz, true, opts.gradient_tol, opts.max_iterations);

  MinimizationResult out;
  out.value = 0.5 * run.x.dot(h * run.x);
  out.argmin = detail::split_load(run.x, s.q());
  out.iterations = run.iterations;
  out.converged = run.converged;
  return out;
}

struct BruteForceResult {
  double gamma = std::numeric_limits<double>::infinity();
  std::vector<VertexId> best_a;
  std::vector<VertexId> best_b;
  LoadVector best_load;
  std::size_t labelings = 0;
  std::size_t unconverged = 0;
};

/// Visits every labeling of the tree's vertices into {absent, a, b} with both
/// teams nonempty, once per team swap, in base-3 counting order.
inline void for_each_labeling(std::size_t n,
                              const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> code(n, 0);
  for (;;) {
    std::size_t k = 0;
    while (k < n && code[k] == 2) code[k++] = 0;
    if (k == n) return;
    ++code[k];
    bool has_a = false, has_b = false;
    int first = 0;
    for (int c : code) {
      if (c != 0 && first == 0) first = c;
      has_a |= c == 1;
      has_b |= c == 2;
    }
    if (has_a && has_b && first == 1) visit(code);
  }
}

/// Infimum of the gap over all normalized simplexes, by exhaustive
/// enumeration of labelings and convex minimization of each.
inline BruteForceResult brute_force_gamma(const TreeHost& tree, std::size_t max_vertices = 9,
                                          const MinimizerOptions& opts = {}) {
  const std::size_t n = tree->size();
  if (n > max_vertices) {
    throw Error(ErrorCode::TooLarge, std::to_string(n) + " vertices exceeds the enumeration cap of " +
                                         std::to_string(max_vertices));
  }
  if (n < 2) throw Error(ErrorCode::TooFewVertices, "need at least two vertices");
  BruteForceResult best;
  for_each_labeling(n, [&](const std::vector<int>& code) {
    std::vector<VertexId> a, b;
    for (std::size_t v = 0; v < n; ++v) {
      if (code[v] == 1) a.push_back(tree->label(v));
      if (code[v] == 2) b.push_back(tree->label(v));
    }
    const Simplex s = make_simplex(tree, a, b);
    const MinimizationResult r = minimize_gap_over_loads(s, opts);
    ++best.labelings;
    if (!r.converged) ++best.unconverged;
    if (r.value < best.gamma) {
      best.gamma = r.value;
      best.best_a = std::move(a);
      best.best_b = std::move(b);
      best.best_load = r.argmin;
    }
  });
  return best;
}

/// Heuristic upper estimate of the p-negative type gap of a small metric.
///
/// Every labeling is minimized by projected gradient from the centroid and
/// from `restarts` random points of the lattice with denominator
/// `grid_resolution` (in each team). For p != 1 the objective need not be
/// convex, so the result is only an upper estimate.
inline double gamma_p_estimate(const FiniteMetric& metric, double p, int grid_resolution, int restarts,
                               std::uint64_t seed) {
  const std::size_t n = metric.size();
  if (n > 8) throw Error(ErrorCode::TooLarge, "gamma_p_estimate is limited to 8 points");
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "need at least two points");
  if (!(p >= 0.0)) throw Error(ErrorCode::InvalidExponent, "p must be >= 0");
  if (grid_resolution < 1 || restarts < 0) throw Error(ErrorCode::InvalidArgument, "bad grid or restarts");
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();

  for_each_labeling(n, [&](const std::vector<int>& code) {
    std::vector<std::size_t> pts;
    std::size_t q = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (code[v] == 1) { pts.push_back(v); ++q; }
    for (std::size_t v = 0; v < n; ++v)
      if (code[v] == 2) pts.push_back(v);
    const std::size_t t = pts.size() - q;
    const auto qi = static_cast<Eigen::Index>(q);
    const Eigen::MatrixXd h = detail::gap_hessian(
        [&](std::size_t i, std::size_t j) { return metric(pts[i], pts[j]); }, q, t, p);
    const auto [lo, hi] = detail::tangent_spectrum(h, qi);
    const double lipschitz = std::max(std::abs(lo), std::abs(hi));

    auto lattice_point = [&](std::size_t size) {
      std::uniform_int_distribution<std::size_t> bin(0, size - 1);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
      for (int ball = 0; ball < grid_resolution; ++ball) x(static_cast<Eigen::Index>(bin(rng))) += 1.0;
      return Eigen::VectorXd(x / grid_resolution);
    };

    for (int start = 0; start <= restarts; ++start) {
      Eigen::VectorXd x0(h.rows());
      if (start == 0) {
        x0.head(qi).setConstant(1.0 / static_cast<double>(q));
        x0.tail(h.rows() - qi).setConstant(1.0 / static_cast<double>(t));
      } else {
        x0.head(qi) = lattice_point(q);
        x0.tail(h.rows() - qi) = lattice_point(t);
      }
      const auto run = detail::projected_gradient(h, qi, x0, lipschitz, false, 1e-12, 20000);
      best = std::min(best, 0.5 * run.x.dot(h * run.x));
    }
  });
  return best;
}

/// Central-difference gradient of the extended gap at `load`.
inline LoadVector extended_gap_gradient_fd(const Simplex& s, const LoadVector& load, double h = 1e-6) {
  detail::check_load_shape(s, load);
  std::vector<double> w = load.m;
  w.insert(w.end(), load.n.begin(), load.n.end());
  auto eval = [&](const std::vector<double>& x) {
    return detail::extended_gap_unchecked(s, std::span<const double>(x.data(), s.q()),
                                          std::span<const double>(x.data() + s.q(), s.t()));
  };
  std::vector<double> grad(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    std::vector<double> up = w, down = w;
    up[k] += h;
    down[k] -= h;
    grad[k] = (eval(up) - eval(down)) / (2.0 * h);
  }
  LoadVector out;
  out.m.assign(grad.begin(), grad.begin() + static_cast<std::ptrdiff_t>(s.q()));
  out.n.assign(grad.begin() + static_cast<std::ptrdiff_t>(s.q()), grad.end());
  return out;
}

struct KktReport {
  bool ok = false;
  /// Mean partial derivative over the a-team / b-team (the two multipliers).
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double spread_m = 0.0;
  double spread_n = 0.0;
  double gamma = 0.0;
};

/// Stationarity of the extended gap at the generic weights: all a-partials
/// agree, all b-partials agree, and their average equals the gap.
inline KktReport kkt_check_generic(const TreeHost& tree, double h = 1e-6, double tol = 1e-5) {
  if (tree->edge_count() == 0) throw Error(ErrorCode::NoEdges, "tree has no edges");
  const GapReport report = gamma_T(tree);
  const LoadVector grad = extended_gap_gradient_fd(report.generic_simplex, report.generic_weights, h);
  auto stats = [](const std::vector<double>& v, double& mean, double& spread) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    spread = *hi - *lo;
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
  };
  KktReport out;
  out.gamma = report.gamma;
  stats(grad.m, out.lambda1, out.spread_m);
  stats(grad.n, out.lambda2, out.spread_n);
  out.ok = out.spread_m <= tol && out.spread_n <= tol &&
           std::abs((out.lambda1 + out.lambda2) / 2.0 - report.gamma) <= tol;
  return out;
}

namespace detail {

/// AHU encoding of the tree rooted at `root`, given adjacency lists.
inline std::string ahu_encode(const std::vector<std::vector<std::size_t>>& adj, std::size_t root,
                              std::size_t parent) {
  std::vector<std::string> parts;
  for (std::size_t c : adj[root]) {
    if (c != parent) parts.push_back(ahu_encode(adj, c, root));
  }
  std::sort(parts.begin(), parts.end());
  std::string out = "(";
  for (const auto& p : parts) out += p;
  return out + ")";
}

inline std::string canonical_form(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  if (n <= 2) return std::to_string(n);
  // Centres by repeated leaf stripping.
  std::vector<std::size_t> degree(n);
  std::vector<std::size_t> layer;
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = adj[v].size();
    if (degree[v] == 1) layer.push_back(v);
  }
  std::size_t remaining = n;
  while (remaining > 2) {
    remaining -= layer.size();
    std::vector<std::size_t> next;
    for (std::size_t v : layer)
      for (std::size_t w : adj[v])
        if (--degree[w] == 1) next.push_back(w);
    layer = std::move(next);
  }
  std::string best;
  for (std::size_t c : layer) {
    std::string code = ahu_encode(adj, c, npos);
    if (best.empty() || code < best) best = std::move(code);
  }
  return best;
}

}  // namespace detail

/// One representative of every isomorphism class of trees on n vertices,
/// labelled "v0".."v{n-1}" with unit edges.
inline std::vector<std::vector<WeightedEdge>> free_trees(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  using Adjacency = std::vector<std::vector<std::size_t>>;
  std::vector<Adjacency> current{Adjacency(1)};
  for (std::size_t size = 2; size <= n; ++size) {
    std::set<std::string> seen;
    std::vector<Adjacency> next;
    for (const auto& adj : current) {
      for (std::size_t v = 0; v < adj.size(); ++v) {
        Adjacency grown = adj;
        grown.emplace_back();
        grown[v].push_back(size - 1);
        grown[size - 1].push_back(v);
        if (seen.insert(detail::canonical_form(grown)).second) next.push_back(std::move(grown));
      }
    }
    current = std::move(next);
  }
  std::vector<std::vector<WeightedEdge>> out;
  for (const auto& adj : current) {
    std::vector<WeightedEdge> edges;
    for (std::size_t v = 0; v < adj.size(); ++v)
      for (std::size_t w : adj[v])
        if (v < w) edges.push_back({"v" + std::to_string(v), "v" + std::to_string(w), 1.0});
    out.push_back(std::move(edges));
  }
  return out;
}

}  // namespace treegap
