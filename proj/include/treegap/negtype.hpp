#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "treegap/error.hpp"
#include "treegap/generic.hpp"
#include "treegap/metric.hpp"
#include "treegap/simplex.hpp"
#include "treegap/tree.hpp"

namespace treegap {

enum class NegTypeStatus { Strict, NonStrict, Fails, Marginal };

inline const char* to_string(NegTypeStatus s) {
  switch (s) {
    case NegTypeStatus::Strict: return "strict";
    case NegTypeStatus::NonStrict: return "non_strict";
    case NegTypeStatus::Fails: return "fails";
    case NegTypeStatus::Marginal: return "marginal";
  }
  return "unknown";
}

/// Default relative tolerance of the eigenvalue test.
inline constexpr double kEigenTol = 1e-9;

struct NegTypeVerdict {
  NegTypeStatus status = NegTypeStatus::Strict;
  /// Largest eigenvalue of the d^p form restricted to sum(eta) = 0.
  double lambda_max = 0.0;
  /// Largest entry of the d^p matrix; tolerances are relative to it.
  double scale = 0.0;
  /// Unit mean-zero eigenvector for lambda_max; absent for strict verdicts.
  std::optional<std::vector<double>> certificate;

  bool holds() const { return status != NegTypeStatus::Fails; }
};

/// Matrix of d(x_i, x_j)^p with a zero diagonal for every p >= 0.
inline Eigen::MatrixXd power_matrix(const FiniteMetric& metric, double p) {
  if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidExponent, "p must be >= 0");
  const auto n = static_cast<Eigen::Index>(metric.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) m(i, j) = m(j, i) = std::pow(metric.matrix()(i, j), p);
  return m;
}

/// Orthonormal basis (columns) of the hyperplane sum(eta) = 0, taken from the
/// Householder reflection that maps e_1 onto the normalized all-ones vector.
inline Eigen::MatrixXd mean_zero_basis(Eigen::Index n) {
  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, -1.0 / std::sqrt(static_cast<double>(n)));
  u(0) += 1.0;
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - 2.0 * u * u.transpose() / u.squaredNorm();
  return h.rightCols(n - 1);
}

/// Eigenvalue test for p-negative type.
///
/// strict when lambda_max < -tol*s, fails when lambda_max > tol*s. Inside the
/// band the verdict is non_strict if lambda_max is zero to rounding accuracy
/// and marginal otherwise.
inline NegTypeVerdict has_p_negative_type(const FiniteMetric& metric, double p, double tol = kEigenTol) {
  const auto n = static_cast<Eigen::Index>(metric.size());
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "need at least two points");
  const Eigen::MatrixXd mp = power_matrix(metric, p);
  const Eigen::MatrixXd basis = mean_zero_basis(n);
  Eigen::MatrixXd restricted = basis.transpose() * mp * basis;
  restricted = (0.5 * (restricted + restricted.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(restricted);

  NegTypeVerdict v;
  v.scale = mp.maxCoeff();
  v.lambda_max = solver.eigenvalues()(n - 2);
  const double band = tol * v.scale;
  const double rounding = 1e3 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * v.scale;
  if (v.lambda_max < -band) {
    v.status = NegTypeStatus::Strict;
    return v;
  }
  if (v.lambda_max > band) {
    v.status = NegTypeStatus::Fails;
  } else {
    v.status = std::abs(v.lambda_max) <= rounding ? NegTypeStatus::NonStrict : NegTypeStatus::Marginal;
  }
  Eigen::VectorXd eta = basis * solver.eigenvectors().col(n - 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(eta(i)) > 1e-12) {
      if (eta(i) < 0) eta = -eta;
      break;
    }
  }
  v.certificate = std::vector<double>(eta.data(), eta.data() + n);
  return v;
}

inline bool has_strict_p_negative_type(const FiniteMetric& metric, double p, double tol = kEigenTol) {
  return has_p_negative_type(metric, p, tol).status == NegTypeStatus::Strict;
}

/// Cross-family d^p sum minus the within-family sums for equal-size point
/// families given by index (repetitions allowed).
inline double roundness_margin(const FiniteMetric& metric, double p, const std::vector<std::size_t>& a,
                               const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::SizeMismatch, "point families differ in size");
  auto dp = [&](std::size_t i, std::size_t j) { return i == j ? 0.0 : std::pow(metric(i, j), p); };
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t l = k + 1; l < a.size(); ++l) lhs += dp(a[k], a[l]) + dp(b[k], b[l]);
  for (std::size_t j = 0; j < a.size(); ++j)
    for (std::size_t i = 0; i < b.size(); ++i) rhs += dp(a[j], b[i]);
  return rhs - lhs;
}

struct RoundnessCheck {
  bool holds = true;
  double worst_margin = std::numeric_limits<double>::infinity();
};

/// Randomized generalized roundness-p check: each trial draws two families of
/// 1..2|X| points uniformly with repetition.
inline RoundnessCheck generalized_roundness_check(const FiniteMetric& metric, double p, int trials,
                                                  std::uint64_t seed) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (!(p >= 0.0)) throw Error(ErrorCode::InvalidExponent, "p must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, metric.size() - 1);
  std::uniform_int_distribution<std::size_t> family(1, 2 * metric.size());
  const double dmax = metric.matrix().maxCoeff();
  RoundnessCheck out;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t k = family(rng);
    std::vector<std::size_t> a(k), b(k);
    for (auto& x : a) x = pick(rng);
    for (auto& x : b) x = pick(rng);
    const double margin = roundness_margin(metric, p, a, b);
    out.worst_margin = std::min(out.worst_margin, margin);
    const double scale = static_cast<double>(k * k) * std::max(1.0, std::pow(dmax, p));
    if (margin < -1e-12 * scale) out.holds = false;
  }
  return out;
}

struct MaxPEstimate {
  double p_star = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double bracket_width = 0.0;
  NegTypeVerdict verdict_at_p_star;
  /// Negative type still held at the cap; p_star is then the cap, uncertified.
  bool cap_reached = false;
};

inline constexpr double kMaxPCap = 64.0;

/// Bisection for the largest p with p-negative type. The upper end starts at 2
/// and doubles until the test fails; reaching the cap is reported, not thrown.
inline MaxPEstimate max_negative_type(const FiniteMetric& metric, double tol = 1e-6,
                                      double eig_tol = kEigenTol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  auto holds = [&](double p) { return has_p_negative_type(metric, p, eig_tol).holds(); };
  MaxPEstimate out;
  double lo = 0.0, hi = 2.0;
  while (holds(hi)) {
    lo = hi;
    if (hi >= kMaxPCap) {
      out.p_star = out.lower = out.upper = kMaxPCap;
      out.cap_reached = true;
      out.verdict_at_p_star = has_p_negative_type(metric, kMaxPCap, eig_tol);
      return out;
    }
    hi *= 2.0;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? lo : hi) = mid;
  }
  out.lower = lo;
  out.upper = hi;
  out.bracket_width = hi - lo;
  out.p_star = 0.5 * (lo + hi);
  out.verdict_at_p_star = has_p_negative_type(metric, out.p_star, eig_tol);
  return out;
}

/// Half-width of an interval around p = 1 on which strict p-negative type
/// holds, given the 1-negative type gap. The metric is rescaled so its
/// shortest nonzero distance is 1 (and gamma with it).
inline double zeta_lower_bound(const FiniteMetric& metric, double gamma) {
  const std::size_t n = metric.size();
  if (n < 3) throw Error(ErrorCode::TooFewPoints, "zeta needs at least three points");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  const auto [s, w] = metric.distance_range();
  if (!(s < w)) throw Error(ErrorCode::DegenerateMetric, "metric is a multiple of the discrete metric");
  const double w1 = w / s;
  const double g1 = gamma / s;
  const double k = static_cast<double>((n - 1) * (n - 2));
  return std::log1p(g1 / (2.0 * w1 * k)) / std::log(w1);
}

/// Lower bound on the maximal p-negative type of any unweighted tree on n vertices.
inline double tree_maxp_lower_bound(int n) {
  if (n < 3) throw Error(ErrorCode::TooFewPoints, "bound needs n >= 3");
  const double m = n - 1.0;
  return 1.0 + std::log1p(1.0 / (m * m * m * (n - 2.0))) / std::log(m);
}

/// Maximal p-negative type of the unweighted star with n leaves.
inline double star_max_p(int n) {
  if (n < 2) throw Error(ErrorCode::TooFewLeaves, "a star needs at least two leaves");
  return 1.0 + std::log1p(1.0 / (n - 1.0)) / std::log(2.0);
}

namespace detail {

inline void append_star(int n, std::vector<VertexId>& ids, std::vector<WeightedEdge>& edges) {
  const VertexId centre = "r" + std::to_string(n);
  ids.push_back(centre);
  for (int k = 1; k <= n; ++k) {
    ids.push_back(centre + "_l" + std::to_string(k));
    edges.push_back({ids.back(), centre, 1.0});
  }
}

}  // namespace detail

/// Unweighted star: centre "r{n}" and leaves "r{n}_l{k}".
inline MetricTree build_star(int n) {
  if (n < 2) throw Error(ErrorCode::TooFewLeaves, "a star needs at least two leaves");
  std::vector<VertexId> ids;
  std::vector<WeightedEdge> edges;
  detail::append_star(n, ids, edges);
  return build_tree(std::move(ids), edges);
}

/// Stars Y_2 .. Y_N with consecutive centres joined by unit edges.
inline MetricTree build_necklace(int big_n) {
  if (big_n < 2) throw Error(ErrorCode::TooSmall, "necklace needs N >= 2");
  std::vector<VertexId> ids;
  std::vector<WeightedEdge> edges;
  for (int n = 2; n <= big_n; ++n) {
    detail::append_star(n, ids, edges);
    if (n > 2) edges.push_back({"r" + std::to_string(n - 1), "r" + std::to_string(n), 1.0});
  }
  return build_tree(std::move(ids), edges);
}

struct EnhancedCheck {
  /// -(gamma/2 * (sum|eta|)^2 + sum d(x_i,x_j) eta_i eta_j); never negative in exact arithmetic.
  double margin = 0.0;
  /// (sum|eta|)^2 times the largest distance among the points.
  double scale = 0.0;
  double gamma = 0.0;
  /// eta is the generic witness (up to sign and scale).
  bool equality = false;
};

/// Evaluates the enhanced 1-negative type inequality for mean-zero weights
/// `eta` on distinct tree vertices `points`.
inline EnhancedCheck verify_enhanced_inequality(const TreeHost& tree, const std::vector<VertexId>& points,
                                                const std::vector<double>& eta) {
  const EtaSimplex split = eta_to_simplex(tree, points, eta);
  const GapReport report = gamma_T(tree);

  std::vector<std::size_t> idx;
  for (const auto& id : points) idx.push_back(tree->index_of(id));
  double quad = 0.0, abs_sum = 0.0, dmax = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    abs_sum += std::abs(eta[i]);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      if (i == j) continue;
      const double d = tree->distance(idx[i], idx[j]);
      quad += d * eta[i] * eta[j];
      if (eta[i] != 0.0 && eta[j] != 0.0) dmax = std::max(dmax, d);
    }
  }

  EnhancedCheck out;
  out.gamma = report.gamma;
  out.margin = -(report.gamma / 2.0 * abs_sum * abs_sum + quad);
  out.scale = abs_sum * abs_sum * dmax;

  const Simplex& s = split.simplex;
  if (s.size() == tree->size() && is_generically_labeled(s)) {
    std::vector<double> generic(tree->size());
    const Simplex& g = report.generic_simplex;
    for (std::size_t slot = 0; slot < g.size(); ++slot) {
      generic[g.host_index(slot)] = g.is_a(slot) ? report.generic_weights.m()[slot]
                                                 : report.generic_weights.n()[slot - g.q()];
    }
    bool match = true;
    for (std::size_t slot = 0; slot < s.size(); ++slot) {
      const double w = s.is_a(slot) ? split.load.m()[slot] : split.load.n()[slot - s.q()];
      match = match && std::abs(w - generic[s.host_index(slot)]) <= 1e-9;
    }
    out.equality = match;
  }
  return out;
}

}  // namespace treegap
