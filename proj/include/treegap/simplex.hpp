#pragma once

#include <cmath>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "treegap/error.hpp"
#include "treegap/metric.hpp"
#include "treegap/tree.hpp"

namespace treegap {

using TreeHost = std::shared_ptr<const MetricTree>;
using MetricHost = std::shared_ptr<const FiniteMetric>;

inline TreeHost share(MetricTree tree) { return std::make_shared<const MetricTree>(std::move(tree)); }
inline MetricHost share(FiniteMetric metric) {
  return std::make_shared<const FiniteMetric>(std::move(metric));
}

/// Tolerance on team sums for a load vector to count as normalized.
inline constexpr double kNormalizationTol = 1e-12;

/// Weights m_j on the a-team and n_i on the b-team.
struct LoadVector {
  std::vector<double> m;
  std::vector<double> n;
};

/// A load vector with strictly positive entries and both team sums equal to 1.
class NormalizedLoadVector {
 public:
  explicit NormalizedLoadVector(LoadVector w) : w_(std::move(w)) {
    for (const auto* team : {&w_.m, &w_.n}) {
      if (team->empty()) throw Error(ErrorCode::EmptyTeam, "load vector has an empty team");
      double sum = 0.0;
      for (double x : *team) {
        if (!(x > 0.0) || !std::isfinite(x)) {
          throw Error(ErrorCode::NonPositiveLoad, "load entry " + std::to_string(x) + " is not positive");
        }
        sum += x;
      }
      if (std::abs(sum - 1.0) > kNormalizationTol) {
        throw Error(ErrorCode::NotNormalized, "team sum is " + std::to_string(sum));
      }
    }
  }

  const std::vector<double>& m() const { return w_.m; }
  const std::vector<double>& n() const { return w_.n; }
  const LoadVector& raw() const { return w_; }
  operator const LoadVector&() const { return w_; }

 private:
  LoadVector w_;
};

/// A (q,t)-simplex: q + t distinct points split into an a-team and a b-team,
/// living in either a metric tree or an arbitrary finite metric.
///
/// Slots number the simplex vertices a_1..a_q, b_1..b_t as 0..q+t-1.
class Simplex {
 public:
  std::size_t q() const { return a_.size(); }
  std::size_t t() const { return b_.size(); }
  std::size_t size() const { return a_.size() + b_.size(); }

  const std::vector<VertexId>& a_team() const { return a_; }
  const std::vector<VertexId>& b_team() const { return b_; }
  const VertexId& vertex(std::size_t slot) const { return slot < q() ? a_[slot] : b_[slot - q()]; }
  bool is_a(std::size_t slot) const { return slot < q(); }

  bool on_tree() const { return tree_ != nullptr; }
  const TreeHost& tree_ptr() const { return tree_; }
  const MetricHost& metric_ptr() const { return metric_; }

  const MetricTree& tree() const {
    if (!tree_) throw Error(ErrorCode::NotATreeHost, "simplex does not live in a metric tree");
    return *tree_;
  }

  /// T_D, re-rooted at its smallest leaf.
  const MetricTree& minimal_subtree() const {
    tree();
    return *minimal_;
  }

  /// Host-indexed membership mask of T_D.
  const std::vector<bool>& minimal_mask() const {
    tree();
    return mask_;
  }

  /// Edges of T_D, addressed by the host index of their left vertex.
  const std::vector<std::size_t>& minimal_edges() const {
    tree();
    return td_edges_;
  }

  std::size_t host_index(std::size_t slot) const { return host_idx_[slot]; }

  /// Slot of host vertex `v`, or npos when v is not a simplex vertex.
  std::size_t slot_of_host(std::size_t v) const {
    for (std::size_t s = 0; s < size(); ++s) {
      if (host_idx_[s] == v) return s;
    }
    return npos;
  }

  double distance(std::size_t s1, std::size_t s2) const {
    if (tree_) return tree_->distance(host_idx_[s1], host_idx_[s2]);
    return (*metric_)(host_idx_[s1], host_idx_[s2]);
  }

 private:
  template <typename Host>
  friend Simplex make_simplex_impl(const Host&, std::vector<VertexId>, std::vector<VertexId>);

  std::vector<VertexId> a_, b_;
  std::vector<std::size_t> host_idx_;
  TreeHost tree_;
  MetricHost metric_;
  std::shared_ptr<const MetricTree> minimal_;
  std::vector<bool> mask_;
  std::vector<std::size_t> td_edges_;
};

template <typename Host>
Simplex make_simplex_impl(const Host& host, std::vector<VertexId> a_team, std::vector<VertexId> b_team) {
  if (!host) throw Error(ErrorCode::InvalidArgument, "null simplex host");
  if (a_team.empty() || b_team.empty()) throw Error(ErrorCode::EmptyTeam, "both teams must be nonempty");
  Simplex s;
  std::set<VertexId> seen;
  for (const auto* team : {&a_team, &b_team}) {
    for (const auto& id : *team) {
      if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateVertex, "vertex '" + id + "' repeats");
      s.host_idx_.push_back(host->index_of(id));
    }
  }
  s.a_ = std::move(a_team);
  s.b_ = std::move(b_team);
  if constexpr (std::is_same_v<Host, TreeHost>) {
    s.tree_ = host;
    s.mask_ = minimal_subtree_mask(*host, s.host_idx_);
    for (std::size_t v = 0; v < host->size(); ++v) {
      if (v != host->root() && s.mask_[v] && s.mask_[host->parent(v)]) s.td_edges_.push_back(v);
    }
    s.minimal_ = std::make_shared<const MetricTree>(induced_subtree(*host, s.mask_));
  } else {
    s.metric_ = host;
  }
  return s;
}

inline Simplex make_simplex(const TreeHost& host, std::vector<VertexId> a_team, std::vector<VertexId> b_team) {
  return make_simplex_impl(host, std::move(a_team), std::move(b_team));
}

inline Simplex make_simplex(const MetricHost& host, std::vector<VertexId> a_team, std::vector<VertexId> b_team) {
  return make_simplex_impl(host, std::move(a_team), std::move(b_team));
}

/// Team weight on each side of an oriented edge. The `_strict` variants leave
/// out the edge's own endpoint on that side.
struct PartitionSums {
  OrientedEdge edge;
  double alpha_l = 0, alpha_r = 0, beta_l = 0, beta_r = 0;
  double alpha_l_strict = 0, alpha_r_strict = 0, beta_l_strict = 0, beta_r_strict = 0;
};

namespace detail {

inline void check_load_shape(const Simplex& s, const LoadVector& w) {
  if (w.m.size() != s.q() || w.n.size() != s.t()) {
    throw Error(ErrorCode::SizeMismatch, "load vector shape (" + std::to_string(w.m.size()) + "," +
                                             std::to_string(w.n.size()) + ") vs simplex (" +
                                             std::to_string(s.q()) + "," + std::to_string(s.t()) + ")");
  }
}

/// Partition sums for every edge of T_D in one bottom-up pass; no sign or
/// normalization requirements on the weights.
inline std::vector<PartitionSums> all_partition_sums(const Simplex& s, std::span<const double> m,
                                                     std::span<const double> n) {
  const MetricTree& tree = s.tree();
  const std::size_t nv = tree.size();
  std::vector<double> a_at(nv, 0.0), b_at(nv, 0.0);
  for (std::size_t j = 0; j < s.q(); ++j) a_at[s.host_index(j)] = m[j];
  for (std::size_t i = 0; i < s.t(); ++i) b_at[s.host_index(s.q() + i)] = n[i];

  std::vector<double> a_sub = a_at, b_sub = b_at;
  const auto& order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t p = tree.parent(*it);
    if (p == npos) continue;
    a_sub[p] += a_sub[*it];
    b_sub[p] += b_sub[*it];
  }
  const double a_total = std::accumulate(m.begin(), m.end(), 0.0);
  const double b_total = std::accumulate(n.begin(), n.end(), 0.0);

  std::vector<PartitionSums> out;
  out.reserve(s.minimal_edges().size());
  for (std::size_t l : s.minimal_edges()) {
    const std::size_t r = tree.parent(l);
    PartitionSums ps;
    ps.edge = tree.edge(l);
    ps.alpha_l = a_sub[l];
    ps.beta_l = b_sub[l];
    ps.alpha_r = a_total - a_sub[l];
    ps.beta_r = b_total - b_sub[l];
    ps.alpha_l_strict = ps.alpha_l - a_at[l];
    ps.beta_l_strict = ps.beta_l - b_at[l];
    ps.alpha_r_strict = ps.alpha_r - a_at[r];
    ps.beta_r_strict = ps.beta_r - b_at[r];
    out.push_back(ps);
  }
  return out;
}

/// Extended gap as a polynomial in the weights; valid for any real weights.
inline double extended_gap_unchecked(const Simplex& s, std::span<const double> m, std::span<const double> n) {
  double total = 0.0;
  for (const auto& ps : all_partition_sums(s, m, n)) {
    const double dl = ps.alpha_l - ps.beta_l;
    const double dr = ps.alpha_r - ps.beta_r;
    total += (dl * dl + dr * dr) * ps.edge.weight / 2.0;
  }
  return total;
}

inline std::size_t locate_minimal_edge(const Simplex& s, const OrientedEdge& e) {
  const std::size_t l = s.tree().find_edge(e);
  if (l == npos) {
    throw Error(ErrorCode::UnknownEdge, "(" + e.left + " -> " + e.right + ") is not an oriented host edge");
  }
  const auto& td = s.minimal_edges();
  if (std::find(td.begin(), td.end(), l) == td.end()) {
    throw Error(ErrorCode::EdgeNotInMinimalSubtree,
                "(" + e.left + " -> " + e.right + ") is outside the minimal subtree");
  }
  return l;
}

}  // namespace detail

/// Partition sums of `load` across `e`, which must be an edge of T_D given in
/// the host tree's orientation.
inline PartitionSums partition_sums(const Simplex& s, const LoadVector& load, const OrientedEdge& e) {
  detail::check_load_shape(s, load);
  const std::size_t l = detail::locate_minimal_edge(s, e);
  const auto& td = s.minimal_edges();
  const auto all = detail::all_partition_sums(s, load.m, load.n);
  return all[static_cast<std::size_t>(std::find(td.begin(), td.end(), l) - td.begin())];
}

/// Cross-team weighted d^p sum minus the within-team sums.
inline double gap_direct(const Simplex& s, const NormalizedLoadVector& load, double p = 1.0) {
  if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidExponent, "p must be >= 0");
  detail::check_load_shape(s, load);
  const auto& m = load.m();
  const auto& n = load.n();
  const std::size_t q = s.q(), t = s.t();
  auto dp = [&](std::size_t s1, std::size_t s2) { return std::pow(s.distance(s1, s2), p); };
  double cross = 0.0, within = 0.0;
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t i = 0; i < t; ++i) cross += m[j] * n[i] * dp(j, q + i);
  for (std::size_t j1 = 0; j1 < q; ++j1)
    for (std::size_t j2 = j1 + 1; j2 < q; ++j2) within += m[j1] * m[j2] * dp(j1, j2);
  for (std::size_t i1 = 0; i1 < t; ++i1)
    for (std::size_t i2 = i1 + 1; i2 < t; ++i2) within += n[i1] * n[i2] * dp(q + i1, q + i2);
  return cross - within;
}

/// Gap as a sum of per-edge terms (alpha_L - beta_L)^2 |e| over T_D. Tree hosts, p = 1.
inline double gap_by_edges(const Simplex& s, const NormalizedLoadVector& load) {
  detail::check_load_shape(s, load);
  double total = 0.0;
  for (const auto& ps : detail::all_partition_sums(s, load.m(), load.n())) {
    const double d = ps.alpha_l - ps.beta_l;
    total += d * d * ps.edge.weight;
  }
  return total;
}

inline double edge_contribution(const Simplex& s, const NormalizedLoadVector& load, const OrientedEdge& e) {
  const PartitionSums ps = partition_sums(s, load, e);
  const double d = ps.alpha_l - ps.beta_l;
  return d * d * ps.edge.weight;
}

/// Symmetric left/right extension of the edge formula to unnormalized loads.
inline double extended_gap(const Simplex& s, const LoadVector& load) {
  s.tree();
  detail::check_load_shape(s, load);
  for (const auto* team : {&load.m, &load.n})
    for (double x : *team)
      if (!(x > 0.0)) throw Error(ErrorCode::NonPositiveLoad, "extended gap needs positive loads");
  return detail::extended_gap_unchecked(s, load.m, load.n);
}

struct EtaSimplex {
  Simplex simplex;
  NormalizedLoadVector load;
  double alpha;
};

struct EtaVector {
  std::vector<VertexId> points;
  std::vector<double> eta;
};

namespace detail {

template <typename Host>
EtaSimplex eta_to_simplex_impl(const Host& host, const std::vector<VertexId>& points,
                               const std::vector<double>& eta) {
  if (points.size() != eta.size()) throw Error(ErrorCode::SizeMismatch, "points and eta differ in length");
  double sum = 0.0, abs_sum = 0.0;
  for (double x : eta) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite eta entry");
    sum += x;
    abs_sum += std::abs(x);
  }
  if (abs_sum == 0.0) throw Error(ErrorCode::ZeroVector, "eta is identically zero");
  if (std::abs(sum) > 1e-12 * abs_sum) {
    throw Error(ErrorCode::NonZeroSum, "eta sums to " + std::to_string(sum));
  }
  const double alpha = abs_sum / 2.0;
  std::vector<VertexId> a, b;
  LoadVector w;
  for (std::size_t k = 0; k < eta.size(); ++k) {
    if (eta[k] > 0.0) {
      a.push_back(points[k]);
      w.m.push_back(eta[k] / alpha);
    } else if (eta[k] < 0.0) {
      b.push_back(points[k]);
      w.n.push_back(-eta[k] / alpha);
    }
  }
  // Exact renormalization of the rounding left by the division.
  for (auto* team : {&w.m, &w.n}) {
    const double s = std::accumulate(team->begin(), team->end(), 0.0);
    for (double& x : *team) x /= s;
  }
  // Distinctness over all given points, including zero-weight ones.
  std::set<VertexId> seen;
  for (const auto& id : points) {
    if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateVertex, "point '" + id + "' repeats");
  }
  return {make_simplex(host, std::move(a), std::move(b)), NormalizedLoadVector(std::move(w)), alpha};
}

}  // namespace detail

/// Splits a mean-zero vector into a normalized simplex: positive entries form
/// the a-team, negative entries the b-team, zeros are dropped, and
/// alpha = sum|eta| / 2 absorbs the scale.
inline EtaSimplex eta_to_simplex(const TreeHost& host, const std::vector<VertexId>& points,
                                 const std::vector<double>& eta) {
  return detail::eta_to_simplex_impl(host, points, eta);
}

inline EtaSimplex eta_to_simplex(const MetricHost& host, const std::vector<VertexId>& points,
                                 const std::vector<double>& eta) {
  return detail::eta_to_simplex_impl(host, points, eta);
}

/// Inverse of eta_to_simplex: eta = alpha * m on the a-team, -alpha * n on the b-team.
inline EtaVector simplex_to_eta(const Simplex& s, const NormalizedLoadVector& load, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
  detail::check_load_shape(s, load);
  EtaVector out;
  for (std::size_t j = 0; j < s.q(); ++j) {
    out.points.push_back(s.a_team()[j]);
    out.eta.push_back(alpha * load.m()[j]);
  }
  for (std::size_t i = 0; i < s.t(); ++i) {
    out.points.push_back(s.b_team()[i]);
    out.eta.push_back(-alpha * load.n()[i]);
  }
  return out;
}

}  // namespace treegap
