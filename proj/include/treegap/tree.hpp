#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "treegap/error.hpp"

namespace treegap {

using VertexId = std::string;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Undirected input edge.
struct WeightedEdge {
  VertexId u;
  VertexId v;
  double weight = 1.0;
};

/// Edge oriented toward the root: `right` is one hop closer to the root.
struct OrientedEdge {
  VertexId left;
  VertexId right;
  double weight = 1.0;

  friend bool operator==(const OrientedEdge&, const OrientedEdge&) = default;
};

/// Finite tree with positive edge weights, rooted at a leaf.
///
/// Vertices are addressed either by label or by a dense index in
/// [0, size()). Every non-root vertex v owns exactly one oriented edge,
/// v -> parent(v), so edges are addressed by the index of their left vertex.
class MetricTree {
 public:
  std::size_t size() const { return labels_.size(); }
  std::size_t edge_count() const { return labels_.empty() ? 0 : labels_.size() - 1; }

  const std::vector<VertexId>& labels() const { return labels_; }
  const VertexId& label(std::size_t v) const { return labels_.at(v); }

  std::optional<std::size_t> find(const VertexId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const VertexId& id) const {
    auto v = find(id);
    if (!v) throw Error(ErrorCode::UnknownVertex, "vertex '" + id + "' is not in the tree");
    return *v;
  }

  bool contains(const VertexId& id) const { return index_.count(id) != 0; }

  std::size_t root() const { return root_; }
  const VertexId& root_label() const { return labels_[root_]; }

  /// npos for the root.
  std::size_t parent(std::size_t v) const { return parent_[v]; }
  /// Weight of the edge v -> parent(v); 0 for the root.
  double parent_weight(std::size_t v) const { return parent_weight_[v]; }
  const std::vector<std::size_t>& children(std::size_t v) const { return children_[v]; }
  std::size_t degree(std::size_t v) const {
    return children_[v].size() + (parent_[v] == npos ? 0 : 1);
  }
  bool is_leaf(std::size_t v) const { return degree(v) == 1; }

  /// Hop distance to the root.
  std::size_t depth(std::size_t v) const { return depth_[v]; }

  /// Root first; every vertex appears after its parent.
  const std::vector<std::size_t>& preorder() const { return preorder_; }

  OrientedEdge edge(std::size_t left) const {
    if (left >= size() || left == root_) {
      throw Error(ErrorCode::UnknownEdge, "no oriented edge has left vertex index " +
                                              std::to_string(left));
    }
    return {labels_[left], labels_[parent_[left]], parent_weight_[left]};
  }

  /// Index of the left vertex of `e`, or npos if `e` is not an oriented edge here.
  std::size_t find_edge(const OrientedEdge& e) const {
    auto l = find(e.left);
    auto r = find(e.right);
    if (!l || !r || *l == root_ || parent_[*l] != *r) return npos;
    return *l;
  }

  /// All oriented edges in preorder of their left vertex.
  std::vector<OrientedEdge> edges() const {
    std::vector<OrientedEdge> out;
    out.reserve(edge_count());
    for (std::size_t v : preorder_) {
      if (v != root_) out.push_back(edge(v));
    }
    return out;
  }

  std::vector<WeightedEdge> undirected_edges() const {
    std::vector<WeightedEdge> out;
    for (const auto& e : edges()) out.push_back({e.left, e.right, e.weight});
    return out;
  }

  std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < size(); ++v) {
      if (is_leaf(v)) out.push_back(v);
    }
    return out;
  }

  /// True iff `v` lies in the subtree hanging below `top` (inclusive).
  bool in_subtree(std::size_t v, std::size_t top) const {
    while (depth_[v] > depth_[top]) v = parent_[v];
    return v == top;
  }

  /// Weighted geodesic length, summed edge by edge.
  double distance(std::size_t u, std::size_t v) const {
    double du = 0.0, dv = 0.0;
    while (depth_[u] > depth_[v]) { du += parent_weight_[u]; u = parent_[u]; }
    while (depth_[v] > depth_[u]) { dv += parent_weight_[v]; v = parent_[v]; }
    while (u != v) {
      du += parent_weight_[u];
      dv += parent_weight_[v];
      u = parent_[u];
      v = parent_[v];
    }
    return du + dv;
  }

  /// Vertex indices on the geodesic from u to v, both ends included.
  std::vector<std::size_t> geodesic(std::size_t u, std::size_t v) const {
    std::vector<std::size_t> up, down;
    while (depth_[u] > depth_[v]) { up.push_back(u); u = parent_[u]; }
    while (depth_[v] > depth_[u]) { down.push_back(v); v = parent_[v]; }
    while (u != v) {
      up.push_back(u);
      down.push_back(v);
      u = parent_[u];
      v = parent_[v];
    }
    up.push_back(u);
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
  }

  bool unweighted() const {
    for (std::size_t v = 0; v < size(); ++v) {
      if (v != root_ && parent_weight_[v] != 1.0) return false;
    }
    return true;
  }

 private:
  friend MetricTree build_tree(std::vector<VertexId>, const std::vector<WeightedEdge>&,
                               std::optional<VertexId>);

  std::vector<VertexId> labels_;
  std::map<VertexId, std::size_t> index_;
  std::size_t root_ = 0;
  std::vector<std::size_t> parent_;
  std::vector<double> parent_weight_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> depth_;
  std::vector<std::size_t> preorder_;
};

/// Orients `edges` toward `root`. When `root` is absent the lexicographically
/// smallest leaf is used. Vertex order in `vertex_ids` fixes the dense indices.
inline MetricTree build_tree(std::vector<VertexId> vertex_ids,
                             const std::vector<WeightedEdge>& edges,
                             std::optional<VertexId> root = std::nullopt) {
  MetricTree t;
  const std::size_t n = vertex_ids.size();
  if (n == 0) throw Error(ErrorCode::EmptyVertexSet, "a tree needs at least one vertex");
  for (std::size_t i = 0; i < n; ++i) {
    if (!t.index_.emplace(vertex_ids[i], i).second) {
      throw Error(ErrorCode::DuplicateVertex, "vertex '" + vertex_ids[i] + "' listed twice");
    }
  }
  t.labels_ = std::move(vertex_ids);

  // Union-find for cycle/connectivity detection.
  std::vector<std::size_t> uf(n);
  std::iota(uf.begin(), uf.end(), 0);
  auto find_set = [&](std::size_t x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };

  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : edges) {
    const std::size_t u = t.index_of(e.u);
    const std::size_t v = t.index_of(e.v);
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::NonPositiveWeight,
                  "edge " + e.u + "-" + e.v + " has weight " + std::to_string(e.weight));
    }
    const std::size_t ru = find_set(u), rv = find_set(v);
    if (ru == rv) throw Error(ErrorCode::CycleDetected, "edge " + e.u + "-" + e.v + " closes a cycle");
    uf[ru] = rv;
    adj[u].emplace_back(v, e.weight);
    adj[v].emplace_back(u, e.weight);
  }
  if (edges.size() + 1 != n) {
    throw Error(ErrorCode::Disconnected, std::to_string(n) + " vertices but only " +
                                             std::to_string(edges.size()) + " edges");
  }

  if (root) {
    t.root_ = t.index_of(*root);
    if (n >= 2 && adj[t.root_].size() != 1) {
      throw Error(ErrorCode::RootNotLeaf, "root '" + *root + "' is not a leaf");
    }
  } else {
    std::optional<std::size_t> best;
    for (std::size_t v = 0; v < n; ++v) {
      if ((n == 1 || adj[v].size() == 1) && (!best || t.labels_[v] < t.labels_[*best])) best = v;
    }
    t.root_ = *best;
  }

  t.parent_.assign(n, npos);
  t.parent_weight_.assign(n, 0.0);
  t.children_.assign(n, {});
  t.depth_.assign(n, 0);
  t.preorder_.clear();
  t.preorder_.reserve(n);

  // Iterative DFS; children are visited in label order so preorder is stable.
  std::vector<std::size_t> stack{t.root_};
  std::vector<bool> seen(n, false);
  seen[t.root_] = true;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    t.preorder_.push_back(v);
    for (auto [w, weight] : adj[v]) {
      if (seen[w]) continue;
      seen[w] = true;
      t.parent_[w] = v;
      t.parent_weight_[w] = weight;
      t.depth_[w] = t.depth_[v] + 1;
      t.children_[v].push_back(w);
    }
    auto& kids = t.children_[v];
    std::sort(kids.begin(), kids.end(),
              [&](std::size_t a, std::size_t b) { return t.labels_[a] < t.labels_[b]; });
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return t;
}

/// Vertex set inferred from the edges, in order of first appearance.
inline MetricTree build_tree(const std::vector<WeightedEdge>& edges,
                             std::optional<VertexId> root = std::nullopt) {
  std::vector<VertexId> ids;
  std::map<VertexId, bool> seen;
  for (const auto& e : edges) {
    for (const auto* id : {&e.u, &e.v}) {
      if (seen.emplace(*id, true).second) ids.push_back(*id);
    }
  }
  return build_tree(std::move(ids), edges, std::move(root));
}

inline double path_distance(const MetricTree& tree, const VertexId& u, const VertexId& v) {
  return tree.distance(tree.index_of(u), tree.index_of(v));
}

/// Membership mask of the minimal subtree spanned by `vertices`.
///
/// x belongs to it iff x is in the set, or at least two components of T - x
/// contain members of the set.
inline std::vector<bool> minimal_subtree_mask(const MetricTree& tree,
                                              std::span<const std::size_t> vertices) {
  const std::size_t n = tree.size();
  std::vector<bool> member(n, false);
  for (std::size_t v : vertices) member[v] = true;
  const std::size_t total = static_cast<std::size_t>(std::count(member.begin(), member.end(), true));

  std::vector<std::size_t> below(n, 0);
  const auto& order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t v = *it;
    below[v] += member[v] ? 1 : 0;
    if (tree.parent(v) != npos) below[tree.parent(v)] += below[v];
  }

  std::vector<bool> mask(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (member[v]) { mask[v] = true; continue; }
    int components = total > below[v] ? 1 : 0;
    for (std::size_t c : tree.children(v)) components += below[c] > 0 ? 1 : 0;
    mask[v] = components >= 2;
  }
  return mask;
}

/// Induced tree on a connected vertex mask, rooted at its smallest leaf.
inline MetricTree induced_subtree(const MetricTree& tree, const std::vector<bool>& mask) {
  std::vector<VertexId> ids;
  std::vector<WeightedEdge> edges;
  for (std::size_t v : tree.preorder()) {
    if (!mask[v]) continue;
    ids.push_back(tree.label(v));
    const std::size_t p = tree.parent(v);
    if (p != npos && mask[p]) edges.push_back({tree.label(v), tree.label(p), tree.parent_weight(v)});
  }
  return build_tree(std::move(ids), edges);
}

/// The smallest subtree containing every vertex of `vertices`.
inline MetricTree minimal_subtree(const MetricTree& tree, const std::vector<VertexId>& vertices) {
  if (vertices.empty()) throw Error(ErrorCode::EmptyVertexSet, "minimal subtree of an empty set");
  std::vector<std::size_t> idx;
  idx.reserve(vertices.size());
  for (const auto& id : vertices) idx.push_back(tree.index_of(id));
  return induced_subtree(tree, minimal_subtree_mask(tree, idx));
}

struct LevelAssignment {
  std::size_t k0 = 0;
  /// Indexed by vertex; level(v) = k0 - hops(v, root).
  std::vector<std::size_t> level;

  std::size_t of(const MetricTree& tree, const VertexId& id) const {
    return level[tree.index_of(id)];
  }
};

/// Levels by hop count, ignoring weights. The root sits at the top level k0.
inline LevelAssignment level_assignment(const MetricTree& tree) {
  if (tree.edge_count() == 0) throw Error(ErrorCode::NoEdges, "levels need at least one edge");
  LevelAssignment out;
  for (std::size_t v = 0; v < tree.size(); ++v) out.k0 = std::max(out.k0, tree.depth(v));
  out.level.resize(tree.size());
  for (std::size_t v = 0; v < tree.size(); ++v) out.level[v] = out.k0 - tree.depth(v);
  return out;
}

struct EdgeSides {
  std::vector<VertexId> left;
  std::vector<VertexId> right;
  std::vector<VertexId> strict_left;
  std::vector<VertexId> strict_right;
};

/// Vertices weakly/strictly to either side of an oriented edge. Each list is
/// sorted by label.
inline EdgeSides left_right_sets(const MetricTree& tree, const OrientedEdge& e) {
  const std::size_t l = tree.find_edge(e);
  if (l == npos) {
    throw Error(ErrorCode::UnknownEdge, "(" + e.left + " -> " + e.right + ") is not an oriented edge");
  }
  const std::size_t r = tree.parent(l);
  EdgeSides out;
  for (std::size_t v = 0; v < tree.size(); ++v) {
    const bool on_left = tree.in_subtree(v, l);
    (on_left ? out.left : out.right).push_back(tree.label(v));
    if (on_left && v != l) out.strict_left.push_back(tree.label(v));
    if (!on_left && v != r) out.strict_right.push_back(tree.label(v));
  }
  for (auto* s : {&out.left, &out.right, &out.strict_left, &out.strict_right}) {
    std::sort(s->begin(), s->end());
  }
  return out;
}

}  // namespace treegap
