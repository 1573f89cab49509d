#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "treegap/error.hpp"
#include "treegap/simplex.hpp"
#include "treegap/tree.hpp"

namespace treegap {

/// Whole-tree simplex with even levels on the a-team and odd levels on the
/// b-team. Each team is ordered by level, then label.
inline Simplex generic_labeling(const TreeHost& tree) {
  if (tree->size() < 2) throw Error(ErrorCode::TooFewVertices, "generic labeling needs two vertices");
  const LevelAssignment levels = level_assignment(*tree);
  std::vector<std::size_t> order(tree->size());
  for (std::size_t v = 0; v < order.size(); ++v) order[v] = v;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (levels.level[x] != levels.level[y]) return levels.level[x] < levels.level[y];
    return tree->label(x) < tree->label(y);
  });
  std::vector<VertexId> a, b;
  for (std::size_t v : order) (levels.level[v] % 2 == 0 ? a : b).push_back(tree->label(v));
  return make_simplex(tree, std::move(a), std::move(b));
}

/// D equals T_D as sets, and every edge of T_D joins opposite teams.
inline bool is_generically_labeled(const Simplex& s) {
  const MetricTree& tree = s.tree();
  const auto& mask = s.minimal_mask();
  std::vector<int> team(tree.size(), 0);  // 0 = absent, 1 = a, 2 = b
  for (std::size_t slot = 0; slot < s.size(); ++slot) team[s.host_index(slot)] = s.is_a(slot) ? 1 : 2;
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (mask[v] && team[v] == 0) return false;
  }
  for (std::size_t l : s.minimal_edges()) {
    if (team[l] == team[tree.parent(l)]) return false;
  }
  return true;
}

/// Weights the generic algorithm assigns for a given delta, indexed by vertex.
///
/// Levels are filled bottom-up. A vertex v below the top level receives
///   (opposite-team weight left of e(v)) - (own-team weight strictly left of e(v)) + delta/|e(v)|,
/// which reduces to delta/|e(v)| on level 0. The root, alone on level k0,
/// receives 1 minus the rest of its team, and may come out non-positive.
inline std::vector<double> generic_algorithm(const MetricTree& tree, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  const LevelAssignment levels = level_assignment(tree);
  const std::size_t n = tree.size();
  std::vector<double> weight(n, 0.0);
  // Subtree team sums, inclusive of the vertex itself.
  std::vector<double> same_sub(n, 0.0), even_sub(n, 0.0), odd_sub(n, 0.0);

  const auto& order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t v = *it;
    if (v == tree.root()) continue;
    double even_below = 0.0, odd_below = 0.0;
    for (std::size_t c : tree.children(v)) {
      even_below += even_sub[c];
      odd_below += odd_sub[c];
    }
    const bool even = levels.level[v] % 2 == 0;
    const double opposite = even ? odd_below : even_below;
    const double own_strict = even ? even_below : odd_below;
    weight[v] = opposite - own_strict + delta / tree.parent_weight(v);
    even_sub[v] = even_below + (even ? weight[v] : 0.0);
    odd_sub[v] = odd_below + (even ? 0.0 : weight[v]);
  }

  const std::size_t root = tree.root();
  const bool root_even = levels.level[root] % 2 == 0;
  double rest = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    if (v != root && (levels.level[v] % 2 == 0) == root_even) rest += weight[v];
  }
  weight[root] = 1.0 - rest;
  return weight;
}

/// (sum over edges of 1/|e|)^-1.
inline double generic_delta(const MetricTree& tree) {
  if (tree.edge_count() == 0) throw Error(ErrorCode::NoEdges, "tree has no edges");
  double inv = 0.0;
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (v != tree.root()) inv += 1.0 / tree.parent_weight(v);
  }
  return 1.0 / inv;
}

/// Largest delta for which every generic weight stays positive:
/// (sum over edges other than the root edge of 1/|e|)^-1, +inf for a single edge.
inline double generic_positivity_threshold(const MetricTree& tree) {
  if (tree.edge_count() == 0) throw Error(ErrorCode::NoEdges, "tree has no edges");
  double inv = 0.0;
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (v != tree.root() && tree.parent(v) != tree.root()) inv += 1.0 / tree.parent_weight(v);
  }
  return inv == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / inv;
}

/// Packs per-vertex weights into a load vector over `s`.
inline LoadVector load_from_vertex_weights(const Simplex& s, const std::vector<double>& weight) {
  LoadVector w;
  for (std::size_t slot = 0; slot < s.size(); ++slot) {
    (s.is_a(slot) ? w.m : w.n).push_back(weight[s.host_index(slot)]);
  }
  return w;
}

struct GapReport {
  double gamma;
  double delta_star;
  Simplex generic_simplex;
  NormalizedLoadVector generic_weights;
  double witness_gap;
};

/// 1-negative type gap of a finite metric tree together with the generically
/// labeled, generically weighted whole-tree simplex that attains it.
inline GapReport gamma_T(const TreeHost& tree) {
  const double delta = generic_delta(*tree);
  Simplex simplex = generic_labeling(tree);
  NormalizedLoadVector weights(load_from_vertex_weights(simplex, generic_algorithm(*tree, delta)));
  const double witness = gap_by_edges(simplex, weights);
  return {delta, delta, std::move(simplex), std::move(weights), witness};
}

/// The configuration attaining equality in the enhanced 1-negative type
/// inequality; unique up to swapping the teams.
inline std::pair<Simplex, NormalizedLoadVector> equality_witness(const TreeHost& tree) {
  GapReport r = gamma_T(tree);
  return {std::move(r.generic_simplex), std::move(r.generic_weights)};
}

}  // namespace treegap
