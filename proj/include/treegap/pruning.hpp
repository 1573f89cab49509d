#pragma once

#include <algorithm>
#include <vector>

#include "treegap/error.hpp"
#include "treegap/generic.hpp"
#include "treegap/simplex.hpp"
#include "treegap/tree.hpp"

namespace treegap {

struct PruneStep {
  OrientedEdge contracted_edge;
  /// (alpha_L - beta_L)^2 |e*| evaluated before the contraction.
  double gap_decrease = 0.0;
  /// Surviving endpoint (the right vertex of the contracted edge).
  VertexId merged_vertex;
  /// Set when the contracted edge carried no gap at all.
  bool zero_decrease = false;
};

struct PruneResult {
  Simplex simplex;
  NormalizedLoadVector load;
  PruneStep step;
};

namespace detail {

/// 0 = absent, 1 = a-team, 2 = b-team; indexed by host vertex.
inline std::vector<int> team_by_vertex(const Simplex& s) {
  std::vector<int> team(s.tree().size(), 0);
  for (std::size_t slot = 0; slot < s.size(); ++slot) team[s.host_index(slot)] = s.is_a(slot) ? 1 : 2;
  return team;
}

inline bool prunable(const std::vector<int>& team, std::size_t x, std::size_t y) {
  const bool both_in = team[x] != 0 && team[y] != 0;
  return (both_in && team[x] == team[y]) || team[x] == 0 || team[y] == 0;
}

}  // namespace detail

/// Edges of T_D whose endpoints share a team, or which touch a vertex outside D.
inline std::vector<OrientedEdge> prunable_edges(const Simplex& s) {
  const MetricTree& tree = s.tree();
  const auto team = detail::team_by_vertex(s);
  std::vector<OrientedEdge> out;
  for (std::size_t l : s.minimal_edges()) {
    if (detail::prunable(team, l, tree.parent(l))) out.push_back(tree.edge(l));
  }
  return out;
}

/// Contracts e* = (x -> y): x is deleted, its neighbours attach to y, and x's
/// weight (if any) moves onto y. The host keeps its root; if that root stops
/// being a leaf the contracted tree is re-rooted at its smallest leaf.
inline PruneResult prune(const Simplex& s, const NormalizedLoadVector& load, const OrientedEdge& e_star) {
  const MetricTree& tree = s.tree();
  detail::check_load_shape(s, load);
  const std::size_t x = detail::locate_minimal_edge(s, e_star);
  const std::size_t y = tree.parent(x);
  const auto team = detail::team_by_vertex(s);
  if (!detail::prunable(team, x, y)) {
    throw Error(ErrorCode::NotPrunable,
                "(" + e_star.left + " -> " + e_star.right + ") joins opposite teams");
  }

  PruneStep step;
  step.contracted_edge = tree.edge(x);
  step.merged_vertex = tree.label(y);
  {
    const auto sums = detail::all_partition_sums(s, load.m(), load.n());
    const auto& td = s.minimal_edges();
    const auto& ps = sums[static_cast<std::size_t>(std::find(td.begin(), td.end(), x) - td.begin())];
    const double d = ps.alpha_l - ps.beta_l;
    step.gap_decrease = d * d * ps.edge.weight;
    step.zero_decrease = step.gap_decrease <= 1e-14;
  }

  std::vector<VertexId> ids;
  std::vector<WeightedEdge> edges;
  std::size_t y_degree = 0;
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (v == x) continue;
    ids.push_back(tree.label(v));
    if (v == tree.root()) continue;
    const std::size_t p = tree.parent(v) == x ? y : tree.parent(v);
    edges.push_back({tree.label(v), tree.label(p), tree.parent_weight(v)});
    if (p == y) ++y_degree;
  }
  const bool keep_root = tree.root() != y || y_degree <= 1;
  TreeHost host = share(build_tree(std::move(ids), edges,
                                   keep_root ? std::optional<VertexId>(tree.root_label()) : std::nullopt));

  std::vector<VertexId> a, b;
  LoadVector w;
  const std::size_t y_slot = s.slot_of_host(y);
  for (std::size_t slot = 0; slot < s.size(); ++slot) {
    const std::size_t v = s.host_index(slot);
    double weight = s.is_a(slot) ? load.m()[slot] : load.n()[slot - s.q()];
    VertexId id = tree.label(v);
    if (v == x) {
      if (y_slot != npos) continue;  // absorbed into y below
      id = tree.label(y);
    }
    if (v == y && team[x] != 0) {
      const std::size_t x_slot = s.slot_of_host(x);
      weight += s.is_a(x_slot) ? load.m()[x_slot] : load.n()[x_slot - s.q()];
    }
    (s.is_a(slot) ? a : b).push_back(std::move(id));
    (s.is_a(slot) ? w.m : w.n).push_back(weight);
  }
  return {make_simplex(host, std::move(a), std::move(b)), NormalizedLoadVector(std::move(w)), std::move(step)};
}

struct PruneChain {
  Simplex simplex;
  NormalizedLoadVector load;
  std::vector<PruneStep> steps;
};

/// Repeatedly contracts the deepest prunable edge (ties by left label) until
/// the simplex is generically labeled on its contracted host.
inline PruneChain prune_to_generic(const Simplex& s, const NormalizedLoadVector& load) {
  PruneChain chain{s, load, {}};
  for (;;) {
    const auto candidates = prunable_edges(chain.simplex);
    if (candidates.empty()) break;
    const MetricTree& tree = chain.simplex.tree();
    const auto deepest = std::max_element(candidates.begin(), candidates.end(),
                                          [&](const OrientedEdge& e1, const OrientedEdge& e2) {
                                            const auto d1 = tree.depth(tree.index_of(e1.left));
                                            const auto d2 = tree.depth(tree.index_of(e2.left));
                                            if (d1 != d2) return d1 < d2;
                                            return e1.left > e2.left;
                                          });
    PruneResult r = prune(chain.simplex, chain.load, *deepest);
    chain.simplex = std::move(r.simplex);
    chain.load = std::move(r.load);
    chain.steps.push_back(std::move(r.step));
  }
  return chain;
}

}  // namespace treegap
