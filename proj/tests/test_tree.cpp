#include <gtest/gtest.h>

#include <functional>
#include <map>

#include "support/random_trees.hpp"

using namespace treegap;
using treegap::testing::Rng;

namespace {

MetricTree unit_path() { return build_tree({{"a", "m", 1.0}, {"m", "b", 1.0}}, "b"); }

MetricTree y3(const VertexId& root = "l1") {
  return build_tree({{"r", "l1", 1.0}, {"r", "l2", 1.0}, {"r", "l3", 1.0}}, root);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(BuildTree, SingleEdgeOrientedTowardRoot) {
  const auto t = build_tree({"a", "b"}, {{"a", "b", 1.0}}, "b");
  ASSERT_EQ(t.edge_count(), 1u);
  EXPECT_EQ(t.edges()[0], (OrientedEdge{"a", "b", 1.0}));
  EXPECT_EQ(t.root_label(), "b");
}

TEST(BuildTree, PathOrientation) {
  const auto edges = unit_path().edges();
  ASSERT_EQ(edges.size(), 2u);
  EXPECT_NE(std::find(edges.begin(), edges.end(), OrientedEdge{"a", "m", 1.0}), edges.end());
  EXPECT_NE(std::find(edges.begin(), edges.end(), OrientedEdge{"m", "b", 1.0}), edges.end());
}

TEST(BuildTree, StarRootedAtLeaf) {
  const auto edges = y3().edges();
  for (const auto& e : {OrientedEdge{"l2", "r", 1.0}, OrientedEdge{"l3", "r", 1.0}, OrientedEdge{"r", "l1", 1.0}}) {
    EXPECT_NE(std::find(edges.begin(), edges.end(), e), edges.end()) << e.left << "->" << e.right;
  }
}

TEST(BuildTree, DefaultRootIsSmallestLeaf) {
  EXPECT_EQ(build_tree({{"z", "m", 1.0}, {"m", "c", 2.0}, {"m", "q", 1.0}}).root_label(), "c");
}

TEST(BuildTree, SingleVertexAccepted) {
  const auto t = build_tree({"solo"}, {});
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.edge_count(), 0u);
  EXPECT_EQ(code_of([&] { level_assignment(t); }), ErrorCode::NoEdges);
}

TEST(BuildTree, Errors) {
  EXPECT_EQ(code_of([] { build_tree({{"a", "b", 1}, {"b", "c", 1}, {"c", "a", 1}}); }), ErrorCode::CycleDetected);
  EXPECT_EQ(code_of([] { build_tree({{"a", "b", 1}, {"a", "b", 1}}); }), ErrorCode::CycleDetected);
  EXPECT_EQ(code_of([] { build_tree({"a", "b", "c", "d"}, {{"a", "b", 1}, {"c", "d", 1}}); }),
            ErrorCode::Disconnected);
  EXPECT_EQ(code_of([] { build_tree({{"a", "b", 0.0}}); }), ErrorCode::NonPositiveWeight);
  EXPECT_EQ(code_of([] { build_tree({{"a", "b", -2.0}}); }), ErrorCode::NonPositiveWeight);
  EXPECT_EQ(code_of([] { build_tree({{"a", "m", 1}, {"m", "b", 1}}, "m"); }), ErrorCode::RootNotLeaf);
  EXPECT_EQ(code_of([] { build_tree({"a", "a"}, {{"a", "b", 1}}); }), ErrorCode::DuplicateVertex);
  EXPECT_EQ(code_of([] { build_tree({"a", "b"}, {{"a", "c", 1}}); }), ErrorCode::UnknownVertex);
  EXPECT_EQ(code_of([] { build_tree({{"a", "b", 1}}, "zz"); }), ErrorCode::UnknownVertex);
}

TEST(PathDistance, Examples) {
  EXPECT_DOUBLE_EQ(path_distance(build_tree({{"a", "b", 1.0}}), "a", "b"), 1.0);
  EXPECT_DOUBLE_EQ(path_distance(build_tree({{"a", "m", 1.0}, {"m", "b", 2.0}}), "a", "b"), 3.0);
  const auto star = y3();
  EXPECT_DOUBLE_EQ(path_distance(star, "l1", "l2"), 2.0);
  EXPECT_DOUBLE_EQ(path_distance(star, "l1", "r"), 1.0);
  EXPECT_DOUBLE_EQ(path_distance(star, "l3", "l3"), 0.0);
  EXPECT_EQ(code_of([&] { path_distance(star, "l1", "nope"); }), ErrorCode::UnknownVertex);
}

TEST(MinimalSubtree, Examples) {
  EXPECT_EQ(minimal_subtree(unit_path(), {"a", "b"}).size(), 3u);
  const auto sub = minimal_subtree(y3(), {"l1", "l2"});
  EXPECT_EQ(sub.size(), 3u);
  EXPECT_TRUE(sub.contains("r"));
  EXPECT_FALSE(sub.contains("l3"));
  EXPECT_TRUE(sub.is_leaf(sub.root()));
  EXPECT_EQ(minimal_subtree(y3(), {"l1", "l2", "l3"}).size(), 4u);
  EXPECT_EQ(minimal_subtree(y3(), {"r"}).size(), 1u);
  EXPECT_EQ(code_of([] { minimal_subtree(y3(), {}); }), ErrorCode::EmptyVertexSet);
  EXPECT_EQ(code_of([] { minimal_subtree(y3(), {"x"}); }), ErrorCode::UnknownVertex);
}

TEST(MinimalSubtree, AllLeavesGiveWholeTree) {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = treegap::testing::random_tree(rng, 2 + trial % 10);
    std::vector<VertexId> leaves;
    for (auto v : t->leaves()) leaves.push_back(t->label(v));
    EXPECT_EQ(minimal_subtree(*t, leaves).size(), t->size());
  }
}

TEST(MinimalSubtree, LeavesAreMembersAndDistancesInherited) {
  Rng rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = treegap::testing::random_tree(rng, 3 + trial % 9);
    std::vector<VertexId> chosen;
    for (std::size_t v = 0; v < t->size(); ++v)
      if (treegap::testing::pick(rng, 3) == 0) chosen.push_back(t->label(v));
    if (chosen.size() < 2) chosen = {t->label(0), t->label(1)};
    const auto sub = minimal_subtree(*t, chosen);
    for (auto leaf : sub.leaves()) {
      EXPECT_NE(std::find(chosen.begin(), chosen.end(), sub.label(leaf)), chosen.end());
    }
    for (std::size_t i = 0; i < sub.size(); ++i)
      for (std::size_t j = 0; j < sub.size(); ++j)
        EXPECT_NEAR(sub.distance(i, j), path_distance(*t, sub.label(i), sub.label(j)), 1e-12);
  }
}

TEST(LevelAssignment, Examples) {
  const auto single = level_assignment(build_tree({{"a", "b", 1.0}}, "b"));
  EXPECT_EQ(single.k0, 1u);
  const auto single_tree = build_tree({{"a", "b", 1.0}}, "b");
  EXPECT_EQ(single.of(single_tree, "a"), 0u);
  EXPECT_EQ(single.of(single_tree, "b"), 1u);

  const auto path = unit_path();
  const auto lp = level_assignment(path);
  EXPECT_EQ(lp.k0, 2u);
  EXPECT_EQ(lp.of(path, "a"), 0u);
  EXPECT_EQ(lp.of(path, "m"), 1u);
  EXPECT_EQ(lp.of(path, "b"), 2u);

  const auto star = y3();
  const auto ls = level_assignment(star);
  EXPECT_EQ(ls.k0, 2u);
  EXPECT_EQ(ls.of(star, "r"), 1u);
  EXPECT_EQ(ls.of(star, "l2"), 0u);
  EXPECT_EQ(ls.of(star, "l3"), 0u);
}

TEST(LevelAssignment, IgnoresWeightsAndAlternatesAcrossEdges) {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = treegap::testing::random_tree(rng, 2 + trial % 11);
    const auto lv = level_assignment(*t);
    EXPECT_EQ(lv.level[t->root()], lv.k0);
    for (std::size_t v = 0; v < t->size(); ++v) {
      EXPECT_EQ(lv.level[v], lv.k0 - t->depth(v));
      if (v != t->root()) EXPECT_EQ(lv.level[t->parent(v)], lv.level[v] + 1);
    }
  }
}

TEST(LeftRightSets, Examples) {
  const auto single = left_right_sets(build_tree({{"a", "b", 1.0}}, "b"), {"a", "b", 1.0});
  EXPECT_EQ(single.left, std::vector<VertexId>{"a"});
  EXPECT_EQ(single.right, std::vector<VertexId>{"b"});
  EXPECT_TRUE(single.strict_left.empty());
  EXPECT_TRUE(single.strict_right.empty());

  const auto path = left_right_sets(unit_path(), {"m", "b", 1.0});
  EXPECT_EQ(path.left, (std::vector<VertexId>{"a", "m"}));
  EXPECT_EQ(path.right, std::vector<VertexId>{"b"});

  const auto star = left_right_sets(y3(), {"r", "l1", 1.0});
  EXPECT_EQ(star.left, (std::vector<VertexId>{"l2", "l3", "r"}));
  EXPECT_EQ(star.right, std::vector<VertexId>{"l1"});

  EXPECT_EQ(code_of([] { left_right_sets(unit_path(), {"b", "m", 1.0}); }), ErrorCode::UnknownEdge);
}

TEST(LeftRightSets, PartitionEveryEdge) {
  Rng rng(14);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = treegap::testing::random_tree(rng, 2 + trial % 11);
    for (const auto& e : t->edges()) {
      const auto sides = left_right_sets(*t, e);
      std::vector<VertexId> all = sides.left;
      all.insert(all.end(), sides.right.begin(), sides.right.end());
      std::sort(all.begin(), all.end());
      auto labels = t->labels();
      std::sort(labels.begin(), labels.end());
      EXPECT_EQ(all, labels);
      EXPECT_TRUE(std::binary_search(sides.left.begin(), sides.left.end(), e.left));
      EXPECT_TRUE(std::binary_search(sides.right.begin(), sides.right.end(), e.right));
      EXPECT_EQ(sides.strict_left.size() + 1, sides.left.size());
      EXPECT_EQ(sides.strict_right.size() + 1, sides.right.size());
      // Left vertices are strictly nearer e.left than e.right.
      for (const auto& v : sides.left) EXPECT_LT(path_distance(*t, v, e.left), path_distance(*t, v, e.right));
    }
  }
}

TEST(TreeMetric, RootInvarianceAndGeodesicAdditivity) {
  Rng rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = treegap::testing::random_tree(rng, 3 + trial % 10);
    for (auto leaf : t->leaves()) {
      const auto other = build_tree(t->undirected_edges(), t->label(leaf));
      for (std::size_t i = 0; i < t->size(); ++i)
        for (std::size_t j = 0; j < t->size(); ++j)
          EXPECT_NEAR(path_distance(other, t->label(i), t->label(j)), t->distance(i, j), 1e-12);
    }
    const std::size_t u = treegap::testing::pick(rng, t->size()), v = treegap::testing::pick(rng, t->size());
    for (auto w : t->geodesic(u, v)) EXPECT_NEAR(t->distance(u, v), t->distance(u, w) + t->distance(w, v), 1e-12);
    for (std::size_t i = 0; i < t->size(); ++i) EXPECT_EQ(t->distance(i, i), 0.0);
  }
}

TEST(TreeMetric, EveryNonRootVertexIsLeftEndOfOneEdge) {
  Rng rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = treegap::testing::random_tree(rng, 2 + trial % 11);
    EXPECT_TRUE(t->is_leaf(t->root()));
    std::map<VertexId, int> count;
    for (const auto& e : t->edges()) {
      ++count[e.left];
      EXPECT_EQ(t->depth(t->index_of(e.right)) + 1, t->depth(t->index_of(e.left)));
    }
    for (std::size_t v = 0; v < t->size(); ++v) EXPECT_EQ(count[t->label(v)], v == t->root() ? 0 : 1);
  }
}
