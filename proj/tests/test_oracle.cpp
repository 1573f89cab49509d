#include <gtest/gtest.h>

#include <cmath>

#include "support/random_trees.hpp"

using namespace treegap;
using namespace treegap::testing;

namespace {

TreeHost unit_path() { return share(build_tree({{"a", "m", 1.0}, {"m", "b", 1.0}}, "b")); }

}  // namespace

TEST(SimplexProjection, LandsOnTheSimplex) {
  Rng rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(1 + static_cast<Eigen::Index>(pick(rng, 8)));
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = uniform(rng, -3.0, 3.0);
    Eigen::VectorXd y = x;
    detail::project_to_simplex(y);
    EXPECT_NEAR(y.sum(), 1.0, 1e-14);
    EXPECT_GE(y.minCoeff(), 0.0);
    // Optimality: (x - y) . (z - y) <= 0 for vertices z of the simplex.
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      Eigen::VectorXd z = Eigen::VectorXd::Unit(x.size(), k);
      EXPECT_LE((x - y).dot(z - y), 1e-12);
    }
  }
}

TEST(MinimizeGap, Examples) {
  auto edge = share(build_tree({{"a", "b", 1.0}}));
  const auto r1 = minimize_gap_over_loads(make_simplex(edge, {"a"}, {"b"}));
  EXPECT_DOUBLE_EQ(r1.value, 1.0);
  EXPECT_TRUE(r1.converged);
  EXPECT_EQ(r1.argmin.m, std::vector<double>{1.0});

  const auto r2 = minimize_gap_over_loads(generic_labeling(unit_path()));
  EXPECT_NEAR(r2.value, 0.5, 1e-12);
  EXPECT_NEAR(r2.argmin.m[0], 0.5, 1e-9);
  EXPECT_NEAR(r2.argmin.m[1], 0.5, 1e-9);
  EXPECT_NEAR(r2.argmin.n[0], 1.0, 1e-12);

  const auto r3 = minimize_gap_over_loads(make_simplex(unit_path(), {"a"}, {"b"}));
  EXPECT_DOUBLE_EQ(r3.value, 2.0);

  auto metric = share(metric_from_tree(*unit_path()));
  EXPECT_THROW(minimize_gap_over_loads(make_simplex(metric, {"a"}, {"b"})), Error);
}

TEST(MinimizeGap, WitnessIsTheUniqueMinimizer) {
  Rng rng(72);
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = random_tree(rng, 2 + trial % 9);
    const auto g = gamma_T(t);
    const auto r = minimize_gap_over_loads(g.generic_simplex);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, g.gamma, 1e-8 * std::max(1.0, g.gamma));
    for (std::size_t k = 0; k < r.argmin.m.size(); ++k) EXPECT_NEAR(r.argmin.m[k], g.generic_weights.m()[k], 1e-6);
    for (std::size_t k = 0; k < r.argmin.n.size(); ++k) EXPECT_NEAR(r.argmin.n[k], g.generic_weights.n()[k], 1e-6);
  }
}

TEST(MinimizeGap, RandomInteriorStartsReachTheWitness) {
  Rng rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    const auto t = random_tree(rng, 3 + trial % 6);
    const auto g = gamma_T(t);
    const Simplex& s = g.generic_simplex;
    const auto q = static_cast<Eigen::Index>(s.q());
    const Eigen::MatrixXd h =
        detail::gap_hessian([&](std::size_t i, std::size_t j) { return s.distance(i, j); }, s.q(), s.t(), 1.0);
    const double lipschitz = detail::tangent_spectrum(h, q).second;
    for (int start = 0; start < 20; ++start) {
      const auto w = random_load(rng, s.q(), s.t());
      Eigen::VectorXd x0(h.rows());
      for (Eigen::Index i = 0; i < q; ++i) x0(i) = w.m()[static_cast<std::size_t>(i)];
      for (Eigen::Index i = q; i < x0.size(); ++i) x0(i) = w.n()[static_cast<std::size_t>(i - q)];
      const auto run = detail::projected_gradient(h, q, x0, lipschitz, true, 1e-11, 1'000'000);
      ASSERT_TRUE(run.converged);
      for (Eigen::Index i = 0; i < q; ++i) EXPECT_NEAR(run.x(i), g.generic_weights.m()[static_cast<std::size_t>(i)], 1e-5);
      for (Eigen::Index i = q; i < x0.size(); ++i)
        EXPECT_NEAR(run.x(i), g.generic_weights.n()[static_cast<std::size_t>(i - q)], 1e-5);
    }
  }
}

TEST(MinimizeGap, TangentCurvatureIsPositiveOnTrees) {
  Rng rng(74);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_tree(rng, 3 + trial % 8);
    const auto s = random_simplex(rng, t);
    if (s.size() < 3) continue;
    const Eigen::MatrixXd h =
        detail::gap_hessian([&](std::size_t i, std::size_t j) { return s.distance(i, j); }, s.q(), s.t(), 1.0);
    // The compressed form has zeros along the two normal directions; every
    // tangent direction must have positive curvature.
    const auto k = h.rows();
    const auto q = static_cast<Eigen::Index>(s.q());
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(k, k);
    proj.topLeftCorner(q, q).array() -= 1.0 / static_cast<double>(q);
    proj.bottomRightCorner(k - q, k - q).array() -= 1.0 / static_cast<double>(k - q);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(proj * h * proj);
    int positive = 0;
    for (Eigen::Index i = 0; i < k; ++i) positive += solver.eigenvalues()(i) > 1e-12;
    EXPECT_EQ(positive, k - 2);
  }
}

TEST(MinimizeGap, ExtendedGapIsConvexOnTrees) {
  Rng rng(75);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_tree(rng, 2 + trial % 9);
    const auto s = random_simplex(rng, t);
    const LoadVector w1{random_positive(rng, s.q(), false), random_positive(rng, s.t(), false)};
    const LoadVector w2{random_positive(rng, s.q(), false), random_positive(rng, s.t(), false)};
    LoadVector mid;
    for (std::size_t k = 0; k < s.q(); ++k) mid.m.push_back(0.5 * (w1.m[k] + w2.m[k]));
    for (std::size_t k = 0; k < s.t(); ++k) mid.n.push_back(0.5 * (w1.n[k] + w2.n[k]));
    EXPECT_LE(extended_gap(s, mid), 0.5 * (extended_gap(s, w1) + extended_gap(s, w2)) + 1e-12);
  }
}

TEST(BruteForce, Examples) {
  EXPECT_NEAR(brute_force_gamma(share(build_tree({{"a", "b", 2.5}}))).gamma, 2.5, 1e-12);
  const auto path = brute_force_gamma(unit_path());
  EXPECT_NEAR(path.gamma, 0.5, 1e-10);
  EXPECT_EQ(path.labelings, 6u);  // (27 - 16 + 1) / 2
  EXPECT_EQ(path.best_a, (std::vector<VertexId>{"a", "b"}));
  EXPECT_NEAR(brute_force_gamma(share(build_tree({{"a", "m", 1.0}, {"m", "b", 2.0}}))).gamma, 2.0 / 3.0, 1e-10);
}

TEST(BruteForce, TooLarge) {
  Rng rng(76);
  try {
    brute_force_gamma(random_tree(rng, 10));
    ADD_FAILURE() << "expected TooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(BruteForce, LabelingCount) {
  // Labelings with both teams nonempty, one per swap: (3^n - 2^(n+1) + 1) / 2.
  for (std::size_t n = 2; n <= 7; ++n) {
    std::size_t count = 0;
    for_each_labeling(n, [&](const std::vector<int>&) { ++count; });
    std::size_t pow3 = 1;
    for (std::size_t k = 0; k < n; ++k) pow3 *= 3;
    EXPECT_EQ(count, (pow3 - (std::size_t{2} << n) + 1) / 2);
  }
}

TEST(BruteForce, AgreesWithClosedFormOnSmallTrees) {
  for (std::size_t n = 2; n <= 6; ++n) {
    for (const auto& edges : free_trees(n)) {
      auto t = share(build_tree(edges));
      const auto bf = brute_force_gamma(t);
      EXPECT_EQ(bf.unconverged, 0u);
      EXPECT_NEAR(bf.gamma, 1.0 / static_cast<double>(n - 1), 1e-7 / static_cast<double>(n - 1));
    }
  }
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    auto t = random_tree(rng, 2 + trial % 6);
    const double g = gamma_T(t).gamma;
    EXPECT_NEAR(brute_force_gamma(t).gamma, g, 1e-7 * g);
  }
}

TEST(GammaP, Examples) {
  Rng rng(78);
  for (int trial = 0; trial < 6; ++trial) {
    auto t = random_tree(rng, 2 + trial % 4);
    EXPECT_NEAR(gamma_p_estimate(metric_from_tree(*t), 1.0, 8, 2, 5), gamma_T(t).gamma, 1e-6);
  }
  const auto two = metric_from_tree(build_tree({{"a", "b", 3.0}}));
  EXPECT_NEAR(gamma_p_estimate(two, 2.0, 4, 1, 1), 9.0, 1e-12);
  EXPECT_NEAR(gamma_p_estimate(two, 0.5, 4, 1, 1), std::sqrt(3.0), 1e-12);
  EXPECT_LE(gamma_p_estimate(metric_from_tree(*unit_path()), 2.0, 8, 3, 9), 1e-6);
  EXPECT_THROW(gamma_p_estimate(metric_from_tree(*random_tree(rng, 9)), 1.0, 4, 1, 1), Error);
}

TEST(GammaP, DeterministicForSeed) {
  Rng rng(79);
  const auto m = metric_from_tree(*random_tree(rng, 6));
  EXPECT_EQ(gamma_p_estimate(m, 1.5, 6, 3, 42), gamma_p_estimate(m, 1.5, 6, 3, 42));
}

TEST(Kkt, Examples) {
  const auto single = kkt_check_generic(share(build_tree({{"a", "b", 1.0}})));
  EXPECT_TRUE(single.ok);
  const auto path = kkt_check_generic(unit_path());
  EXPECT_TRUE(path.ok);
  EXPECT_NEAR((path.lambda1 + path.lambda2) / 2.0, 0.5, 1e-6);
  Rng rng(80);
  EXPECT_TRUE(kkt_check_generic(random_tree(rng, 7)).ok);
  EXPECT_THROW(kkt_check_generic(share(build_tree({"solo"}, {}))), Error);
}

TEST(Kkt, RandomTrees) {
  Rng rng(81);
  for (int trial = 0; trial < 50; ++trial) {
    const auto report = kkt_check_generic(random_tree(rng, 2 + trial % 11));
    EXPECT_TRUE(report.ok) << report.spread_m << " " << report.spread_n << " " << report.lambda1 << " "
                           << report.lambda2 << " " << report.gamma;
  }
}

TEST(FreeTrees, CountsAndDistinctness) {
  const std::size_t expected[] = {1, 1, 1, 2, 3, 6, 11, 23, 47, 106};
  for (std::size_t n = 1; n <= 10; ++n) {
    const auto trees = free_trees(n);
    EXPECT_EQ(trees.size(), expected[n - 1]) << "n=" << n;
    for (const auto& edges : trees) {
      EXPECT_EQ(edges.size(), n - 1);
      if (n >= 2) EXPECT_EQ(build_tree(edges).size(), n);
    }
  }
}
