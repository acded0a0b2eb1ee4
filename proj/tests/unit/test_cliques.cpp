#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "edm/cliques.hpp"
#include "edm/instances.hpp"
#include "test_util.hpp"

using namespace edm;
using namespace edm::testing;

namespace {

PartialEdm graph_with_edges(int n, std::vector<Edge> edges, double value = 1.0) {
  PartialEdm g;
  g.n = n;
  std::sort(edges.begin(), edges.end());
  g.d.edges = edges;
  g.d.values.assign(edges.size(), value);
  return g;
}

bool is_clique(const PartialEdm& g, const std::vector<int>& vs) {
  const Adjacency adj(g);
  for (std::size_t a = 0; a < vs.size(); ++a)
    for (std::size_t b = a + 1; b < vs.size(); ++b)
      if (!adj.adjacent(vs[a], vs[b])) return false;
  return true;
}

Clique clique_from_points(const Points& p) {
  const PartialEdm g = graph_from_points(p, 1e9);
  std::vector<int> all(static_cast<std::size_t>(p.rows()));
  for (int i = 0; i < p.rows(); ++i) all[static_cast<std::size_t>(i)] = i;
  return make_clique(Adjacency(g), all);
}

}  // namespace

TEST(FindCliques, Triangle) {
  const PartialEdm g = graph_with_edges(3, {{0, 1}, {0, 2}, {1, 2}});
  const CliqueSet s = find_cliques(g, 3);
  bool found = false;
  for (const auto& c : s.cliques) found |= c.vertices == std::vector<int>{0, 1, 2};
  EXPECT_TRUE(found);
}

TEST(FindCliques, StarCoversEveryEdgeWithPairs) {
  const PartialEdm g = graph_with_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  const CliqueSet s = find_cliques(g, 3);
  std::set<std::pair<int, int>> covered;
  for (const auto& c : s.cliques) {
    EXPECT_EQ(c.size(), 2u);
    covered.insert({c.vertices[0], c.vertices[1]});
  }
  EXPECT_EQ(covered.size(), 3u);
}

TEST(FindCliques, K4MinusEdge) {
  // K4 on {0..3} without {2,3}; the only triangles are {0,1,2} and {0,1,3}.
  const PartialEdm g = graph_with_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}});
  const CliqueSet s = find_cliques(g, 3);
  for (const auto& c : s.cliques) {
    EXPECT_TRUE(is_clique(g, c.vertices));
    if (c.size() == 3)
      EXPECT_TRUE((c.vertices == std::vector<int>{0, 1, 2} || c.vertices == std::vector<int>{0, 1, 3}));
    EXPECT_LE(c.size(), 3u);
  }
}

TEST(FindCliques, EmptyGraph) {
  PartialEdm g;
  g.n = 5;
  EXPECT_EQ(find_cliques(g, 6).size(), 0u);
}

TEST(FindCliques, EveryCliqueVerifiedAndEdgesCovered) {
  const PartialEdm g = generate_instance({80, 0.0, 0.3, 3, 2});
  const CliqueSet s = find_cliques(g, 6);
  const Adjacency adj(g);
  std::vector<char> covered(g.d.size(), 0);
  for (const auto& c : s.cliques) {
    ASSERT_TRUE(is_clique(g, c.vertices));
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        covered[static_cast<std::size_t>(adj.edge_index(c.vertices[a], c.vertices[b]))] = 1;
  }
  EXPECT_TRUE(std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; }));
}

TEST(CliqueNoise, NoiselessIsZero) {
  std::mt19937_64 rng(1);
  const Clique c = clique_from_points(random_matrix(rng, 7, 2));
  EXPECT_LE(clique_noise(c, 2), 1e-18 * std::pow(c.local.norm(), 2));
}

TEST(CliqueNoise, ThreePointsIsSmallestEigenvalueSquaredOverThree) {
  Matrix d(3, 3);
  d << 0, 1, 4, 1, 0, 2.5, 4, 2.5, 0;
  Clique c{{0, 1, 2}, SymmetricMatrix(d), {}, std::nullopt};
  Eigen::SelfAdjointEigenSolver<Matrix> es(k_pinv(c.local).dense());
  EXPECT_NEAR(clique_noise(c, 2), es.eigenvalues()[0] * es.eigenvalues()[0] / 3.0, 1e-15);
}

TEST(CliqueNoise, MatchesDenseOracleAndIsRelabelInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 4 + trial % 5;
    Clique c = clique_from_points(random_matrix(rng, k, 2));
    Matrix d = c.local.dense();
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) d(a, b) = d(b, a) = d(a, b) * (1 + 0.1 * nd(rng));
    c.local = SymmetricMatrix(d);
    // Oracle: full spectrum of -1/2 J D J computed from scratch.
    const Matrix j = Matrix::Identity(k, k) - Matrix::Constant(k, k, 1.0 / k);
    Eigen::SelfAdjointEigenSolver<Matrix> es(-0.5 * j * d * j);
    double s = 0;
    for (int t = 0; t < k - 2; ++t) s += es.eigenvalues()[t] * es.eigenvalues()[t];
    const double nu = clique_noise(c, 2);
    ASSERT_NEAR(nu, s / (0.5 * k * (k - 1)), 1e-12 * std::max(1.0, s));

    std::vector<int> perm(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) perm[static_cast<std::size_t>(t)] = (t + 1) % k;
    Matrix dp(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) dp(a, b) = d(perm[a], perm[b]);
    Clique cp = c;
    cp.local = SymmetricMatrix(dp);
    ASSERT_NEAR(clique_noise(cp, 2), nu, 1e-12 * std::max(1.0, nu));
  }
}

TEST(CliqueNoise, TooSmall) {
  std::mt19937_64 rng(3);
  try {
    clique_noise(clique_from_points(random_matrix(rng, 2, 2)), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CliqueTooSmall);
  }
}

TEST(CliqueWeights, Formula) {
  CliqueSet s;
  s.cliques.resize(2);
  s.noise = {1, 3};
  clique_weights(s);
  EXPECT_DOUBLE_EQ(s.weights[0], 0.75);
  EXPECT_DOUBLE_EQ(s.weights[1], 0.25);

  s.cliques.resize(3);
  s.noise = {1, 1, 2};
  clique_weights(s);
  EXPECT_DOUBLE_EQ(s.weights[0], 0.75);
  EXPECT_DOUBLE_EQ(s.weights[1], 0.75);
  EXPECT_DOUBLE_EQ(s.weights[2], 0.5);
  double total = 0;
  for (double w : s.weights) total += 1 - w;
  EXPECT_NEAR(total, 1.0, 1e-15);

  s.noise = {0, 0, 0};
  clique_weights(s);
  for (double w : s.weights) EXPECT_EQ(w, 1.0);
}

TEST(OrderCliques, TrianglesSharingEdge) {
  const PartialEdm g = graph_with_edges(4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
  CliqueSet s;
  s.cliques = {make_clique(Adjacency(g), {0, 1, 2}), make_clique(Adjacency(g), {1, 2, 3})};
  const CliqueOrdering o = order_cliques(s, 4);
  ASSERT_EQ(o.sequences.size(), 1u);
  EXPECT_EQ(o.sequences[0].size(), 2u);
  EXPECT_TRUE(o.uncovered.empty());
}

TEST(OrderCliques, TrianglesSharingVertex) {
  const PartialEdm g = graph_with_edges(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {2, 4}, {3, 4}});
  CliqueSet s;
  s.cliques = {make_clique(Adjacency(g), {0, 1, 2}), make_clique(Adjacency(g), {2, 3, 4})};
  const CliqueOrdering o = order_cliques(s, 5);
  EXPECT_EQ(o.sequences.size(), 2u);
  EXPECT_TRUE(o.uncovered.empty());
}

TEST(OrderCliques, ConsecutiveIntersectionsOnRandomInstance) {
  const PartialEdm g = generate_instance({150, 0.0, 0.25, 9, 2});
  const CliqueSet s = find_cliques(g, 6);
  const CliqueOrdering o = order_cliques(s, g.n);
  std::set<int> covered;
  for (const auto& seq : o.sequences) {
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const auto& vs = s.cliques[seq[t]].vertices;
      covered.insert(vs.begin(), vs.end());
      if (t == 0) continue;
      const auto& prev = s.cliques[seq[t - 1]].vertices;
      std::vector<int> inter;
      std::set_intersection(prev.begin(), prev.end(), vs.begin(), vs.end(), std::back_inserter(inter));
      ASSERT_GE(inter.size(), 2u);
    }
  }
  for (int v : o.uncovered) EXPECT_EQ(covered.count(v), 0u);
  EXPECT_EQ(covered.size() + o.uncovered.size(), static_cast<std::size_t>(g.n));
}

TEST(CliqueUnion, SmallFiveSensorGeometry) {
  // Two 4-cliques sharing three sensors; only the first/last pair is unmeasured.
  Points p(5, 2);
  p << 0.4582, -0.4116, 0.4793, -0.3952, 0.5031, -0.3221, 0.4360, -0.3150, 0.4467, -0.3393;
  PartialEdm g = graph_from_points(p, 1.0);
  const auto it = std::find(g.d.edges.begin(), g.d.edges.end(), Edge{0, 4});
  g.d.values.erase(g.d.values.begin() + (it - g.d.edges.begin()));
  g.d.edges.erase(it);
  g.radio_range = 0.05;
  const Adjacency adj(g);
  const Clique a = make_clique(adj, {0, 1, 2, 3});
  const Clique b = make_clique(adj, {1, 2, 3, 4});
  const Clique u = union_cliques(a, b, g);
  ASSERT_EQ(u.vertices, (std::vector<int>{0, 1, 2, 3, 4}));
  ASSERT_TRUE(u.realization.has_value());
  EXPECT_LT(procrustes_rmsd(*u.realization, center_rows(p)).rmsd, 1e-6);
  ASSERT_EQ(u.synthetic.size(), 1u);
  EXPECT_EQ(u.synthetic[0], (std::pair<int, int>{0, 4}));
  EXPECT_NEAR(u.local(0, 4), (p.row(0) - p.row(4)).squaredNorm(), 1e-8);

}

TEST(CliqueUnion, FlatIntersectionUsesRadioRange) {
  // The shared sensors are nearly collinear, so mirroring sensor 4 across
  // them changes the measured distances very little but brings it within
  // range of sensor 0.
  Points p(5, 2);
  p << 0.0, 0.05, -0.03, 0.0, 0.0, 0.0005, 0.03, 0.0, 0.005, -0.045;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  for (double noise : {0.0, 0.01}) {
    PartialEdm g = graph_from_points(p, 1.0);
    const auto it = std::find(g.d.edges.begin(), g.d.edges.end(), Edge{0, 4});
    g.d.values.erase(g.d.values.begin() + (it - g.d.edges.begin()));
    g.d.edges.erase(it);
    for (double& v : g.d.values) v *= std::pow(1.0 + noise * nd(rng), 2);
    g.radio_range = 0.1;
    const Adjacency adj(g);
    const Clique u = union_cliques(make_clique(adj, {0, 1, 2, 3}), make_clique(adj, {1, 2, 3, 4}), g);
    EXPECT_GE(std::sqrt(u.local(0, 4)), 0.9 * 0.1) << "noise " << noise;
    EXPECT_LT(procrustes_rmsd(*u.realization, center_rows(p)).rmsd, 0.1 * 0.1) << "noise " << noise;
  }
}

TEST(CliqueUnion, PreservesMeasuredDistances) {
  const PartialEdm g = generate_instance({60, 0.1, 0.4, 4, 2});
  const CliqueSet s = find_cliques(g, 6);
  const CliqueOrdering o = order_cliques(s, g.n);
  const UnionResult res = clique_union_preprocess(s, o, g);
  const Adjacency adj(g);
  for (const auto& c : res.merged.cliques) {
    std::set<std::pair<int, int>> synth(c.synthetic.begin(), c.synthetic.end());
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b) {
        const auto meas = adj.value(c.vertices[a], c.vertices[b]);
        const bool flagged = synth.count({static_cast<int>(a), static_cast<int>(b)}) > 0;
        ASSERT_EQ(flagged, !meas.has_value());
        if (meas) ASSERT_EQ(c.local(static_cast<Index>(a), static_cast<Index>(b)), *meas);
      }
  }
}

TEST(CliqueUnion, RigidIntersectionNoiseless) {
  std::mt19937_64 rng(5);
  const Points p = random_matrix(rng, 6, 2);
  PartialEdm g = graph_from_points(p, 1e9);
  // Remove the pair {0, 5} so the union has one synthetic entry.
  const auto it = std::find(g.d.edges.begin(), g.d.edges.end(), Edge{0, 5});
  g.d.values.erase(g.d.values.begin() + (it - g.d.edges.begin()));
  g.d.edges.erase(it);
  g.radio_range = 1e-3;
  const Adjacency adj(g);
  const Clique u = union_cliques(make_clique(adj, {0, 1, 2, 3}), make_clique(adj, {1, 2, 3, 4, 5}), g);
  for (Index a = 0; a < 6; ++a)
    for (Index b = a + 1; b < 6; ++b)
      ASSERT_NEAR(u.local(a, b), (p.row(a) - p.row(b)).squaredNorm(), 1e-8);
}

TEST(CliqueUnion, NoiselessLocalRealizationsMatchTruth) {
  const PartialEdm g = generate_instance({120, 0.0, 0.3, 8, 2});
  const CliqueSet s = find_cliques(g, 6);
  const UnionResult res = clique_union_preprocess(s, order_cliques(s, g.n), g);
  int checked = 0;
  for (const auto& c : res.merged.cliques) {
    if (!c.realization) continue;
    Points sub(static_cast<Index>(c.size()), 2);
    for (std::size_t t = 0; t < c.size(); ++t) sub.row(static_cast<Index>(t)) = g.ground_truth->row(c.vertices[t]);
    ASSERT_LE(procrustes_rmsd(*c.realization, center_rows(sub)).rmsd, 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}
