#include <gtest/gtest.h>

#include <numeric>

#include "helpers.hpp"
#include "zonegraph/oracles.hpp"
#include "zonegraph/selfcheck.hpp"

using namespace zonegraph;

namespace {

PositionFeatureMap map_of(std::vector<std::pair<int, int>> cells, int dim = 2) {
  PositionFeatureMap fm;
  fm.room = RoomCategory::Kitchen;
  fm.dim = dim;
  for (auto [x, z] : cells) fm.entries.push_back({x, z, Vec(static_cast<std::size_t>(dim), 0.0), 0});
  return fm;
}

ZoneAssignment labels_of(std::vector<int> l, int m) { return {std::move(l), {}, m}; }

KnowledgeGraph random_graph(int m, int n, Rng& rng, double sep = 0.0) {
  KnowledgeGraph g;
  g.zones = m;
  g.features = n;
  g.room = RoomCategory::Kitchen;
  g.nodes = Tensor::matrix(m, n);
  g.edges = Tensor::matrix(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) g.nodes(i, j) = rng.normal();
    if (sep > 0) g.nodes(i, i % n) += sep;
    g.edges(i, i) = 1.0;
    for (int j = i + 1; j < m; ++j) g.edges(i, j) = g.edges(j, i) = rng.uniform();
  }
  return g;
}

void expect_graph_near(const KnowledgeGraph& a, const KnowledgeGraph& b, double tol) {
  ASSERT_EQ(a.zones, b.zones);
  for (std::size_t i = 0; i < a.nodes.size(); ++i) EXPECT_NEAR(a.nodes[i], b.nodes[i], tol);
  for (std::size_t i = 0; i < a.edges.size(); ++i) EXPECT_NEAR(a.edges[i], b.edges[i], tol);
}

}  // namespace

TEST(Sweep, SingleCategoryPositionGetsItsEmbedding) {
  const auto p = EmbeddingProvider::synthetic(1, 8);
  auto s = zgtest::open_scene(3, 3, {{"Pot", 1, 2, HeightBand::Mid}});
  const auto fm = sweep_position_features(s, p);
  const auto e = p.object_embedding("Pot").values;
  for (const auto& pf : fm.entries) {
    if (pf.ix == 1 && pf.iz == 2) continue;
    ASSERT_GT(pf.detection_count, 0);
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(pf.feature[static_cast<std::size_t>(k)], e[static_cast<std::size_t>(k)], 1e-12);
  }
}

TEST(Sweep, BlindPositionIsZero) {
  const auto p = EmbeddingProvider::synthetic(1, 4);
  auto s = zgtest::open_scene(1, 8, {{"Pot", 0, 7, HeightBand::Mid}});
  const auto fm = sweep_position_features(s, p);
  EXPECT_EQ(fm.entries.front().detection_count, 0);
  for (double v : fm.entries.front().feature) EXPECT_EQ(v, 0.0);
}

TEST(Sweep, TwoObjectsOverlappingViews) {
  // A at bearing 26.6 deg, B at 63.4 deg: yaw 0 sees A, yaw 45 sees A and B, yaw 90 sees B
  const auto p = EmbeddingProvider::synthetic(2, 6);
  auto s = zgtest::open_scene(4, 4, {{"Pot", 1, 2, HeightBand::Mid}, {"Pan", 2, 1, HeightBand::Mid}});
  const auto fm = sweep_position_features(s, p);
  const auto& origin = fm.entries.front();
  ASSERT_EQ(origin.ix, 0);
  ASSERT_EQ(origin.iz, 0);
  EXPECT_EQ(origin.detection_count, 4);
  const auto a = p.object_embedding("Pot").values, b = p.object_embedding("Pan").values;
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(origin.feature[k], (2 * a[k] + 2 * b[k]) / 4, 1e-12);
}

TEST(Sweep, DistractorsAreNotDetections) {
  const auto p = EmbeddingProvider::synthetic(1, 4);
  auto s = zgtest::open_scene(3, 3, {{"Stove", 1, 2, HeightBand::Mid}});
  for (const auto& pf : sweep_position_features(s, p).entries) EXPECT_EQ(pf.detection_count, 0);
}

TEST(Sweep, MatchesBruteForceOnGeneratedScenes) {
  const auto p = EmbeddingProvider::synthetic(4, 8);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto s = generate_scene(kRoomCategories[seed], 8, 8, seed);
    const auto fm = sweep_position_features(s, p);
    const auto ref = oracle::cell_features(s, p);
    ASSERT_EQ(fm.entries.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_EQ(fm.entries[i].detection_count, ref[i].count);
      for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(fm.entries[i].feature[k], ref[i].feature[k], 1e-9);
    }
  }
}

TEST(Cluster, IdenticalFeaturesSingleZone) {
  auto fm = map_of({{0, 0}, {1, 0}, {2, 0}});
  for (auto& e : fm.entries) e.feature = {0.3, 0.4};
  const auto za = cluster_zones(fm, 1, 0);
  EXPECT_EQ(za.zones, 1);
  for (int l : za.assignment) EXPECT_EQ(l, 0);
}

TEST(Cluster, TwoFarCategoriesMatchExhaustiveOptimum) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6 + static_cast<int>(rng.index(7));
    auto fm = map_of(std::vector<std::pair<int, int>>(static_cast<std::size_t>(n), {0, 0}));
    std::vector<int> truth;
    std::vector<Vec> pts;
    for (int i = 0; i < n; ++i) {
      const int c = i < 2 ? i : static_cast<int>(rng.index(2));
      truth.push_back(c);
      fm.entries[static_cast<std::size_t>(i)].feature = {c * 10.0 + rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
      pts.push_back(fm.entries[static_cast<std::size_t>(i)].feature);
    }
    const auto za = cluster_zones(fm, 2, static_cast<std::uint64_t>(trial));
    ASSERT_EQ(za.zones, 2);
    EXPECT_EQ(oracle::canonical_labels(za.assignment), oracle::canonical_labels(truth));
    const auto best = oracle::best_partitions(pts, 2);
    EXPECT_NEAR(oracle::partition_sse(pts, za.assignment, 2), best.best, 1e-9);
  }
}

TEST(Cluster, EmptyClustersDropped) {
  auto fm = map_of({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}});
  for (std::size_t i = 0; i < 5; ++i) fm.entries[i].feature = {i < 3 ? 0.0 : 1.0, 0.0};
  const auto za = cluster_zones(fm, 4, 1);
  EXPECT_EQ(za.zones, 2);
  EXPECT_EQ(za.centers.size(), 2u);
  for (int l : za.assignment) EXPECT_LT(l, 2);
}

TEST(Cluster, Deterministic) {
  const auto p = EmbeddingProvider::synthetic(0, 8);
  const auto fm = sweep_position_features(generate_scene(RoomCategory::Kitchen, 8, 8, 3), p);
  EXPECT_EQ(cluster_zones(fm, 6, 5).assignment, cluster_zones(fm, 6, 5).assignment);
}

TEST(KMeansRestarts, NeverWorseThanFirstRun) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<Vec> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({rng.normal(), rng.normal(), rng.normal()});
    const auto single = kmeans_single(pts, 4, 9);
    const auto best = kmeans(pts, 4, 9);
    EXPECT_LE(kmeans_objective(pts, best.labels, best.centers), kmeans_objective(pts, single.labels, single.centers) + 1e-12);
  }
}

TEST(Edges, AdjacentFarMixed) {
  {
    const auto g = build_room_graph(labels_of({0, 1}, 2), map_of({{0, 0}, {1, 0}}));
    EXPECT_EQ(g.edges(0, 1), 1.0);
    EXPECT_EQ(g.edges(1, 0), 1.0);
    EXPECT_EQ(g.edges(0, 0), 1.0);
  }
  {
    const auto g = build_room_graph(labels_of({0, 1}, 2), map_of({{0, 0}, {3, 0}}));
    EXPECT_EQ(g.edges(0, 1), 0.0);
  }
  {
    const auto g = build_room_graph(labels_of({0, 0, 1}, 2), map_of({{0, 0}, {0, 3}, {1, 0}}));
    EXPECT_EQ(g.edges(0, 1), 0.5);
  }
}

TEST(Edges, NodesAreZoneMeans) {
  auto fm = map_of({{0, 0}, {1, 0}, {2, 0}});
  fm.entries[0].feature = {1, 0};
  fm.entries[1].feature = {0, 1};
  fm.entries[2].feature = {4, 4};
  const auto g = build_room_graph(labels_of({0, 0, 1}, 2), fm);
  EXPECT_EQ(g.nodes(0, 0), 0.5);
  EXPECT_EQ(g.nodes(0, 1), 0.5);
  EXPECT_EQ(g.nodes(1, 0), 4.0);
  EXPECT_TRUE(graph_problems(g).empty());
}

TEST(Match, IdentityOnSelf) {
  Rng rng(1);
  for (int m = 1; m <= 5; ++m) {
    const auto g = random_graph(m, 6, rng);
    std::vector<int> id(static_cast<std::size_t>(m));
    std::iota(id.begin(), id.end(), 0);
    EXPECT_EQ(match_graphs(g, g), id);
  }
  // fully tied similarities still give the identity
  KnowledgeGraph flat = random_graph(4, 3, rng);
  for (std::size_t i = 0; i < flat.nodes.size(); ++i) flat.nodes[i] = 1.0;
  EXPECT_EQ(match_graphs(flat, flat), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Match, RecoversKnownPermutation) {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const int m = 2 + static_cast<int>(rng.index(4));
    const auto a = random_graph(m, 8, rng, 6.0);
    std::vector<int> sigma(static_cast<std::size_t>(m));
    std::iota(sigma.begin(), sigma.end(), 0);
    rng.shuffle(sigma);
    std::vector<int> inv(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) inv[static_cast<std::size_t>(sigma[i])] = static_cast<int>(i);
    const auto b = permute_graph(a, inv);  // B's node sigma[i] is A's node i
    EXPECT_EQ(match_graphs(a, b), sigma);
    expect_graph_near(merge_graphs({a, b}), a, 1e-12);
  }
}

TEST(Match, ObjectiveEqualsBruteForce) {
  Rng rng(4);
  for (int t = 0; t < 40; ++t) {
    const int m = 1 + static_cast<int>(rng.index(5));
    const auto a = random_graph(m, 5, rng), b = random_graph(m, 5, rng);
    const auto perm = match_graphs(a, b);
    const auto s = node_similarity(a, b);
    EXPECT_NEAR(assignment_value(s, perm), oracle::best_assignment(oracle::to_rows(s)), 1e-12);
  }
}

TEST(Match, ZoneCountMismatchIsUsageError) {
  Rng rng(5);
  EXPECT_THROW(match_graphs(random_graph(3, 4, rng), random_graph(4, 4, rng)), UsageError);
}

TEST(Merge, SingleAndIdentical) {
  Rng rng(6);
  const auto g = random_graph(4, 5, rng);
  EXPECT_EQ(merge_graphs({g}), g);
  expect_graph_near(merge_graphs({g, g}), g, 0.0);
}

TEST(Pipeline, MicroScenesMatchBruteForce) {
  const auto r = check_pipeline_micro(20, 77);
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Pipeline, MixedRoomsRejected) {
  const auto p = EmbeddingProvider::synthetic(0, 8);
  std::vector<Scene> scenes{generate_scene(RoomCategory::Kitchen, 6, 6, 1), generate_scene(RoomCategory::Bedroom, 6, 6, 1)};
  EXPECT_THROW(build_graph_from_scenes(scenes, p, 4), UsageError);
}

TEST(Pipeline, BuildFromScenesValid) {
  const auto p = EmbeddingProvider::synthetic(0, 8);
  std::vector<Scene> scenes;
  for (std::uint64_t s = 1; s <= 3; ++s) scenes.push_back(generate_scene(RoomCategory::Kitchen, 8, 8, s));
  const auto r = build_graph_from_scenes(scenes, p, 6);
  EXPECT_TRUE(graph_problems(r.graph).empty());
  EXPECT_EQ(r.graph.features, 8);
  EXPECT_LE(r.graph.zones, 6);
  EXPECT_GE(r.merged, 1);
  EXPECT_EQ(r.per_scene.size(), 3u);
}

TEST(GraphFormat, RoundTripAndHeader) {
  Rng rng(7);
  const auto g = random_graph(5, 7, rng);
  std::ostringstream out;
  write_graph(out, g, {{"graph.seed", "3"}});
  std::istringstream in(out.str());
  GraphFileInfo info;
  EXPECT_EQ(read_graph(in, &info), g);
  EXPECT_EQ(info.header.at("graph.seed"), "3");
  EXPECT_EQ(info.header.at("M"), "5");
}

TEST(GraphFormat, CorruptHeaderReportsLine) {
  std::istringstream in("kg-v1 M=x N=2 room=kitchen\n");
  try {
    read_graph(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}
