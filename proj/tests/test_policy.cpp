#include <gtest/gtest.h>

#include "helpers.hpp"
#include "zonegraph/oracles.hpp"
#include "zonegraph/selfcheck.hpp"

using namespace zonegraph;

namespace {

struct Toy {
  Scene scene;
  EmbeddingProvider provider = EmbeddingProvider::synthetic(0, 4);
  std::shared_ptr<const KnowledgeGraph> graph;
  ModelDims dims{4, 4, 5, 2};
};

// 1 x 3 strip: two open cells, the goal object in the blocked far cell
Toy strip() {
  Toy t;
  t.scene = zgtest::open_scene(1, 3, {{"Bowl", 0, 2, HeightBand::Mid}});
  zgtest::block(t.scene, 0, 2);
  KnowledgeGraph g;
  g.zones = 2;
  g.features = 4;
  g.room = RoomCategory::Kitchen;
  g.nodes = Tensor::matrix(2, 4);
  g.nodes(0, 0) = 1.0;
  g.nodes(1, 1) = 1.0;
  g.edges = Tensor::matrix(2, 2, 0.5);
  g.edges(0, 0) = g.edges(1, 1) = 1.0;
  t.graph = std::make_shared<const KnowledgeGraph>(g);
  return t;
}

Trajectory hand_trajectory(std::vector<double> rewards, bool finished) {
  Trajectory t;
  for (double r : rewards) {
    TrajectoryStep s;
    s.reward = r;
    t.steps.push_back(s);
  }
  t.steps.back().done = finished;
  return t;
}

}  // namespace

TEST(Compose, PoolingAndOneHot) {
  SpatialFeature f{7, 3, Vec(7 * 7 * 3, 0.0)};
  const Vec goal{0, 1, 0}, gra{0.5, 0.5};
  auto in = compose_input(f, goal, gra, std::nullopt);
  for (double v : in.img) EXPECT_EQ(v, 0.0);
  for (double v : in.act) EXPECT_EQ(v, 0.0);
  auto cell = f.cell(2, 5);
  cell[0] = 4.9;
  cell[2] = -0.49;
  in = compose_input(f, goal, gra, Action::Done);
  EXPECT_NEAR(in.img[0], 0.1, 1e-15);
  EXPECT_NEAR(in.img[2], -0.01, 1e-15);
  EXPECT_EQ(in.act, (std::array<double, kNumActions>{0, 0, 0, 0, 0, 1}));
  EXPECT_EQ(in.obj, goal);
  EXPECT_EQ(in.gra, gra);
  EXPECT_EQ(in.concat().size(), 3u + 3u + 2u + 6u);
}

TEST(Compose, MasksZeroTheirBlock) {
  SpatialFeature f{7, 2, Vec(7 * 7 * 2, 1.0)};
  const Vec goal{1, 0}, gra{2, 3};
  const auto in = compose_input(f, goal, gra, Action::MoveAhead, parse_mask("img,obj,gra,act"));
  for (double v : in.concat()) EXPECT_EQ(v, 0.0);
  const auto only = compose_input(f, goal, gra, Action::MoveAhead, parse_mask("obj"));
  EXPECT_EQ(only.obj, (Vec{0, 0}));
  EXPECT_EQ(only.img, (Vec{1, 1}));
  EXPECT_THROW(parse_mask("img,depth"), ParseError);
  EXPECT_EQ(to_string(parse_mask("act,img")), "img,act");
}

TEST(Compose, DimensionMismatch) {
  SpatialFeature f{7, 3, Vec(7 * 7 * 3, 0.0)};
  EXPECT_THROW(compose_input(f, Vec{1, 0}, Vec{}, std::nullopt), DimensionError);
}

TEST(Reward, SuccessStepAndFailedDone) {
  StepEvent ok;
  ok.success = ok.terminated = ok.done_issued = true;
  EXPECT_EQ(reward(ok), 5.0);
  StepEvent move;
  move.moved = true;
  EXPECT_EQ(reward(move), -0.01);
  auto st = zgtest::episode(zgtest::open_scene(1, 8, {{"Bowl", 0, 7, HeightBand::Mid}}), "Bowl", {0, 0, 0, 0});
  const auto r = step(st, Action::Done);
  EXPECT_TRUE(r.event.terminated);
  EXPECT_EQ(reward(r.event), -0.01);
}

TEST(Rollout, DeterministicForSeed) {
  const auto t = strip();
  const auto p = PolicyParams::init(t.dims, 3);
  const auto gs = GraphState::start(t.graph, p.lambda());
  auto env = zgtest::episode(t.scene, "Bowl", {0, 0, 180, 0}, 40);
  const auto a = rollout(env, p, gs, t.provider, 99);
  const auto b = rollout(env, p, gs, t.provider, 99);
  ASSERT_EQ(a.length(), b.length());
  for (int k = 0; k < a.length(); ++k) {
    EXPECT_EQ(a.steps[static_cast<std::size_t>(k)].action, b.steps[static_cast<std::size_t>(k)].action);
    EXPECT_EQ(a.steps[static_cast<std::size_t>(k)].log_prob, b.steps[static_cast<std::size_t>(k)].log_prob);
  }
  EXPECT_EQ(a.final_state.pose, b.final_state.pose);
  EXPECT_LE(a.length(), 40);
}

TEST(Rollout, UniformPolicyOneStepSuccessRate) {
  const auto t = strip();
  const auto p = PolicyParams::zeros(t.dims);
  const auto gs = GraphState::start(t.graph, p.lambda());
  const auto env = zgtest::episode(t.scene, "Bowl", {0, 1, 0, 0});
  ASSERT_TRUE(goal_visible(t.scene, env.pose, "Bowl"));
  const int n = 10000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const auto tr = rollout(env, p, gs, t.provider, static_cast<std::uint64_t>(i) + 1);
    hits += tr.length() == 1 && tr.success;
    ASSERT_NEAR(tr.steps[0].log_prob, -std::log(6.0), 1e-12);
  }
  const double q = 1.0 / 6.0;
  const double sigma = std::sqrt(n * q * (1 - q));
  EXPECT_NEAR(hits, n * q, 3 * sigma);
}

TEST(Rollout, UniformSelectionIgnoresNetwork) {
  const auto t = strip();
  auto p = PolicyParams::init(t.dims, 1);
  const auto gs = GraphState::start(t.graph, p.lambda());
  const auto env = zgtest::episode(t.scene, "Bowl", {0, 0, 0, 0}, 30);
  const auto a = rollout(env, p, gs, t.provider, 5, {ActionSelection::Uniform, {}});
  p.actor_b[0] = 100.0;
  const auto b = rollout(env, p, gs, t.provider, 5, {ActionSelection::Uniform, {}});
  ASSERT_EQ(a.length(), b.length());
  for (std::size_t k = 0; k < a.steps.size(); ++k) EXPECT_EQ(a.steps[k].action, b.steps[k].action);
}

TEST(Rollout, GreedyPicksLowestIndexOnTies) {
  EXPECT_EQ(greedy_action({0, 0, 0, 0, 0, 0}), 0);
  EXPECT_EQ(greedy_action({0, 2, 2, 0, 0, 1}), 1);
}

TEST(Returns, OneAndTwoSteps) {
  const auto one = hand_trajectory({5.0}, true);
  EXPECT_EQ(discounted_returns(one, 0.9), (Vec{5.0}));
  const auto two = hand_trajectory({-0.01, 5.0}, true);
  const auto r = discounted_returns(two, 0.9);
  EXPECT_NEAR(r[0], 4.49, 1e-12);
  EXPECT_EQ(r[1], 5.0);
  auto cut = hand_trajectory({1.0}, false);
  cut.bootstrap_value = 2.0;
  EXPECT_NEAR(discounted_returns(cut, 0.5)[0], 2.0, 1e-15);
}

TEST(A2c, OneStepAdvantageIsRewardMinusValue) {
  const auto t = strip();
  auto p = PolicyParams::init(t.dims, 4);
  p.critic_b[0] = 0.3;
  const auto gs = GraphState::start(t.graph, p.lambda());
  auto env = zgtest::episode(t.scene, "Bowl", {0, 1, 0, 0});
  Trajectory tr;
  for (std::uint64_t s = 0; s < 200; ++s) {
    tr = rollout(env, p, gs, t.provider, s);
    if (tr.length() == 1) break;
  }
  ASSERT_EQ(tr.length(), 1);
  const auto adv = advantages(tr, p, gs, 0.99);
  EXPECT_NEAR(adv[0], tr.steps[0].reward - tr.steps[0].value, 1e-12);
}

TEST(A2c, LossMatchesDenseRecomputation) {
  Rng rng(6);
  const auto t = strip();
  for (int i = 0; i < 10; ++i) {
    auto p = check_detail::random_params(t.dims, rng);
    const auto gs = GraphState::start(t.graph, p.lambda());
    const auto env = zgtest::episode(t.scene, "Bowl", {0, 0, 0, 0}, 5);
    const auto tr = rollout(env, p, gs, t.provider, static_cast<std::uint64_t>(i));
    const A2cConfig cfg{0.9, 0.05, 0.5};
    const auto adv = advantages(tr, p, gs, cfg.gamma);
    const auto lp = a2c_loss(tr, p, gs, cfg, nullptr, &adv);
    EXPECT_NEAR(lp.total, oracle::a2c_total_loss(tr, p, *t.graph, cfg, adv), 1e-10);
  }
}

TEST(A2c, EmptyTrajectoryHasZeroLoss) {
  const auto t = strip();
  const auto p = PolicyParams::zeros(t.dims);
  Trajectory tr;
  EXPECT_EQ(a2c_loss(tr, p, GraphState::start(t.graph, 0.5), {}, nullptr).total, 0.0);
}
