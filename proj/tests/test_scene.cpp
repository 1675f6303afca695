#include <gtest/gtest.h>

#include <deque>

#include "helpers.hpp"
#include "zonegraph/oracles.hpp"

using namespace zonegraph;
using zgtest::open_scene;

namespace {

bool flood_connected(const Scene& s) {
  std::vector<int> seen(s.reachable.size(), 0);
  std::deque<int> q;
  int total = 0;
  for (std::size_t i = 0; i < s.reachable.size(); ++i)
    if (s.reachable[i]) {
      ++total;
      if (q.empty()) {
        q.push_back(static_cast<int>(i));
        seen[i] = 1;
      }
    }
  int count = 0;
  while (!q.empty()) {
    const int c = q.front();
    q.pop_front();
    ++count;
    const int x = c % s.width, z = c / s.width;
    for (auto [dx, dz] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      if (!s.is_reachable(x + dx, z + dz)) continue;
      const int j = (z + dz) * s.width + x + dx;
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        q.push_back(j);
      }
    }
  }
  return total > 0 && count == total;
}

ObjectInstance obj(const char* c, int ix, int iz, HeightBand b = HeightBand::Mid) { return {c, ix, iz, b}; }

}  // namespace

TEST(Generate, SameSeedByteIdentical) {
  const auto a = generate_scene(RoomCategory::Bedroom, 8, 8, 7);
  const auto b = generate_scene(RoomCategory::Bedroom, 8, 8, 7);
  EXPECT_EQ(scene_to_string(a), scene_to_string(b));
  EXPECT_NE(scene_to_string(a), scene_to_string(generate_scene(RoomCategory::Bedroom, 8, 8, 8)));
}

TEST(Generate, KitchenHasAtLeastFourGoals) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto s = generate_scene(RoomCategory::Kitchen, 8, 8, seed);
    EXPECT_GE(s.goal_categories().size(), 4u) << seed;
  }
}

TEST(Generate, AllRoomsValidAndConnected) {
  for (auto room : kRoomCategories)
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const auto s = generate_scene(room, 6 + static_cast<int>(seed % 4), 8, seed);
      EXPECT_TRUE(scene_problems(s).empty()) << to_string(room) << " " << seed;
      EXPECT_TRUE(flood_connected(s)) << to_string(room) << " " << seed;
      EXPECT_GE(s.goal_categories().size(), 4u);
    }
}

TEST(Generate, SmallBathroomConnected) {
  const auto s = generate_scene(RoomCategory::Bathroom, 4, 4, 1);
  EXPECT_TRUE(flood_connected(s));
}

TEST(Generate, TooSmallIsError) { EXPECT_THROW(generate_scene(RoomCategory::Kitchen, 3, 8, 1), GenerationError); }

TEST(SceneFormat, RoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = generate_scene(kRoomCategories[seed % 4], 8, 7, seed);
    const auto text = scene_to_string(s);
    const auto back = scene_from_string(text);
    EXPECT_EQ(back, s);
    EXPECT_EQ(scene_to_string(back), text);
  }
}

TEST(SceneFormat, CorruptionReportsLine) {
  auto text = scene_to_string(generate_scene(RoomCategory::Kitchen, 8, 8, 1));
  text.replace(0, text.find('\n'), "scene-v9");
  try {
    scene_from_string(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(Visibility, DeadAheadNearAndFar) {
  auto s = open_scene(5, 6, {obj("Bowl", 2, 2), obj("Pot", 2, 4)});
  const auto v = visible_objects(s, {2, 0, 0, 0});
  ASSERT_EQ(v.visible.size(), 1u);
  EXPECT_EQ(v.visible[0].category, "Bowl");
  EXPECT_EQ(v.visible[0].alpha, 1);
  EXPECT_NEAR(v.visible[0].distance, 1.0, 1e-12);
  EXPECT_NEAR(v.visible[0].bearing, 0.0, 1e-12);
}

TEST(Visibility, BehindIsHidden) {
  auto s = open_scene(5, 5, {obj("Bowl", 2, 1)});
  EXPECT_TRUE(visible_objects(s, {2, 2, 0, 0}).visible.empty());
  EXPECT_EQ(visible_objects(s, {2, 2, 180, 0}).visible.size(), 1u);
}

TEST(Visibility, BandNeedsMatchingPitch) {
  auto s = open_scene(5, 5, {obj("Pot", 2, 3, HeightBand::Low)});
  EXPECT_TRUE(visible_objects(s, {2, 2, 0, 0}).visible.empty());
  EXPECT_EQ(visible_objects(s, {2, 2, 0, -30}).visible.size(), 1u);
}

TEST(Visibility, MatchesIntegerOracleEverywhere) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto s = generate_scene(kRoomCategories[seed % 4], 7, 7, seed);
    for (int iz = 0; iz < s.depth; ++iz)
      for (int ix = 0; ix < s.width; ++ix)
        for (int yaw = 0; yaw < 360; yaw += 45)
          for (int pitch : kPitches) {
            const auto v = visible_objects(s, {ix, iz, yaw, pitch});
            std::size_t expect = 0;
            for (const auto& o : s.objects) expect += oracle::sees(ix, iz, yaw, pitch, o);
            ASSERT_EQ(v.visible.size(), expect) << ix << "," << iz << " yaw " << yaw << " pitch " << pitch;
          }
  }
}

TEST(Step, Rotations) {
  auto st = zgtest::episode(open_scene(3, 3, {obj("Bowl", 0, 0)}), "Bowl", {1, 1, 0, 0});
  step(st, Action::RotateLeft);
  EXPECT_EQ(st.pose.yaw, 315);
  step(st, Action::RotateRight);
  step(st, Action::RotateRight);
  EXPECT_EQ(st.pose.yaw, 45);
}

TEST(Step, BlockedMoveLeavesPose) {
  auto s = open_scene(3, 3, {obj("Bowl", 0, 0)});
  zgtest::block(s, 1, 2);
  auto st = zgtest::episode(s, "Bowl", {1, 1, 0, 0});
  const auto r = step(st, Action::MoveAhead);
  EXPECT_TRUE(r.event.blocked);
  EXPECT_EQ(st.pose, (Pose{1, 1, 0, 0}));
  EXPECT_EQ(st.step_count, 1);
  EXPECT_DOUBLE_EQ(st.path_length, 0.0);
}

TEST(Step, MoveAndDiagonalLength) {
  auto st = zgtest::episode(open_scene(4, 4, {obj("Bowl", 3, 3)}), "Bowl", {0, 0, 0, 0});
  step(st, Action::MoveAhead);
  EXPECT_EQ(st.pose.iz, 1);
  step(st, Action::RotateRight);
  step(st, Action::MoveAhead);
  EXPECT_EQ(st.pose.ix, 1);
  EXPECT_EQ(st.pose.iz, 2);
  EXPECT_NEAR(st.path_length, 0.5 + 0.5 * std::sqrt(2.0), 1e-12);
}

TEST(Step, DiagonalCannotCutCorner) {
  auto s = open_scene(3, 3, {obj("Bowl", 2, 2)});
  zgtest::block(s, 1, 0);
  auto st = zgtest::episode(s, "Bowl", {0, 0, 45, 0});
  EXPECT_TRUE(step(st, Action::MoveAhead).event.blocked);
}

TEST(Step, LookClamps) {
  auto st = zgtest::episode(open_scene(3, 3, {obj("Bowl", 0, 0)}), "Bowl", {1, 1, 0, 0});
  EXPECT_FALSE(step(st, Action::LookUp).event.clamped);
  EXPECT_TRUE(step(st, Action::LookUp).event.clamped);
  EXPECT_EQ(st.pose.pitch, 30);
}

TEST(Step, DoneNearVisibleGoalSucceeds) {
  // object at (0.5, 1.0) m offset: 1.12 m, within the view cone
  auto st = zgtest::episode(open_scene(4, 4, {obj("Bowl", 2, 3)}), "Bowl", {1, 1, 0, 0});
  const auto r = step(st, Action::Done);
  EXPECT_TRUE(r.event.success);
  EXPECT_TRUE(st.terminated);
  EXPECT_TRUE(st.success);
}

TEST(Step, DoneFarOrUnseenFails) {
  auto st = zgtest::episode(open_scene(3, 6, {obj("Bowl", 1, 5)}), "Bowl", {1, 1, 0, 0});
  const auto r = step(st, Action::Done);
  EXPECT_FALSE(r.event.success);
  EXPECT_TRUE(st.terminated);
}

TEST(Step, TimeoutTerminatesWithoutSuccess) {
  auto st = zgtest::episode(open_scene(3, 3, {obj("Bowl", 1, 2)}), "Bowl", {1, 1, 0, 0}, 2);
  step(st, Action::RotateLeft);
  const auto r = step(st, Action::RotateRight);
  EXPECT_TRUE(r.event.timeout);
  EXPECT_TRUE(st.terminated);
  EXPECT_FALSE(st.success);
  EXPECT_THROW(step(st, Action::Done), UsageError);
}

TEST(Reset, DeterministicAndOnGrid) {
  const auto s = zgtest::share(generate_scene(RoomCategory::Kitchen, 8, 8, 3));
  const auto goal = s->goal_categories().front();
  EXPECT_EQ(reset_episode(s, goal, 11).pose, reset_episode(s, goal, 11).pose);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto st = reset_episode(s, goal, seed);
    ASSERT_TRUE(is_valid_pose(*s, st.pose));
    EXPECT_EQ(st.pose.pitch, 0);
    EXPECT_EQ(st.step_count, 0);
  }
}

TEST(Reset, MissingGoalIsError) {
  const auto s = zgtest::share(open_scene(3, 3, {obj("Bowl", 0, 0)}));
  EXPECT_THROW(reset_episode(s, "Laptop", 1), ConfigError);
}

TEST(Geodesic, ZeroInSuccessCell) {
  const auto s = open_scene(3, 3, {obj("Bowl", 1, 2)});
  EXPECT_EQ(shortest_path_length(s, {1, 1, 0, 0}, "Bowl"), 0.0);
}

TEST(Geodesic, CorridorOfSixCells) {
  // 1 x 10 corridor, object at the far end; cells within 3 hops see it
  auto s = open_scene(1, 10, {obj("Bowl", 0, 9)});
  zgtest::block(s, 0, 9);
  EXPECT_DOUBLE_EQ(shortest_path_length(s, {0, 0, 0, 0}, "Bowl").value(), 3.0);
}

TEST(Geodesic, DetourMatchesOracle) {
  auto s = open_scene(7, 7, {obj("Bowl", 3, 6)});
  for (int x = 0; x < 6; ++x) zgtest::block(s, x, 3);
  zgtest::block(s, 3, 6);
  for (int iz = 0; iz < 7; ++iz)
    for (int ix = 0; ix < 7; ++ix) {
      if (!s.is_reachable(ix, iz)) continue;
      EXPECT_DOUBLE_EQ(shortest_path_length(s, {ix, iz, 0, 0}, "Bowl").value(), oracle::geodesic(s, ix, iz, "Bowl"));
    }
}

TEST(Geodesic, RandomScenesMatchOracle) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto s = generate_scene(kRoomCategories[seed % 4], 7, 7, seed);
    for (const auto& g : s.goal_categories())
      for (int iz = 0; iz < s.depth; ++iz)
        for (int ix = 0; ix < s.width; ++ix) {
          if (!s.is_reachable(ix, iz)) continue;
          const auto d = shortest_path_length(s, {ix, iz, 0, 0}, g);
          const double o = oracle::geodesic(s, ix, iz, g);
          if (o < 0) EXPECT_FALSE(d.has_value());
          else EXPECT_DOUBLE_EQ(d.value(), o);
        }
  }
}
