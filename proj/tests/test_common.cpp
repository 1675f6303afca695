#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "helpers.hpp"

using namespace zonegraph;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, IndexStaysInRangeAndCoversAll) {
  Rng r(7);
  std::set<std::size_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto k = r.index(6);
    ASSERT_LT(k, 6u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 6u);
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(3);
  double su = 0, sn = 0, sn2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.01);
  EXPECT_NEAR(sn / n, 0.0, 0.03);
  EXPECT_NEAR(sn2 / n, 1.0, 0.05);
}

TEST(Hash, CombineIsOrderSensitive) {
  EXPECT_NE(hash_combine(1, 2), hash_combine(2, 1));
  EXPECT_EQ(hash_combine(5, 9), hash_combine(5, 9));
  EXPECT_NE(hash_string("Bowl"), hash_string("Plate"));
}

TEST(VecMath, CosineAndDistance) {
  const Vec a{1, 0}, b{0, 2}, c{3, 0};
  EXPECT_DOUBLE_EQ(cosine(a, b), 0.0);
  EXPECT_DOUBLE_EQ(cosine(a, c), 1.0);
  EXPECT_DOUBLE_EQ(squared_distance(a, b), 5.0);
  EXPECT_DOUBLE_EQ(norm2(b), 2.0);
  EXPECT_FALSE(all_finite(Vec{1.0, std::nan("")}));
}

TEST(Errors, CarryCategory) {
  try {
    throw DimensionError("x");
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), "dimension");
  }
}

TEST(Categories, TwentyTwoGoalsFourRooms) {
  EXPECT_EQ(kGoalCategories.size(), 22u);
  std::set<std::string_view> uniq(kGoalCategories.begin(), kGoalCategories.end());
  EXPECT_EQ(uniq.size(), 22u);
  EXPECT_EQ(kRoomCategories.size(), 4u);
  for (auto r : kRoomCategories) EXPECT_EQ(parse_room(to_string(r)), r);
  EXPECT_THROW(parse_room("garage"), Error);
}

TEST(Categories, BuiltinTablesMatchDataFile) {
  const auto file = load_room_tables(std::string(ZONEGRAPH_SOURCE_DIR) + "/data/room_tables.txt");
  EXPECT_EQ(file, builtin_room_tables());
}

TEST(Categories, EveryGoalAppearsInSomeRoom) {
  std::set<std::string> named;
  for (const auto& [room, zones] : builtin_room_tables().zones)
    for (const auto& z : zones)
      for (const auto& item : z) named.insert(item.category);
  for (auto g : kGoalCategories) EXPECT_TRUE(named.count(std::string(g))) << g;
}

TEST(Categories, BadTableLineReportsLine) {
  std::istringstream in("room-tables-v1\nzone kitchen Pot\n");
  try {
    parse_room_tables(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Config, ParsesAndEchoesRoundTrip) {
  std::istringstream in("# c\ntrain.lr = 0.003\ntrain.episodes = 10\neval.seeds = 4,5\ntrain.split = zero_shot\n");
  const Config c = parse_config(in);
  EXPECT_DOUBLE_EQ(c.train.lr, 0.003);
  EXPECT_EQ(c.train.episodes, 10);
  EXPECT_EQ(c.eval.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_EQ(c.train.split, SplitMode::ZeroShot);
  std::istringstream again(config_to_string(c));
  EXPECT_EQ(parse_config(again).echo(), c.echo());
}

TEST(Config, RejectsUnknownKeyAndBadValues) {
  std::istringstream a("nope = 1\n");
  EXPECT_THROW(parse_config(a), ConfigError);
  std::istringstream b("train.lr = fast\n");
  EXPECT_THROW(parse_config(b), ConfigError);
  Config c;
  c.train.workers = 0;
  EXPECT_THROW(c.train.validate(), ConfigError);
}
