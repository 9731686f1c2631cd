#include "support.hpp"

#include <touchloc/actions.hpp>
#include <touchloc/belief.hpp>

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

using namespace touchloc;

namespace {

struct DrillSetup {
  Scene scene = make_drill_scene(true);
  std::vector<Pose> hyps;
  std::vector<Action> actions;
};

DrillSetup drill_setup(std::uint64_t seed, const ActionSetConfig& cfg = {3, 10, 42, 5}) {
  DrillSetup s;
  Rng rng = StreamFactory(seed).stream("prior");
  s.hyps = init_belief(Pose::identity(), {0.0009, 0.0009, 0.0009, 0.01}, 100, rng).poses();
  s.actions = generate_action_set(s.scene, Pose::identity(), s.hyps, cfg, StreamFactory(seed).child("actions"));
  return s;
}

}  // namespace

TEST(ActionCost, Arithmetic) {
  Action a = test::ray_action({0, 0, 0}, {1, 0, 0}, 0.3, 0.05, 0, 5.0);
  EXPECT_NEAR(action_cost(a), 11.0, 1e-12);
  a.fixed_time = 0.0;
  EXPECT_NEAR(action_cost(a), 6.0, 1e-12);
  const Action b = test::ray_action({1, 1, 1}, {0, 1, 0}, 0.3, 0.05, 1, 0.0);
  EXPECT_EQ(action_cost(a), action_cost(b));
}

TEST(GenSphere, CountAndDirections) {
  Rng rng = StreamFactory(1).stream("actions/sphere");
  const Pose c{0.1, -0.2, 0.3, 0.0};
  const double radius = 0.5, inplane = 0.05;
  const auto acts = gen_sphere(c, radius, 30, rng, inplane);
  ASSERT_EQ(acts.size(), 30u);
  for (const auto& a : acts) {
    EXPECT_NEAR(a.direction.norm(), 1.0, 1e-9);
    const Eigen::Vector3d to_c = c.translation() - a.start.translation();
    EXPECT_NEAR(to_c.dot(a.direction), radius, 1e-9);
    EXPECT_LE((to_c - to_c.dot(a.direction) * a.direction).norm(), inplane + 1e-12);
  }
}

TEST(GenSphere, Empty) {
  Rng rng = StreamFactory(1).stream("actions/sphere");
  EXPECT_TRUE(gen_sphere(Pose::identity(), 0.5, 0, rng).empty());
}

TEST(GenSphere, StartDistance) {
  Rng rng = StreamFactory(2).stream("actions/sphere");
  const double radius = 0.5, inplane = 0.05;
  for (const auto& a : gen_sphere(Pose::identity(), radius, 100, rng, inplane)) {
    const double d = a.start.translation().norm();
    EXPECT_GE(d, radius - 1e-12);
    EXPECT_LE(d, std::hypot(radius, inplane) + 1e-12);
  }
}

TEST(GenNormal, Count) {
  Rng rng = StreamFactory(3).stream("actions/normal");
  EXPECT_EQ(gen_normal(make_drill_like(), Pose::identity(), 160, rng).size(), 160u);
}

TEST(GenNormal, FlatSlabDirectionsAreFaceNormals) {
  const TriangleMesh slab = test::box({-0.5, -1.0, -0.025}, {0.5, 1.0, 0.025});
  Rng rng = StreamFactory(4).stream("actions/normal");
  for (const auto& a : gen_normal(slab, Pose::identity(), 200, rng)) {
    int axis_hits = 0;
    for (int k = 0; k < 3; ++k) axis_hits += std::abs(std::abs(a.direction[k]) - 1.0) < 1e-12 ? 1 : 0;
    EXPECT_EQ(axis_hits, 1);
    EXPECT_NEAR(a.direction.norm(), 1.0, 1e-12);
  }
}

TEST(GenNormal, AreaWeightedSampling) {
  // Faces of a 1 x 2 x 3 box have areas 6, 3, 2 (each twice); sample counts
  // per outward normal direction must follow them.
  const TriangleMesh b = test::box({0, 0, 0}, {1, 2, 3});
  auto pick = area_distribution(b);
  Rng rng = StreamFactory(5).stream("test/area");
  const int n = 10000;
  std::map<int, int> counts;
  for (int i = 0; i < n; ++i) {
    const auto [p, normal] = sample_surface(b, pick, rng);
    int axis = 0;
    normal.cwiseAbs().maxCoeff(&axis);
    ++counts[axis];
  }
  const double total = 2.0 * (6.0 + 3.0 + 2.0);
  const std::map<int, double> expected{{0, 12.0 / total}, {1, 6.0 / total}, {2, 4.0 / total}};
  for (const auto& [axis, frac] : expected) {
    EXPECT_NEAR(counts[axis] / static_cast<double>(n), frac, 0.05 * frac) << "axis " << axis;
  }
}

TEST(GenNormal, SamplesLieOnSurface) {
  const TriangleMesh b = test::box({0, 0, 0}, {1, 2, 3});
  auto pick = area_distribution(b);
  Rng rng = StreamFactory(6).stream("test/area");
  for (int i = 0; i < 500; ++i) {
    const auto [p, normal] = sample_surface(b, pick, rng);
    const Eigen::Vector3d hi(1, 2, 3);
    double slack = 1e9;
    for (int k = 0; k < 3; ++k) slack = std::min({slack, std::abs(p[k]), std::abs(p[k] - hi[k])});
    EXPECT_LT(slack, 1e-12);
  }
}

TEST(GenTable, Downward) {
  Rng rng = StreamFactory(7).stream("actions/table");
  const Pose sensed{0.2, 0.1, 0.0, 0.0};
  const double scatter = 0.15;
  const auto acts = gen_table(sensed, 10, rng, scatter);
  ASSERT_EQ(acts.size(), 10u);
  for (const auto& a : acts) {
    EXPECT_EQ(a.direction, Eigen::Vector3d(0, 0, -1));
    EXPECT_LE(std::hypot(a.start.x - sensed.x, a.start.y - sensed.y), scatter + 1e-12);
  }
  Rng rng1 = StreamFactory(8).stream("actions/table");
  EXPECT_EQ(gen_table(sensed, 1, rng1).size(), 1u);
}

TEST(GenHuman, ThreeAxisApproaches) {
  const auto acts = gen_human(Pose::identity());
  ASSERT_EQ(acts.size(), 3u);
  const TriangleMesh drill = make_drill_like();
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(acts[static_cast<std::size_t>(k)].direction, -Eigen::Vector3d::Unit(k));
    const auto& a = acts[static_cast<std::size_t>(k)];
    EXPECT_TRUE(ray_cast(a.start.translation(), a.direction, drill, Pose::identity()).has_value());
  }
}

TEST(ActionSet, DenseIdsAndOrder) {
  const auto s = drill_setup(1);
  ASSERT_EQ(s.actions.size(), 60u);
  for (std::size_t i = 0; i < s.actions.size(); ++i) EXPECT_EQ(s.actions[i].id, static_cast<int>(i));
  for (std::size_t i = 55; i < 60; ++i) EXPECT_EQ(s.actions[i].direction, Eigen::Vector3d(0, 0, -1));
}

TEST(ActionSet, Deterministic) {
  const auto a = drill_setup(5), b = drill_setup(5);
  std::ostringstream sa, sb;
  write_actions_csv(sa, a.actions);
  write_actions_csv(sb, b.actions);
  EXPECT_EQ(sa.str(), sb.str());
  const auto c = drill_setup(6);
  std::ostringstream sc;
  write_actions_csv(sc, c.actions);
  EXPECT_NE(sa.str(), sc.str());
}

TEST(ActionSet, StartsClearEveryHypothesis) {
  const auto s = drill_setup(2);
  const auto clear = StartClearance::around(s.hyps, s.scene, 0.0);
  for (const auto& a : s.actions) EXPECT_TRUE(clear.is_clear(a.start.translation())) << "action " << a.id;
}

TEST(ActionSet, LengthReachesEveryContact) {
  const auto s = drill_setup(3);
  for (const auto& a : s.actions) {
    EXPECT_GT(a.length, 0.0);
    EXPECT_NEAR(a.direction.norm(), 1.0, 1e-9);
    for (const auto& h : s.hyps) {
      if (auto d = s.scene.travel_to_contact(a, h)) EXPECT_LE(*d, a.length);
    }
  }
}

TEST(ActionSet, CsvRoundTripIsExact) {
  const auto s = drill_setup(4);
  std::stringstream ss;
  write_actions_csv(ss, s.actions);
  const std::string header = ss.str().substr(0, ss.str().find('\n'));
  EXPECT_EQ(header, "id,x,y,z,theta,dx,dy,dz,length,speed,fixed_time");
  const auto back = read_actions_csv(ss);
  ASSERT_EQ(back.size(), s.actions.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].start.as_vector(), s.actions[i].start.as_vector());
    EXPECT_EQ(back[i].direction, s.actions[i].direction);
    EXPECT_EQ(back[i].length, s.actions[i].length);
    EXPECT_EQ(back[i].speed, s.actions[i].speed);
    EXPECT_EQ(back[i].fixed_time, s.actions[i].fixed_time);
  }
}

TEST(ActionSet, CsvRejectsBadRows) {
  std::istringstream bad_dir("id,x,y,z,theta,dx,dy,dz,length,speed,fixed_time\n0,0,0,0,0,1,1,0,1,0.05,5\n");
  EXPECT_THROW(read_actions_csv(bad_dir), std::runtime_error);
  std::istringstream short_row("0,0,0,0,0,1,0,0,1,0.05\n");
  EXPECT_THROW(read_actions_csv(short_row), std::runtime_error);
}
