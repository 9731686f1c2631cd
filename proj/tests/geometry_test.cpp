#include "support.hpp"

#include <touchloc/geometry.hpp>
#include <touchloc/rng.hpp>
#include <touchloc/scene.hpp>

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace touchloc;
using touchloc::test::ray_action;

namespace {

std::string parse_error(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_obj(in);
  } catch (const MeshError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ObjParse, UnitCube) {
  const TriangleMesh m = test::unit_cube();
  EXPECT_EQ(m.vertex_count(), 8u);
  EXPECT_EQ(m.triangle_count(), 12u);
}

TEST(ObjParse, QuadFaceRejected) {
  EXPECT_NE(parse_error("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").find("non-triangle face"),
            std::string::npos);
}

TEST(ObjParse, IndexOutOfRange) {
  std::string text = test::kUnitCubeObj;
  text += "f 1 2 99\n";
  EXPECT_NE(parse_error(text).find("index out of range"), std::string::npos);
}

TEST(ObjParse, OtherRecordsWarn) {
  std::string text = "# comment\nvn 0 0 1\nvt 0 0\n";
  text += test::kUnitCubeObj;
  std::istringstream in(text);
  std::vector<std::string> warnings;
  const TriangleMesh m = parse_obj(in, &warnings);
  EXPECT_EQ(m.triangle_count(), 12u);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(RayCast, CubeAhead) {
  const TriangleMesh cube = test::unit_cube();
  const auto d = ray_cast({0, 0, 0}, {1, 0, 0}, cube, Pose{2, 0, 0, 0});
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, 1.5, 1e-12);
}

TEST(RayCast, TranslatedPose) {
  const TriangleMesh cube = test::unit_cube();
  const auto d = ray_cast({0, 0, 0}, {1, 0, 0}, cube, Pose{2.5, 0, 0, 0});
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, 2.0, 1e-12);
}

TEST(RayCast, AboveCubeMisses) {
  const TriangleMesh cube = test::unit_cube();
  EXPECT_FALSE(ray_cast({0, 0, 5}, {1, 0, 0}, cube, Pose{2, 0, 0, 0}));
}

TEST(RayCast, RotatedCubeHitsCorner) {
  const TriangleMesh cube = test::unit_cube();
  const double quarter = std::numbers::pi / 4.0;
  const auto d = ray_cast({0, 0, 0}, {1, 0, 0}, cube, Pose{2, 0, 0, quarter});
  ASSERT_TRUE(d);
  EXPECT_NEAR(*d, 2.0 - std::sqrt(0.5), 1e-9);
}

TEST(ContactTime, DistanceOverSpeed) {
  const auto scene = test::cube_scene(2.0);
  const auto a = ray_action({0, 0, 0}, {1, 0, 0}, 3.0, 1.0);
  const Observation o = contact_time(a, Pose::identity(), scene.object, scene.rig);
  ASSERT_TRUE(o.is_contact());
  EXPECT_NEAR(o.time(), 1.5, 1e-12);
}

TEST(ContactTime, HalfSpeedDoublesTime) {
  const auto scene = test::cube_scene(2.0);
  const auto a = ray_action({0, 0, 0}, {1, 0, 0}, 3.0, 0.5);
  const Observation o = contact_time(a, Pose::identity(), scene.object, scene.rig);
  ASSERT_TRUE(o.is_contact());
  EXPECT_NEAR(o.time(), 3.0, 1e-12);
}

TEST(ContactTime, OutOfReach) {
  const auto scene = test::cube_scene(5.5);
  const auto a = ray_action({0, 0, 0}, {1, 0, 0}, 3.0, 1.0);
  EXPECT_TRUE(contact_time(a, Pose::identity(), scene.object, scene.rig).is_no_contact());
}

TEST(RayCastProperty, RigidTransformInvariance) {
  const TriangleMesh drill = make_drill_like();
  Rng rng = StreamFactory(7).stream("test/rigid");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int hits = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Pose pose{0.05 * u(rng), 0.05 * u(rng), 0.05 * u(rng), u(rng)};
    const Pose t{u(rng), u(rng), u(rng), 3.0 * u(rng)};
    const Eigen::Vector3d origin(0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng));
    const Eigen::Vector3d target(0.03 * u(rng), 0.03 * u(rng), 0.03 * u(rng));
    const Eigen::Vector3d dir = (target - origin).normalized();
    const auto d0 = ray_cast(origin, dir, drill, pose);
    const auto d1 = ray_cast(t.apply(origin), t.apply_direction(dir), drill, t.compose(pose));
    ASSERT_EQ(d0.has_value(), d1.has_value());
    if (d0) {
      EXPECT_NEAR(*d0, *d1, 1e-9);
      ++hits;
    }
  }
  EXPECT_GT(hits, 100);
}

TEST(RayCastProperty, TranslationAlongRayShiftsTime) {
  const auto scene = make_drill_scene(false);
  Rng rng = StreamFactory(8).stream("test/shift");
  std::uniform_real_distribution<double> u(-1.0, 1.0), shift(0.0, 0.1);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Vector3d origin(0.6 * u(rng), 0.6 * u(rng), 0.6 * u(rng));
    const Eigen::Vector3d dir = (Eigen::Vector3d(0.02 * u(rng), 0.02 * u(rng), 0.02 * u(rng)) - origin).normalized();
    const auto a = ray_action(origin, dir, 2.0, 0.05);
    const Pose p{0.01 * u(rng), 0.01 * u(rng), 0.01 * u(rng), 0.3 * u(rng)};
    const double d = shift(rng);
    const Pose q{p.x + d * dir.x(), p.y + d * dir.y(), p.z + d * dir.z(), p.theta};
    const Observation o0 = scene.contact_time(a, p);
    const Observation o1 = scene.contact_time(a, q);
    if (o0.is_no_contact() || o1.is_no_contact()) continue;
    const Observation behind = scene.contact_time(ray_action(origin, -dir, d, 0.05), p);
    if (behind.is_contact()) {
      EXPECT_LE(o1.time(), o0.time() + d / a.speed + 1e-9);
      continue;
    }
    EXPECT_NEAR(o1.time() - o0.time(), d / a.speed, 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(RayCastProperty, RigIsMinOfSinglePoints) {
  const TriangleMesh drill = make_drill_like();
  const SensorRig rig = SensorRig::three_finger(0.03);
  Rng rng = StreamFactory(9).stream("test/rig");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector3d origin(0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng));
    Action a = ray_action(origin, -origin, 1.0, 0.05);
    a.start.theta = 3.0 * u(rng);
    const Pose pose{0.01 * u(rng), 0.01 * u(rng), 0.01 * u(rng), 0.2 * u(rng)};
    const Observation combined = contact_time(a, pose, drill, rig);
    double best = kNoContact;
    for (const auto& p : rig_start_points(a, rig)) {
      Action single = a;
      single.start.x = p.x();
      single.start.y = p.y();
      single.start.z = p.z();
      best = std::min(best, contact_time(single, pose, drill, SensorRig::single_point()).raw());
    }
    EXPECT_EQ(combined.raw(), best);
  }
}

TEST(RayCastProperty, GridIndexMatchesBruteForce) {
  const TriangleMesh drill = make_drill_like();
  Rng rng = StreamFactory(10).stream("test/grid");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const Pose pose{0.05 * u(rng), 0.05 * u(rng), 0.05 * u(rng), u(rng)};
    const Eigen::Vector3d origin(0.4 * u(rng), 0.4 * u(rng), 0.4 * u(rng));
    const Eigen::Vector3d dir = Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized();
    const auto fast = ray_cast(origin, dir, drill, pose);
    const auto slow = ray_cast_bruteforce(origin, dir, drill, pose);
    ASSERT_EQ(fast.has_value(), slow.has_value());
    if (fast) EXPECT_NEAR(*fast, *slow, 1e-12);
  }
}
