#pragma once

#include <touchloc/geometry.hpp>
#include <touchloc/scene.hpp>

#include <sstream>
#include <string>

namespace touchloc::test {

inline const char* kUnitCubeObj =
    "v -0.5 -0.5 -0.5\nv 0.5 -0.5 -0.5\nv 0.5 0.5 -0.5\nv -0.5 0.5 -0.5\n"
    "v -0.5 -0.5 0.5\nv 0.5 -0.5 0.5\nv 0.5 0.5 0.5\nv -0.5 0.5 0.5\n"
    "f 1 3 2\nf 1 4 3\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\n"
    "f 2 3 7\nf 2 7 6\nf 3 4 8\nf 3 8 7\nf 4 1 5\nf 4 5 8\n";

inline TriangleMesh unit_cube() {
  std::istringstream in(kUnitCubeObj);
  return parse_obj(in);
}

inline TriangleMesh box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  mesh_builder::Soup s;
  s.box(lo, hi);
  return std::move(s).build();
}

/// Cube of side 1 centred at (cx, 0, 0), nothing else in the scene.
inline Scene cube_scene(double cx) {
  return Scene{"cube", box({cx - 0.5, -0.5, -0.5}, {cx + 0.5, 0.5, 0.5}), std::nullopt, SensorRig::single_point()};
}

inline Action ray_action(const Eigen::Vector3d& start, const Eigen::Vector3d& dir, double length, double speed,
                         int id = 0, double fixed_time = 0.0) {
  Action a;
  a.id = id;
  a.start = Pose{start.x(), start.y(), start.z(), 0.0};
  a.direction = dir.normalized();
  a.length = length;
  a.speed = speed;
  a.fixed_time = fixed_time;
  return a;
}

}  // namespace touchloc::test
