#pragma once

#include <touchloc/geometry.hpp>

#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace touchloc {

namespace mesh_builder {

struct Soup {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<TriangleMesh::Triangle> triangles;

  int add(const Eigen::Vector3d& v) {
    vertices.push_back(v);
    return static_cast<int>(vertices.size()) - 1;
  }
  void tri(int a, int b, int c) { triangles.push_back({a, b, c}); }
  void quad(int a, int b, int c, int d) {
    tri(a, b, c);
    tri(a, c, d);
  }

  /// Axis-aligned box with outward CCW faces; `skip_bottom` omits the -z face.
  void box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi, bool skip_bottom = false) {
    const int b = static_cast<int>(vertices.size());
    for (int k = 0; k < 8; ++k) {
      add({(k & 1) ? hi.x() : lo.x(), (k & 2) ? hi.y() : lo.y(), (k & 4) ? hi.z() : lo.z()});
    }
    if (!skip_bottom) quad(b + 0, b + 2, b + 3, b + 1);  // -z
    quad(b + 4, b + 5, b + 7, b + 6);                    // +z
    quad(b + 0, b + 1, b + 5, b + 4);                    // -y
    quad(b + 2, b + 6, b + 7, b + 3);                    // +y
    quad(b + 0, b + 4, b + 6, b + 2);                    // -x
    quad(b + 1, b + 3, b + 7, b + 5);                    // +x
  }

  /// Closed z-aligned cylinder.
  void cylinder(const Eigen::Vector2d& center, double radius, double z0, double z1, int segments) {
    const int bottom_c = add({center.x(), center.y(), z0});
    const int top_c = add({center.x(), center.y(), z1});
    const int ring = static_cast<int>(vertices.size());
    for (int k = 0; k < segments; ++k) {
      const double a = 2.0 * std::numbers::pi * k / segments;
      const double cx = center.x() + radius * std::cos(a), cy = center.y() + radius * std::sin(a);
      add({cx, cy, z0});
      add({cx, cy, z1});
    }
    for (int k = 0; k < segments; ++k) {
      const int j = (k + 1) % segments;
      const int b0 = ring + 2 * k, t0 = b0 + 1, b1 = ring + 2 * j, t1 = b1 + 1;
      quad(b0, b1, t1, t0);
      tri(bottom_c, b1, b0);
      tri(top_c, t0, t1);
    }
  }

  TriangleMesh build() && { return TriangleMesh(std::move(vertices), std::move(triangles)); }
};

}  // namespace mesh_builder

/// Upright drill stand-in: a 0.12 x 0.09 x 0.05 m battery base, a 0.025 m
/// radius handle, and a motor body with chuck pointing along +x at the top.
/// The frame origin is the handle axis at base mid-height offset, so the base
/// bottom sits at z = -0.125. The bottom face is left open; the object rests
/// on its support.
inline TriangleMesh make_drill_like() {
  mesh_builder::Soup s;
  s.box({-0.06, -0.045, -0.125}, {0.06, 0.045, -0.075}, /*skip_bottom=*/true);
  s.cylinder({0.0, 0.0}, 0.025, -0.075, 0.06, 24);
  s.box({-0.06, -0.035, 0.06}, {0.14, 0.035, 0.125});
  s.box({0.14, -0.02, 0.075}, {0.20, 0.02, 0.11});
  return std::move(s).build();
}

/// Door stand-in: a 1.0 (x) by 2.0 (z) by 0.05 (y) slab centred on the origin
/// with a handle box protruding 0.12 m from its -y face.
inline TriangleMesh make_door_like() {
  mesh_builder::Soup s;
  s.box({-0.5, -0.025, -1.0}, {0.5, 0.025, 1.0});
  s.box({0.25, -0.145, -0.02}, {0.40, -0.025, 0.02});
  return std::move(s).build();
}

/// Flat square at height `z`, used as a support surface moving with the object.
inline TriangleMesh make_support_plane(double z, double half_extent) {
  mesh_builder::Soup s;
  const int a = s.add({-half_extent, -half_extent, z});
  const int b = s.add({half_extent, -half_extent, z});
  const int c = s.add({half_extent, half_extent, z});
  const int d = s.add({-half_extent, half_extent, z});
  s.quad(a, b, c, d);
  return std::move(s).build();
}

/// The object to localize plus anything rigidly attached to its pose.
///
/// `object` is what action generators sample and what start poses must stay
/// clear of; `support` (a table under the object) only takes part in contact.
struct Scene {
  std::string name;
  TriangleMesh object;
  std::optional<TriangleMesh> support;
  SensorRig rig = SensorRig::single_point();

  double object_radius() const { return object.bounding_radius(); }

  std::optional<double> travel_to_contact(const Action& action, const Pose& pose) const {
    std::optional<double> best;
    for (const auto& p : rig_start_points(action, rig)) {
      for (const TriangleMesh* m : {&object, support ? &*support : nullptr}) {
        if (!m) continue;
        if (auto d = ray_cast(p, action.direction, *m, pose)) {
          if (!best || *d < *best) best = d;
        }
      }
    }
    return best;
  }

  Observation contact_time(const Action& action, const Pose& pose) const {
    const auto d = travel_to_contact(action, pose);
    if (!d || *d > action.length) return Observation::no_contact();
    return Observation::contact(*d / action.speed);
  }
};

inline Scene make_drill_scene(bool with_table = true) {
  Scene s{"drill-like", make_drill_like(), std::nullopt, SensorRig::single_point()};
  if (with_table) s.support = make_support_plane(-0.125, 1.5);
  return s;
}

inline Scene make_door_scene() {
  return Scene{"door-like", make_door_like(), std::nullopt, SensorRig::single_point()};
}

}  // namespace touchloc
