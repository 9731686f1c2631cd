#pragma once

#include <touchloc/action.hpp>
#include <touchloc/observation.hpp>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace touchloc {

/// Hits closer than this are ignored: ray origins sit strictly outside objects.
inline constexpr double kMinHitDistance = 1e-9;
/// Threshold on the Moller-Trumbore determinant below which a ray is parallel.
inline constexpr double kParallelEpsilon = 1e-12;
/// Slack on barycentric bounds so rays through shared edges never slip through.
inline constexpr double kBarycentricSlack = 1e-12;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshParseError : public MeshError {
 public:
  MeshParseError(int line, const std::string& what)
      : MeshError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Ray/triangle intersection; returns the ray parameter or nullopt.
inline std::optional<double> intersect_triangle(const Eigen::Vector3d& origin,
                                                const Eigen::Vector3d& dir,
                                                const Eigen::Vector3d& v0,
                                                const Eigen::Vector3d& v1,
                                                const Eigen::Vector3d& v2) {
  const Eigen::Vector3d e1 = v1 - v0;
  const Eigen::Vector3d e2 = v2 - v0;
  const Eigen::Vector3d p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < kParallelEpsilon) return std::nullopt;
  const double inv = 1.0 / det;
  const Eigen::Vector3d s = origin - v0;
  const double u = s.dot(p) * inv;
  if (u < -kBarycentricSlack || u > 1.0 + kBarycentricSlack) return std::nullopt;
  const Eigen::Vector3d q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < -kBarycentricSlack || u + v > 1.0 + kBarycentricSlack) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (t < kMinHitDistance) return std::nullopt;
  return t;
}

/// Triangle mesh in its object-local frame, with a uniform-grid index.
///
/// Construction validates indices and drops zero-area triangles, so every
/// stored triangle is castable. World placement always goes through a Pose.
class TriangleMesh {
 public:
  using Triangle = std::array<int, 3>;

  TriangleMesh() = default;

  TriangleMesh(std::vector<Eigen::Vector3d> vertices, std::vector<Triangle> triangles,
               std::vector<std::string>* warnings = nullptr)
      : vertices_(std::move(vertices)) {
    const int nv = static_cast<int>(vertices_.size());
    triangles_.reserve(triangles.size());
    for (std::size_t i = 0; i < triangles.size(); ++i) {
      const Triangle& t = triangles[i];
      for (int idx : t) {
        if (idx < 0 || idx >= nv) {
          throw MeshError("triangle " + std::to_string(i) + ": index out of range");
        }
      }
      const double area2 =
          (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]).norm();
      if (!(area2 > 0.0)) {
        if (warnings) warnings->push_back("dropped degenerate triangle " + std::to_string(i));
        continue;
      }
      triangles_.push_back(t);
    }
    if (vertices_.empty() || triangles_.empty()) throw MeshError("mesh has no triangles");
    build_index();
  }

  const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }

  const Eigen::Vector3d& vertex(const Triangle& t, int k) const { return vertices_[t[k]]; }

  double triangle_area(std::size_t i) const {
    const Triangle& t = triangles_[i];
    return 0.5 * (vertex(t, 1) - vertex(t, 0)).cross(vertex(t, 2) - vertex(t, 0)).norm();
  }
  /// Outward normal under counter-clockwise winding.
  Eigen::Vector3d triangle_normal(std::size_t i) const {
    const Triangle& t = triangles_[i];
    return (vertex(t, 1) - vertex(t, 0)).cross(vertex(t, 2) - vertex(t, 0)).normalized();
  }

  const Eigen::AlignedBox3d& bounds() const { return bounds_; }

  /// Radius of the smallest origin-centred sphere enclosing the mesh.
  double bounding_radius() const {
    double r = 0.0;
    for (const auto& v : vertices_) r = std::max(r, v.norm());
    return r;
  }

  /// Nearest hit along a local-frame ray, via the grid.
  std::optional<double> cast_local(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) const {
    double t_enter = 0.0, t_exit = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const double lo = grid_min_[k], hi = grid_min_[k] + cell_[k] * dims_[k];
      if (dir[k] == 0.0) {
        if (origin[k] < lo || origin[k] > hi) return std::nullopt;
        continue;
      }
      double t0 = (lo - origin[k]) / dir[k];
      double t1 = (hi - origin[k]) / dir[k];
      if (t0 > t1) std::swap(t0, t1);
      t_enter = std::max(t_enter, t0);
      t_exit = std::min(t_exit, t1);
      if (t_exit < t_enter) return std::nullopt;
    }

    std::array<int, 3> cell{};
    std::array<int, 3> step{};
    std::array<double, 3> t_next{};
    std::array<double, 3> t_delta{};
    const Eigen::Vector3d entry = origin + t_enter * dir;
    for (int k = 0; k < 3; ++k) {
      int c = static_cast<int>(std::floor((entry[k] - grid_min_[k]) / cell_[k]));
      cell[k] = std::clamp(c, 0, dims_[k] - 1);
      if (dir[k] > 0.0) {
        step[k] = 1;
        t_next[k] = (grid_min_[k] + (cell[k] + 1) * cell_[k] - origin[k]) / dir[k];
        t_delta[k] = cell_[k] / dir[k];
      } else if (dir[k] < 0.0) {
        step[k] = -1;
        t_next[k] = (grid_min_[k] + cell[k] * cell_[k] - origin[k]) / dir[k];
        t_delta[k] = -cell_[k] / dir[k];
      } else {
        step[k] = 0;
        t_next[k] = std::numeric_limits<double>::infinity();
        t_delta[k] = std::numeric_limits<double>::infinity();
      }
    }

    double best = std::numeric_limits<double>::infinity();
    while (true) {
      const auto& bucket = cells_[flat(cell)];
      for (int ti : bucket) {
        const Triangle& t = triangles_[ti];
        if (auto hit = intersect_triangle(origin, dir, vertex(t, 0), vertex(t, 1), vertex(t, 2))) {
          best = std::min(best, *hit);
        }
      }
      int axis = 0;
      if (t_next[1] < t_next[axis]) axis = 1;
      if (t_next[2] < t_next[axis]) axis = 2;
      const double cell_exit = t_next[axis];
      if (best <= cell_exit) break;
      if (cell_exit > t_exit) break;
      cell[axis] += step[axis];
      if (cell[axis] < 0 || cell[axis] >= dims_[axis]) break;
      t_next[axis] += t_delta[axis];
    }
    if (std::isfinite(best)) return best;
    return std::nullopt;
  }

  /// Nearest hit along a local-frame ray, testing every triangle.
  std::optional<double> cast_local_bruteforce(const Eigen::Vector3d& origin,
                                              const Eigen::Vector3d& dir) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Triangle& t : triangles_) {
      if (auto hit = intersect_triangle(origin, dir, vertex(t, 0), vertex(t, 1), vertex(t, 2))) {
        best = std::min(best, *hit);
      }
    }
    if (std::isfinite(best)) return best;
    return std::nullopt;
  }

  std::array<int, 3> grid_dims() const { return dims_; }

 private:
  int flat(const std::array<int, 3>& c) const { return (c[2] * dims_[1] + c[1]) * dims_[0] + c[0]; }

  void build_index() {
    bounds_.setEmpty();
    for (const auto& v : vertices_) bounds_.extend(v);
    const Eigen::Vector3d pad = Eigen::Vector3d::Constant(1e-6);
    const Eigen::Vector3d lo = bounds_.min() - pad;
    const Eigen::Vector3d extent = bounds_.max() + pad - lo;
    // Aim for about two triangles' worth of cells, shaped like the box.
    const double target = std::max(1.0, 2.0 * static_cast<double>(triangles_.size()));
    const double vol = extent.prod();
    const double side = std::cbrt(vol / target);
    for (int k = 0; k < 3; ++k) {
      dims_[k] = std::clamp(static_cast<int>(std::ceil(extent[k] / side)), 1, 64);
      cell_[k] = extent[k] / dims_[k];
      grid_min_[k] = lo[k];
    }
    cells_.assign(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2], {});
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
      Eigen::AlignedBox3d box;
      for (int k = 0; k < 3; ++k) box.extend(vertex(triangles_[i], k));
      std::array<int, 3> c0{}, c1{};
      for (int k = 0; k < 3; ++k) {
        c0[k] = std::clamp(static_cast<int>(std::floor((box.min()[k] - grid_min_[k]) / cell_[k])) - 1,
                           0, dims_[k] - 1);
        c1[k] = std::clamp(static_cast<int>(std::floor((box.max()[k] - grid_min_[k]) / cell_[k])) + 1,
                           0, dims_[k] - 1);
      }
      for (int cz = c0[2]; cz <= c1[2]; ++cz)
        for (int cy = c0[1]; cy <= c1[1]; ++cy)
          for (int cx = c0[0]; cx <= c1[0]; ++cx) cells_[flat({cx, cy, cz})].push_back(static_cast<int>(i));
    }
  }

  std::vector<Eigen::Vector3d> vertices_;
  std::vector<Triangle> triangles_;
  Eigen::AlignedBox3d bounds_;
  std::array<int, 3> dims_{1, 1, 1};
  std::array<double, 3> cell_{1, 1, 1};
  std::array<double, 3> grid_min_{0, 0, 0};
  std::vector<std::vector<int>> cells_;
};

/// Reads the `v x y z` / `f i j k` subset of Wavefront OBJ.
///
/// Face entries may use the `i/t/n` form; only the vertex index is read.
/// Other record types are skipped and reported through `warnings`.
inline TriangleMesh parse_obj(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  std::vector<Eigen::Vector3d> verts;
  std::vector<TriangleMesh::Triangle> tris;
  std::vector<int> tri_lines;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Eigen::Vector3d v;
      if (!(ss >> v.x() >> v.y() >> v.z())) throw MeshParseError(lineno, "malformed vertex");
      verts.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        try {
          std::size_t used = 0;
          const int i = std::stoi(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
          idx.push_back(i);
        } catch (const std::exception&) {
          throw MeshParseError(lineno, "malformed face index '" + tok + "'");
        }
      }
      if (idx.size() != 3) throw MeshParseError(lineno, "non-triangle face");
      TriangleMesh::Triangle t{};
      for (int k = 0; k < 3; ++k) {
        // 1-based; bounds are checked after all vertices are known.
        t[k] = idx[k] - 1;
      }
      tris.push_back(t);
      tri_lines.push_back(lineno);
    } else if (warnings) {
      warnings->push_back("line " + std::to_string(lineno) + ": ignored record '" + tag + "'");
    }
  }
  const int nv = static_cast<int>(verts.size());
  for (std::size_t i = 0; i < tris.size(); ++i) {
    for (int k : tris[i]) {
      if (k < 0 || k >= nv) throw MeshParseError(tri_lines[i], "index out of range");
    }
  }
  if (verts.empty()) throw MeshParseError(lineno, "no vertices");
  if (tris.empty()) throw MeshParseError(lineno, "no faces");
  return TriangleMesh(std::move(verts), std::move(tris), warnings);
}

inline TriangleMesh load_mesh(const std::string& path, std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  return parse_obj(in, warnings);
}

/// Distance along `dir` from `origin` to the posed mesh, or nullopt on a miss.
inline std::optional<double> ray_cast(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                      const TriangleMesh& mesh, const Pose& pose) {
  return mesh.cast_local(pose.apply_inverse(origin), pose.inverse_direction(dir));
}

inline std::optional<double> ray_cast_bruteforce(const Eigen::Vector3d& origin,
                                                 const Eigen::Vector3d& dir,
                                                 const TriangleMesh& mesh, const Pose& pose) {
  return mesh.cast_local_bruteforce(pose.apply_inverse(origin), pose.inverse_direction(dir));
}

/// Orthonormal end-effector frame: `forward` is the approach direction and
/// (`side`, `up`) span the plane orthogonal to it, rotated by the roll angle.
struct EffectorFrame {
  Eigen::Vector3d forward;
  Eigen::Vector3d side;
  Eigen::Vector3d up;

  static EffectorFrame from(const Eigen::Vector3d& direction, double roll) {
    const Eigen::Vector3d f = direction.normalized();
    const Eigen::Vector3d ref =
        std::abs(f.z()) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
    const Eigen::Vector3d s0 = f.cross(ref).normalized();
    const Eigen::Vector3d u0 = f.cross(s0);
    const double c = std::cos(roll), s = std::sin(roll);
    return {f, c * s0 + s * u0, -s * s0 + c * u0};
  }

  /// Point given in (side, up, forward) coordinates.
  Eigen::Vector3d to_world(const Eigen::Vector3d& origin, const Eigen::Vector3d& local) const {
    return origin + local.x() * side + local.y() * up + local.z() * forward;
  }
};

/// Contact points of the hand, in end-effector (side, up, forward) coordinates.
class SensorRig {
 public:
  explicit SensorRig(std::vector<Eigen::Vector3d> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("sensor rig needs at least one contact point");
  }

  static SensorRig single_point() { return SensorRig({Eigen::Vector3d::Zero()}); }

  /// Three fingertips on a circle of radius `spread` around the approach axis.
  static SensorRig three_finger(double spread) {
    std::vector<Eigen::Vector3d> pts;
    for (int k = 0; k < 3; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 3.0;
      pts.emplace_back(spread * std::cos(a), spread * std::sin(a), 0.0);
    }
    return SensorRig(std::move(pts));
  }

  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  double extent() const {
    double r = 0.0;
    for (const auto& p : points_) r = std::max(r, p.norm());
    return r;
  }

 private:
  std::vector<Eigen::Vector3d> points_;
};

/// World positions of the rig's contact points at an action's start.
inline std::vector<Eigen::Vector3d> rig_start_points(const Action& action, const SensorRig& rig) {
  const EffectorFrame frame = EffectorFrame::from(action.direction, action.start.theta);
  std::vector<Eigen::Vector3d> out;
  out.reserve(rig.size());
  for (const auto& p : rig.points()) out.push_back(frame.to_world(action.start.translation(), p));
  return out;
}

/// Smallest travel distance at which any rig point meets the posed mesh.
inline std::optional<double> travel_to_contact(const Action& action, const Pose& pose,
                                               const TriangleMesh& mesh, const SensorRig& rig) {
  std::optional<double> best;
  for (const auto& p : rig_start_points(action, rig)) {
    if (auto d = ray_cast(p, action.direction, mesh, pose)) {
      if (!best || *d < *best) best = d;
    }
  }
  return best;
}

/// a_phi: the time along `action` at which contact first occurs.
inline Observation contact_time(const Action& action, const Pose& pose, const TriangleMesh& mesh,
                                const SensorRig& rig) {
  const auto d = travel_to_contact(action, pose, mesh, rig);
  if (!d || *d > action.length) return Observation::no_contact();
  return Observation::contact(*d / action.speed);
}

}  // namespace touchloc
