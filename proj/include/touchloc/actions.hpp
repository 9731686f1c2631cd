#pragma once

#include <touchloc/action.hpp>
#include <touchloc/rng.hpp>
#include <touchloc/scene.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace touchloc {

/// Keeps start poses clear of every hypothesis, using bounding spheres of the
/// posed object.
struct StartClearance {
  std::vector<Eigen::Vector3d> centers;
  double radius = 0.0;  // object bounding radius plus rig extent
  double margin = 0.05;

  static StartClearance none(double margin = 0.05) { return {{}, 0.0, margin}; }

  static StartClearance around(std::span<const Pose> hypotheses, const Scene& scene, double margin) {
    StartClearance c;
    c.centers.reserve(hypotheses.size());
    for (const auto& p : hypotheses) c.centers.push_back(p.translation());
    c.radius = scene.object_radius() + scene.rig.extent();
    c.margin = margin;
    return c;
  }

  bool is_clear(const Eigen::Vector3d& p) const {
    for (const auto& c : centers)
      if ((p - c).norm() <= radius) return false;
    return true;
  }

  /// Distance to back off from `p` against `dir` so the start clears every
  /// sphere met on the line, plus the margin.
  double retract_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& dir) const {
    const Eigen::Vector3d u = -dir;
    double t_far = 0.0;
    for (const auto& c : centers) {
      const Eigen::Vector3d pc = p - c;
      const double b = pc.dot(u);
      const double disc = b * b - (pc.squaredNorm() - radius * radius);
      if (disc <= 0.0) continue;
      t_far = std::max(t_far, -b + std::sqrt(disc));
    }
    return t_far + margin;
  }

  /// Distance from `center` at which a sphere clears every hypothesis.
  double enclosing_radius(const Eigen::Vector3d& center) const {
    double r = 0.0;
    for (const auto& c : centers) r = std::max(r, (c - center).norm() + radius);
    return r + margin;
  }
};

struct MotionDefaults {
  double speed = 0.05;      // m/s
  double fixed_time = 5.0;  // s
  double length = 1.0;      // m, before fitting to the hypotheses
};

namespace detail {

inline Eigen::Vector3d random_unit_vector(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-12);
  return v.normalized();
}

/// Uniform point in the disc of radius `r` spanned by `a`, `b`.
inline Eigen::Vector3d random_disc_offset(const Eigen::Vector3d& a, const Eigen::Vector3d& b, double r,
                                          Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double rho = r * std::sqrt(uni(rng));
  const double phi = 2.0 * std::numbers::pi * uni(rng);
  return rho * (std::cos(phi) * a + std::sin(phi) * b);
}

inline double random_roll(Rng& rng) {
  std::uniform_real_distribution<double> uni(-std::numbers::pi, std::numbers::pi);
  return Pose::wrap_angle(uni(rng));
}

inline Action make_action(const Eigen::Vector3d& start, const Eigen::Vector3d& dir, double roll,
                          const MotionDefaults& m) {
  Action a;
  a.start = Pose{start.x(), start.y(), start.z(), roll};
  a.direction = dir.normalized();
  a.length = m.length;
  a.speed = m.speed;
  a.fixed_time = m.fixed_time;
  return a;
}

}  // namespace detail

/// Starts sampled on a sphere about `center`, each aimed at the centre, then
/// shifted in the plane orthogonal to the motion and rolled about it.
inline std::vector<Action> gen_sphere(const Pose& center, double radius, int n, Rng& rng,
                                      double inplane_max = 0.05, const MotionDefaults& m = {}) {
  std::vector<Action> out;
  const Eigen::Vector3d c = center.translation();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d u = detail::random_unit_vector(rng);
    const Eigen::Vector3d dir = -u;
    const EffectorFrame frame = EffectorFrame::from(dir, 0.0);
    const Eigen::Vector3d start = c + radius * u + detail::random_disc_offset(frame.side, frame.up, inplane_max, rng);
    out.push_back(detail::make_action(start, dir, detail::random_roll(rng), m));
  }
  return out;
}

/// Uniform-by-area point on the mesh surface, returned with its outward
/// normal, both in the mesh's local frame.
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> sample_surface(const TriangleMesh& mesh,
                                                                  std::discrete_distribution<std::size_t>& pick,
                                                                  Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const std::size_t ti = pick(rng);
  const auto& t = mesh.triangles()[ti];
  double r1 = uni(rng), r2 = uni(rng);
  if (r1 + r2 > 1.0) {
    r1 = 1.0 - r1;
    r2 = 1.0 - r2;
  }
  const Eigen::Vector3d p = mesh.vertex(t, 0) + r1 * (mesh.vertex(t, 1) - mesh.vertex(t, 0)) +
                            r2 * (mesh.vertex(t, 2) - mesh.vertex(t, 0));
  return {p, mesh.triangle_normal(ti)};
}

inline std::discrete_distribution<std::size_t> area_distribution(const TriangleMesh& mesh) {
  std::vector<double> areas(mesh.triangle_count());
  for (std::size_t i = 0; i < areas.size(); ++i) areas[i] = mesh.triangle_area(i);
  return std::discrete_distribution<std::size_t>(areas.begin(), areas.end());
}

/// Actions that press a randomly chosen fingertip onto a uniformly sampled
/// surface point along its inward normal, with a random roll about it.
inline std::vector<Action> gen_normal(const TriangleMesh& mesh, const Pose& sensed, int n, Rng& rng,
                                      const SensorRig& rig = SensorRig::single_point(),
                                      const StartClearance& clearance = StartClearance::none(),
                                      const MotionDefaults& m = {}) {
  std::vector<Action> out;
  if (n <= 0) return out;
  auto pick = area_distribution(mesh);
  std::uniform_int_distribution<std::size_t> finger(0, rig.size() - 1);
  for (int i = 0; i < n; ++i) {
    const auto [p_local, n_local] = sample_surface(mesh, pick, rng);
    const Eigen::Vector3d p = sensed.apply(p_local);
    const Eigen::Vector3d dir = -sensed.apply_direction(n_local);
    const double roll = detail::random_roll(rng);
    const EffectorFrame frame = EffectorFrame::from(dir, roll);
    const Eigen::Vector3d& tip = rig.points()[finger(rng)];
    const Eigen::Vector3d tip_offset = frame.to_world(Eigen::Vector3d::Zero(), tip);
    const Eigen::Vector3d tip_start = p - clearance.retract_distance(p, dir) * dir;
    out.push_back(detail::make_action(tip_start - tip_offset, dir, roll, m));
  }
  return out;
}

/// Downward actions from above the sensed position, scattered in xy.
inline std::vector<Action> gen_table(const Pose& sensed, int n, Rng& rng, double scatter = 0.15,
                                     double start_height = 0.5, const MotionDefaults& m = {}) {
  std::vector<Action> out;
  const Eigen::Vector3d down(0.0, 0.0, -1.0);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d off =
        detail::random_disc_offset(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), scatter, rng);
    const Eigen::Vector3d start(sensed.x + off.x(), sensed.y + off.y(), sensed.z + start_height);
    Action a = detail::make_action(start, down, detail::random_roll(rng), m);
    a.direction = down;
    out.push_back(a);
  }
  return out;
}

/// The hand-designed sequence: approach the sensed centre along -x, -y, -z
/// from `standoff` away on the +x, +y, +z axes.
inline std::vector<Action> gen_human(const Pose& sensed, double standoff = 0.5, const MotionDefaults& m = {}) {
  std::vector<Action> out;
  const Eigen::Vector3d c = sensed.translation();
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3d axis = Eigen::Vector3d::Unit(k);
    Action a = detail::make_action(c + standoff * axis, -axis, 0.0, m);
    a.direction = -axis;
    out.push_back(a);
  }
  return out;
}

/// Sets the action's length so it travels far enough to touch every
/// hypothesis it can touch along its path, plus `margin`. Actions that touch
/// none keep `probe_length`.
inline void fit_length(Action& a, std::span<const Pose> hypotheses, const Scene& scene, double margin,
                       double probe_length) {
  double far = -1.0;
  for (const auto& h : hypotheses) {
    if (auto d = scene.travel_to_contact(a, h)) far = std::max(far, *d);
  }
  a.length = far >= 0.0 ? far + margin : probe_length;
}

struct ActionSetConfig {
  int human = 3;
  int sphere = 30;
  int normal = 160;
  int table = 10;
  MotionDefaults motion{};
  double sphere_radius = 0.5;
  double inplane_max = 0.05;
  double margin = 0.05;
  double table_scatter = 0.15;
  double probe_length = 3.0;
};

/// The fixed action set: human, sphere, normal, then table actions, with dense
/// ids. Starts clear every hypothesis in `hypotheses`; lengths are fitted to them.
inline std::vector<Action> generate_action_set(const Scene& scene, const Pose& sensed,
                                               std::span<const Pose> hypotheses,
                                               const ActionSetConfig& cfg, const StreamFactory& streams) {
  const StartClearance clear = StartClearance::around(hypotheses, scene, cfg.margin);
  const double standoff = std::max(cfg.sphere_radius, clear.enclosing_radius(sensed.translation()));
  double top = sensed.z;
  for (const auto& c : clear.centers) top = std::max(top, c.z());
  const double table_height = top + clear.radius + cfg.margin - sensed.z;

  std::vector<Action> all;
  if (cfg.human > 0) {
    auto h = gen_human(sensed, standoff, cfg.motion);
    h.resize(std::min<std::size_t>(h.size(), static_cast<std::size_t>(cfg.human)));
    all.insert(all.end(), h.begin(), h.end());
  }
  {
    Rng rng = streams.stream("actions/sphere");
    auto s = gen_sphere(sensed, standoff + cfg.inplane_max, cfg.sphere, rng, cfg.inplane_max, cfg.motion);
    all.insert(all.end(), s.begin(), s.end());
  }
  {
    Rng rng = streams.stream("actions/normal");
    auto s = gen_normal(scene.object, sensed, cfg.normal, rng, scene.rig, clear, cfg.motion);
    all.insert(all.end(), s.begin(), s.end());
  }
  {
    Rng rng = streams.stream("actions/table");
    auto s = gen_table(sensed, cfg.table, rng, cfg.table_scatter, table_height, cfg.motion);
    all.insert(all.end(), s.begin(), s.end());
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i].id = static_cast<int>(i);
    fit_length(all[i], hypotheses, scene, cfg.margin, cfg.probe_length);
  }
  return all;
}

inline void write_actions_csv(std::ostream& os, std::span<const Action> actions) {
  os << "id,x,y,z,theta,dx,dy,dz,length,speed,fixed_time\n";
  char buf[512];
  for (const auto& a : actions) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", a.id,
                  a.start.x, a.start.y, a.start.z, a.start.theta, a.direction.x(), a.direction.y(),
                  a.direction.z(), a.length, a.speed, a.fixed_time);
    os << buf;
  }
}

inline std::vector<Action> read_actions_csv(std::istream& is) {
  std::vector<Action> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line.rfind("id,", 0) == 0)) continue;
    std::vector<double> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        f.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("actions csv line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (f.size() != 11) throw std::runtime_error("actions csv line " + std::to_string(lineno) + ": expected 11 fields");
    Action a;
    a.id = static_cast<int>(f[0]);
    a.start = Pose{f[1], f[2], f[3], f[4]};
    a.direction = {f[5], f[6], f[7]};
    a.length = f[8];
    a.speed = f[9];
    a.fixed_time = f[10];
    if (std::abs(a.direction.norm() - 1.0) > 1e-9 || !(a.length > 0.0) || !(a.speed > 0.0)) {
      throw std::runtime_error("actions csv line " + std::to_string(lineno) + ": invalid action");
    }
    out.push_back(a);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].id != static_cast<int>(i)) throw std::runtime_error("action ids must be dense from 0");
  }
  return out;
}

}  // namespace touchloc
