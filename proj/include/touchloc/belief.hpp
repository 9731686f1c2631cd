#pragma once

#include <touchloc/action.hpp>
#include <touchloc/observation.hpp>
#include <touchloc/rng.hpp>
#include <touchloc/scene.hpp>
#include <touchloc/sensing.hpp>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace touchloc {

class BeliefAnnihilated : public std::runtime_error {
 public:
  BeliefAnnihilated() : std::runtime_error("belief annihilated") {}
};

struct Particle {
  Pose pose;
  double weight = 0.0;  // non-normalized mass p_psi(phi)
};

/// Weighted particle set over (x, y, z, theta).
///
/// Weights are not renormalized between updates: their sum is the mass M_psi
/// remaining from `initial_mass`.
struct ParticleBelief {
  std::vector<Particle> particles;
  double initial_mass = 1.0;

  std::size_t size() const { return particles.size(); }

  std::vector<double> weights() const {
    std::vector<double> w;
    w.reserve(particles.size());
    for (const auto& p : particles) w.push_back(p.weight);
    return w;
  }
  std::vector<Pose> poses() const {
    std::vector<Pose> out;
    out.reserve(particles.size());
    for (const auto& p : particles) out.push_back(p.pose);
    return out;
  }
};

/// psi: the ordered (action id, observation) pairs received so far.
class History {
 public:
  struct Step {
    int action_id;
    Observation observation;
  };

  void push(int action_id, Observation o) {
    if (contains(action_id)) {
      throw std::invalid_argument("action " + std::to_string(action_id) + " already in history");
    }
    steps_.push_back({action_id, o});
  }
  bool contains(int action_id) const {
    for (const auto& s : steps_)
      if (s.action_id == action_id) return true;
    return false;
  }
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }

 private:
  std::vector<Step> steps_;
};

inline ParticleBelief init_belief(const Pose& mean, const std::array<double, 4>& variances,
                                  std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("particle count must be positive");
  for (double v : variances)
    if (!(v > 0.0)) throw std::invalid_argument("prior variances must be positive");
  std::normal_distribution<double> unit(0.0, 1.0);
  ParticleBelief b;
  b.particles.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    Pose p;
    p.x = mean.x + std::sqrt(variances[0]) * unit(rng);
    p.y = mean.y + std::sqrt(variances[1]) * unit(rng);
    p.z = mean.z + std::sqrt(variances[2]) * unit(rng);
    p.theta = Pose::wrap_angle(mean.theta + std::sqrt(variances[3]) * unit(rng));
    b.particles.push_back({p, w});
  }
  b.initial_mass = 1.0;
  return b;
}

inline double total_mass(std::span<const double> weights) {
  double m = 0.0;
  for (double w : weights) m += w;
  return m;
}

inline double total_mass(const ParticleBelief& b) {
  double m = 0.0;
  for (const auto& p : b.particles) m += p.weight;
  return m;
}

/// Multiplies each particle's weight by omega_obs(a_phi) for a precomputed
/// row of contact times (one per particle, +inf for NoContact).
inline ParticleBelief apply_weights(const ParticleBelief& b, std::span<const double> contact_row,
                                    const Observation& obs, const WeightingModel& w) {
  if (contact_row.size() != b.size()) throw std::invalid_argument("contact row size mismatch");
  ParticleBelief out = b;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.particles[i].weight *= weight(w, obs.raw(), contact_row[i]);
  }
  return out;
}

inline ParticleBelief apply_weights(const ParticleBelief& b, const Action& action,
                                    const Observation& obs, const WeightingModel& w,
                                    const Scene& scene) {
  std::vector<double> row;
  row.reserve(b.size());
  for (const auto& p : b.particles) row.push_back(scene.contact_time(action, p.pose).raw());
  return apply_weights(b, row, obs, w);
}

using Matrix4 = Eigen::Matrix4d;
using Vector4 = Eigen::Vector4d;

/// Weighted mean and covariance of (x, y, z, theta), theta unwrapped.
///
/// Weights are normalized to sum 1; the covariance is the population
/// (not bias-corrected) estimate.
inline std::pair<Vector4, Matrix4> weighted_moments(std::span<const Pose> poses,
                                                    std::span<const double> weights) {
  double mass = 0.0, s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    mass += weights[i];
    s += weights[i] * std::sin(poses[i].theta);
    c += weights[i] * std::cos(poses[i].theta);
  }
  if (!(mass > 0.0)) throw BeliefAnnihilated();
  // theta is unwrapped around the circular mean, then treated as linear.
  const double ref = std::atan2(s, c);
  auto unwrapped = [ref](const Pose& p) {
    Vector4 v = p.as_vector();
    v[3] = ref + Pose::wrap_angle(p.theta - ref);
    return v;
  };
  Vector4 mean = Vector4::Zero();
  for (std::size_t i = 0; i < poses.size(); ++i) mean += weights[i] * unwrapped(poses[i]);
  mean /= mass;
  Matrix4 cov = Matrix4::Zero();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const Vector4 d = unwrapped(poses[i]) - mean;
    cov.noalias() += weights[i] * d * d.transpose();
  }
  cov /= mass;
  return {mean, cov};
}

inline Matrix4 weighted_covariance(const ParticleBelief& b) {
  const auto poses = b.poses();
  const auto w = b.weights();
  return weighted_moments(poses, w).second;
}

/// 0.5 * ln((2 pi e)^N det(cov + regularizer * I)) for N = 4.
inline double gaussian_entropy(const Matrix4& cov, double regularizer = 1e-12) {
  const Eigen::SelfAdjointEigenSolver<Matrix4> eig(cov, Eigen::EigenvaluesOnly);
  double log_det = 0.0;
  for (int i = 0; i < 4; ++i) log_det += std::log(std::max(eig.eigenvalues()[i], 0.0) + regularizer);
  constexpr double n = 4.0;
  return 0.5 * (n * std::log(2.0 * std::numbers::pi * std::numbers::e) + log_det);
}

/// Sum of the covariance eigenvalues (its trace).
inline double covariance_eigen_sum(const Matrix4& cov) { return cov.trace(); }

/// Systematic resampling to `n` particles with per-dimension Gaussian jitter.
///
/// Total mass is preserved: each output particle carries mass / n. Callers
/// that log mass statistics do so on the input belief.
inline ParticleBelief resample(const ParticleBelief& b, std::size_t n,
                               const std::array<double, 4>& jitter_std, Rng& rng) {
  const double mass = total_mass(b);
  if (!(mass > 0.0)) throw BeliefAnnihilated();
  if (n == 0) throw std::invalid_argument("particle count must be positive");
  std::uniform_real_distribution<double> uni(0.0, 1.0 / static_cast<double>(n));
  std::normal_distribution<double> unit(0.0, 1.0);
  const double u0 = uni(rng);
  ParticleBelief out;
  out.initial_mass = b.initial_mass;
  out.particles.reserve(n);
  const double share = mass / static_cast<double>(n);
  std::size_t i = 0;
  double cumulative = b.particles[0].weight / mass;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = u0 + static_cast<double>(k) / static_cast<double>(n);
    while (u > cumulative && i + 1 < b.size()) {
      ++i;
      cumulative += b.particles[i].weight / mass;
    }
    Pose p = b.particles[i].pose;
    if (jitter_std[0] > 0.0) p.x += jitter_std[0] * unit(rng);
    if (jitter_std[1] > 0.0) p.y += jitter_std[1] * unit(rng);
    if (jitter_std[2] > 0.0) p.z += jitter_std[2] * unit(rng);
    if (jitter_std[3] > 0.0) p.theta = Pose::wrap_angle(p.theta + jitter_std[3] * unit(rng));
    out.particles.push_back({p, share});
  }
  return out;
}

}  // namespace touchloc
