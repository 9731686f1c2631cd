#pragma once

#include <touchloc/action.hpp>
#include <touchloc/observation.hpp>
#include <touchloc/rng.hpp>
#include <touchloc/scene.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace touchloc {

/// Maps |o - a_phi| to a consistency weight in [0, 1].
///
/// Both-NoContact agrees with weight 1 and NoContact against a finite time
/// has weight 0, for every kind. `cutoff` zeroes kernel values below it (used
/// by the noisy-copy construction, which drops negligible copies).
struct WeightingModel {
  enum class Kind { kHP, kWHP, kIG };

  Kind kind = Kind::kHP;
  double d_t = 1.0;     // s, HP threshold
  double sigma = 0.5;   // s, WHP / IG width
  bool ig_squared = false;
  double cutoff = 0.0;

  static WeightingModel hp(double d_t) {
    if (!(d_t > 0.0)) throw std::invalid_argument("HP threshold must be positive");
    return {Kind::kHP, d_t, 0.5, false, 0.0};
  }
  static WeightingModel whp(double sigma, double cutoff = 0.0) {
    if (!(sigma > 0.0)) throw std::invalid_argument("WHP sigma must be positive");
    return {Kind::kWHP, 1.0, sigma, false, cutoff};
  }
  /// The blurred IG likelihood. By default the exponent uses |o - a_phi|
  /// unsquared; `squared` switches to the Gaussian form.
  static WeightingModel ig(double sigma, bool squared = false) {
    if (!(sigma > 0.0)) throw std::invalid_argument("IG sigma must be positive");
    return {Kind::kIG, 1.0, sigma, squared, 0.0};
  }

  std::string name() const {
    switch (kind) {
      case Kind::kHP: return "hp";
      case Kind::kWHP: return "whp";
      case Kind::kIG: return "ig";
    }
    return "?";
  }
};

/// omega_o(a_phi); raw values use +inf for NoContact.
inline double weight(const WeightingModel& w, double o, double a_phi) {
  const bool o_inf = std::isinf(o), a_inf = std::isinf(a_phi);
  if (o_inf || a_inf) return (o_inf && a_inf) ? 1.0 : 0.0;
  const double d = std::abs(o - a_phi);
  double v = 0.0;
  switch (w.kind) {
    case WeightingModel::Kind::kHP:
      return d <= w.d_t ? 1.0 : 0.0;
    case WeightingModel::Kind::kWHP:
      v = std::exp(-(d * d) / (2.0 * w.sigma * w.sigma));
      break;
    case WeightingModel::Kind::kIG:
      v = w.ig_squared ? std::exp(-(d * d) / (2.0 * w.sigma * w.sigma))
                       : std::exp(-d / (2.0 * w.sigma * w.sigma));
      break;
  }
  return v < w.cutoff ? 0.0 : v;
}

inline double weight(const WeightingModel& w, const Observation& o, const Observation& a_phi) {
  return weight(w, o.raw(), a_phi.raw());
}

/// Discrete observation space of one action: candidate contact times plus a
/// NoContact bucket that stands for `nocontact_multiplicity` copies.
struct ObservationSet {
  std::vector<double> times;
  int nocontact_multiplicity = 1;

  std::size_t size() const { return times.size() + 1; }
};

inline ObservationSet discretize_observations(double duration, double spacing, int k) {
  if (!(spacing > 0.0)) throw std::invalid_argument("observation spacing must be positive");
  if (k < 1) throw std::invalid_argument("NoContact multiplicity must be at least 1");
  ObservationSet set;
  set.nocontact_multiplicity = k;
  // Index-based so accumulated rounding never adds or drops an endpoint.
  const auto n = static_cast<long>(std::floor(duration / spacing + 1e-9));
  set.times.reserve(static_cast<std::size_t>(std::max(0L, n)) + 1);
  for (long i = 0; i <= n; ++i) set.times.push_back(static_cast<double>(i) * spacing);
  return set;
}

inline ObservationSet discretize_observations(const Action& action, double spacing, int k) {
  return discretize_observations(action.duration(), spacing, k);
}

/// Ground-truth sensing: the true contact time plus Gaussian timing noise,
/// truncated to the trajectory's duration.
inline Observation simulate_observation(const Action& action, const Pose& truth, const Scene& scene,
                                        double noise_sigma, Rng& rng) {
  const Observation a_true = scene.contact_time(action, truth);
  if (a_true.is_no_contact() || noise_sigma <= 0.0) return a_true;
  std::normal_distribution<double> noise(0.0, noise_sigma);
  const double t = a_true.time() + noise(rng);
  return Observation::contact(std::clamp(t, 0.0, action.duration()));
}

}  // namespace touchloc
