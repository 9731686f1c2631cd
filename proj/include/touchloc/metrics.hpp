#pragma once

#include <touchloc/belief.hpp>
#include <touchloc/contact_table.hpp>
#include <touchloc/sensing.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace touchloc {

class UninformativeAction : public std::runtime_error {
 public:
  UninformativeAction() : std::runtime_error("action uninformative under discretization") {}
};

struct ObservationOutcome {
  Observation observation;
  double probability = 0.0;
  /// m_{psi,a,o} for the pruning metrics, posterior entropy for IG.
  double value = 0.0;
};

struct GainReport {
  int action_id = -1;
  double delta = 0.0;
  double cost = 0.0;
  double score = 0.0;
  std::vector<ObservationOutcome> outcomes;  // contact times, then NoContact

  void set_cost(double c) {
    cost = c;
    score = delta / cost;
  }
};

/// m_{psi,a,o} = sum_phi p_psi(phi) * omega_o(a_phi).
inline double mass_after(std::span<const double> weights, std::span<const double> contact_row,
                         const Observation& o, const WeightingModel& w) {
  double m = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * weight(w, o.raw(), contact_row[i]);
  return m;
}

inline double mass_after(const ParticleBelief& b, const Action& action, const Observation& o,
                         const WeightingModel& w, const Scene& scene) {
  double m = 0.0;
  for (const auto& p : b.particles) m += p.weight * weight(w, o, scene.contact_time(action, p.pose));
  return m;
}

namespace detail {

/// m for every contact time in `times` under the HP indicator, by a sweep over
/// contact times sorted once per call.
inline void hp_bucket_masses(std::span<const double> weights, std::span<const double> row,
                             const std::vector<double>& times, double d_t,
                             std::vector<double>& out) {
  std::vector<std::pair<double, double>> finite;
  finite.reserve(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (std::isfinite(row[i]) && weights[i] != 0.0) finite.emplace_back(row[i], weights[i]);
  }
  std::sort(finite.begin(), finite.end());
  std::vector<double> prefix(finite.size() + 1, 0.0);
  for (std::size_t i = 0; i < finite.size(); ++i) prefix[i + 1] = prefix[i] + finite[i].second;
  auto within = [d_t](double o, double a) { return std::abs(o - a) <= d_t; };
  const std::size_t n = finite.size();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double o = times[k];
    // Coarse window by value, then trim to the exact predicate weight() uses;
    // |o - a| <= d_t holds on a contiguous run of the sorted times.
    auto cmp = [](const std::pair<double, double>& e, double v) { return e.first < v; };
    std::size_t lo = static_cast<std::size_t>(
        std::lower_bound(finite.begin(), finite.end(), o - d_t - 1e-9 * (1.0 + d_t), cmp) - finite.begin());
    while (lo < n && !within(o, finite[lo].first) && finite[lo].first < o) ++lo;
    std::size_t hi = lo;
    const double upper = o + d_t + 1e-9 * (1.0 + d_t);
    hi = static_cast<std::size_t>(
        std::lower_bound(finite.begin() + static_cast<long>(lo), finite.end(), upper, cmp) - finite.begin());
    while (hi < n && within(o, finite[hi].first)) ++hi;
    while (hi > lo && !within(o, finite[hi - 1].first)) --hi;
    out[k] = prefix[hi] - prefix[lo];
  }
}

}  // namespace detail

/// m_{psi,a,o} for every contact time of `obs`, followed by the NoContact mass
/// (a single bucket, without multiplicity).
inline std::vector<double> bucket_masses(std::span<const double> weights,
                                         std::span<const double> contact_row,
                                         const ObservationSet& obs, const WeightingModel& w) {
  std::vector<double> m(obs.times.size() + 1, 0.0);
  if (w.kind == WeightingModel::Kind::kHP) {
    detail::hp_bucket_masses(weights, contact_row, obs.times, w.d_t, m);
  } else {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double wi = weights[i];
      const double a = contact_row[i];
      if (wi == 0.0 || !std::isfinite(a)) continue;
      for (std::size_t k = 0; k < obs.times.size(); ++k) m[k] += wi * weight(w, obs.times[k], a);
    }
  }
  double inf_mass = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (!std::isfinite(contact_row[i])) inf_mass += weights[i];
  m.back() = inf_mass;
  return m;
}

/// p(a_Phi = o | psi) = m_o / sum_o' m_o'. The NoContact bucket counts
/// `nocontact_multiplicity` times in the normalizer and receives that many
/// shares. Returns probabilities in the layout of `bucket_masses`.
inline std::vector<double> observation_probability(std::span<const double> weights,
                                                   std::span<const double> contact_row,
                                                   const ObservationSet& obs,
                                                   const WeightingModel& w) {
  std::vector<double> m = bucket_masses(weights, contact_row, obs, w);
  const double k = obs.nocontact_multiplicity;
  double z = k * m.back();
  for (std::size_t i = 0; i + 1 < m.size(); ++i) z += m[i];
  if (!(z > 0.0)) throw UninformativeAction();
  for (std::size_t i = 0; i + 1 < m.size(); ++i) m[i] /= z;
  m.back() = k * m.back() / z;
  return m;
}

/// Delta(a | psi) = sum_o p(o | psi) (M_psi - m_{psi,a,o}) for HP / WHP.
inline GainReport marginal_gain_hp(std::span<const double> weights, std::span<const double> contact_row,
                                   const ObservationSet& obs, const WeightingModel& w) {
  GainReport r;
  const double big_m = total_mass(weights);
  const std::vector<double> m = bucket_masses(weights, contact_row, obs, w);
  const double k = obs.nocontact_multiplicity;
  double z = k * m.back();
  for (std::size_t i = 0; i + 1 < m.size(); ++i) z += m[i];
  r.outcomes.resize(m.size());
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    r.outcomes[i].observation = Observation::contact(obs.times[i]);
    r.outcomes[i].value = m[i];
  }
  r.outcomes.back().observation = Observation::no_contact();
  r.outcomes.back().value = m.back();
  if (!(z > 0.0)) return r;  // uninformative: delta stays 0
  double delta = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const double p = m[i] / z;
    r.outcomes[i].probability = p;
    delta += p * (big_m - m[i]);
  }
  const double p_inf = k * m.back() / z;
  r.outcomes.back().probability = p_inf;
  delta += p_inf * (big_m - m.back());
  r.delta = delta;
  return r;
}

/// Belief state shared by every IG evaluation in one selection round: poses
/// centred on the current weighted mean, and the current entropy.
struct IgContext {
  std::vector<Vector4> centred;
  double current_entropy = 0.0;
  double regularizer = 1e-12;

  static IgContext make(std::span<const Pose> poses, std::span<const double> weights,
                        double regularizer) {
    IgContext ctx;
    ctx.regularizer = regularizer;
    const auto [mean, cov] = weighted_moments(poses, weights);
    ctx.current_entropy = gaussian_entropy(cov, regularizer);
    ctx.centred.reserve(poses.size());
    for (const auto& p : poses) {
      Vector4 v = p.as_vector();
      v[3] = mean[3] + Pose::wrap_angle(p.theta - mean[3]);
      ctx.centred.push_back(v - mean);
    }
    return ctx;
  }
};

/// Delta_IG(a) = H(Phi) - E_o[H(Phi | o)] with Gaussian-fit entropies.
///
/// Each candidate observation reweights the belief by the IG likelihood; the
/// posterior is renormalized before its entropy is taken. Observations whose
/// posterior mass is zero are skipped and the rest renormalized.
inline GainReport marginal_gain_ig(const IgContext& ctx, std::span<const double> weights,
                                   std::span<const double> contact_row, const ObservationSet& obs,
                                   const WeightingModel& likelihood) {
  GainReport r;
  const std::size_t nt = obs.times.size();
  r.outcomes.resize(nt + 1);
  const double k = obs.nocontact_multiplicity;
  std::vector<double> mass(nt + 1, 0.0);

  std::vector<double> post(weights.size());
  auto entropy_of = [&](auto&& weight_of) -> std::pair<double, double> {
    double w_sum = 0.0;
    Vector4 s1 = Vector4::Zero();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      post[i] = weight_of(i);
      if (post[i] == 0.0) continue;
      w_sum += post[i];
      s1 += post[i] * ctx.centred[i];
    }
    if (!(w_sum > 0.0)) return {0.0, 0.0};
    const Vector4 mu = s1 / w_sum;
    Matrix4 s2 = Matrix4::Zero();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (post[i] == 0.0) continue;
      s2.template selfadjointView<Eigen::Lower>().rankUpdate(ctx.centred[i] - mu, post[i] / w_sum);
    }
    const Matrix4 cov = s2.template selfadjointView<Eigen::Lower>();
    return {w_sum, gaussian_entropy(cov, ctx.regularizer)};
  };

  std::vector<double> entropy(nt + 1, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    const double o = obs.times[t];
    auto [m, h] = entropy_of([&](std::size_t i) {
      const double a = contact_row[i];
      if (weights[i] == 0.0 || !std::isfinite(a)) return 0.0;
      return weights[i] * weight(likelihood, o, a);
    });
    mass[t] = m;
    entropy[t] = h;
    r.outcomes[t].observation = Observation::contact(o);
  }
  {
    auto [m, h] = entropy_of([&](std::size_t i) {
      return std::isfinite(contact_row[i]) ? 0.0 : weights[i];
    });
    mass[nt] = m;
    entropy[nt] = h;
    r.outcomes[nt].observation = Observation::no_contact();
  }
  double z = k * mass[nt];
  for (std::size_t t = 0; t < nt; ++t) z += mass[t];
  if (!(z > 0.0)) return r;
  double expected = 0.0;
  for (std::size_t t = 0; t <= nt; ++t) {
    const double p = (t == nt ? k : 1.0) * mass[t] / z;
    r.outcomes[t].probability = p;
    r.outcomes[t].value = entropy[t];
    expected += p * entropy[t];
  }
  r.delta = ctx.current_entropy - expected;
  return r;
}

inline void write_gain_reports_csv(std::ostream& os, const std::vector<GainReport>& reports) {
  os << "action_id,delta,cost,score\n";
  char buf[160];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.action_id, r.delta, r.cost, r.score);
    os << buf;
  }
}

}  // namespace touchloc
