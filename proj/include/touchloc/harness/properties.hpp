#pragma once

#include <touchloc/metrics.hpp>
#include <touchloc/oracle.hpp>
#include <touchloc/rng.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace touchloc::harness {

struct PropertyReport {
  std::size_t cases = 0;
  double worst = 0.0;  // largest violation seen (negative slack is fine)
  bool pass = true;
};

namespace detail {

/// Free-form instance: random contact times (not grid aligned), random
/// NoContact, HP or WHP weighting.
inline oracle::TinyInstance random_free_instance(Rng& rng, bool whp, std::size_t max_h, std::size_t max_a) {
  std::uniform_int_distribution<std::size_t> nh_d(2, max_h), na_d(2, max_a);
  std::uniform_real_distribution<double> u(0.0, 1.0), dur_d(2.0, 6.0), width_d(0.3, 1.5);
  std::uniform_int_distribution<int> k_d(1, 3);
  oracle::TinyInstance inst;
  inst.prior = std::vector<double>(nh_d(rng));
  for (auto& p : inst.prior) p = 0.1 + u(rng);
  const double s = std::accumulate(inst.prior.begin(), inst.prior.end(), 0.0);
  for (auto& p : inst.prior) p /= s;
  inst.w = whp ? WeightingModel::whp(width_d(rng)) : WeightingModel::hp(width_d(rng));
  const std::size_t na = na_d(rng);
  for (std::size_t a = 0; a < na; ++a) {
    const double duration = dur_d(rng);
    inst.obs.push_back(discretize_observations(duration, 1.0, k_d(rng)));
    std::vector<double> row;
    for (std::size_t h = 0; h < inst.hypotheses(); ++h) row.push_back(u(rng) < 0.2 ? kNoContact : duration * u(rng));
    inst.contact.push_back(std::move(row));
    inst.cost.push_back(1.0 + u(rng));
  }
  return inst;
}

/// An observation drawn the way the truth would produce it: a hypothesis
/// from the current weights, then a label from its weighting row.
inline Observation sample_observation(const oracle::TinyInstance& inst, std::span<const double> weights,
                                      std::size_t action, Rng& rng) {
  std::discrete_distribution<std::size_t> pick_h(weights.begin(), weights.end());
  const std::size_t h = pick_h(rng);
  const auto& obs = inst.obs[action];
  std::vector<double> om;
  for (double t : obs.times) om.push_back(weight(inst.w, t, inst.contact[action][h]));
  om.push_back(obs.nocontact_multiplicity * weight(inst.w, kNoContact, inst.contact[action][h]));
  std::discrete_distribution<std::size_t> pick_o(om.begin(), om.end());
  const std::size_t k = pick_o(rng);
  return k < obs.times.size() ? Observation::contact(obs.times[k]) : Observation::no_contact();
}

inline void apply(const oracle::TinyInstance& inst, std::vector<double>& w, std::size_t action, const Observation& o) {
  for (std::size_t h = 0; h < w.size(); ++h) w[h] *= weight(inst.w, o.raw(), inst.contact[action][h]);
}

}  // namespace detail

/// Delta(a | psi_Y) <= Delta(a | psi_X) + tol for psi_Y extending psi_X by
/// one to three observations drawn consistently, HP and WHP alternating.
inline PropertyReport check_adaptive_submodularity(std::size_t instances, std::uint64_t seed, double tol = 1e-9) {
  PropertyReport rep;
  Rng rng = StreamFactory(seed).stream("check/submodularity");
  std::size_t made = 0;
  while (made < instances) {
    const bool whp = made % 2 == 1;
    auto inst = detail::random_free_instance(rng, whp, 8, 5);
    if (inst.actions() < 2) continue;
    std::vector<std::size_t> order(inst.actions());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t held_out = order.back();
    order.pop_back();
    const std::size_t extra_max = std::min<std::size_t>(3, order.size());
    std::uniform_int_distribution<std::size_t> extra_d(1, extra_max), base_d(0, order.size() - 1);
    const std::size_t extra = extra_d(rng);
    const std::size_t base = std::min(base_d(rng), order.size() - extra);

    std::vector<double> w = inst.prior;
    for (std::size_t i = 0; i < base; ++i) {
      detail::apply(inst, w, order[i], detail::sample_observation(inst, w, order[i], rng));
    }
    const std::vector<double> wx = w;
    for (std::size_t i = base; i < base + extra; ++i) {
      detail::apply(inst, w, order[i], detail::sample_observation(inst, w, order[i], rng));
    }
    if (!(total_mass(w) > 0.0)) continue;
    const double dx = marginal_gain_hp(wx, inst.contact[held_out], inst.obs[held_out], inst.w).delta;
    const double dy = marginal_gain_hp(w, inst.contact[held_out], inst.obs[held_out], inst.w).delta;
    rep.worst = std::max(rep.worst, dy - dx);
    if (dy > dx + tol) rep.pass = false;
    ++rep.cases;
    ++made;
  }
  return rep;
}

/// m_{psi,a,o} <= M_psi + tol over random (belief, action, observation).
inline PropertyReport check_strong_monotonicity(std::size_t triples, std::uint64_t seed, double tol = 1e-12) {
  PropertyReport rep;
  Rng rng = StreamFactory(seed).stream("check/monotonicity");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> n_d(1, 64), kind_d(0, 2);
  for (std::size_t t = 0; t < triples; ++t) {
    const int n = n_d(rng);
    std::vector<double> w(static_cast<std::size_t>(n)), row(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      w[static_cast<std::size_t>(i)] = u(rng) < 0.1 ? 0.0 : u(rng) / n;
      row[static_cast<std::size_t>(i)] = u(rng) < 0.2 ? kNoContact : 10.0 * u(rng);
    }
    const int kind = kind_d(rng);
    const WeightingModel wm = kind == 0   ? WeightingModel::hp(0.1 + u(rng))
                              : kind == 1 ? WeightingModel::whp(0.1 + u(rng))
                                          : WeightingModel::ig(0.1 + u(rng));
    const Observation o = u(rng) < 0.2 ? Observation::no_contact() : Observation::contact(10.0 * u(rng));
    const double big_m = total_mass(w);
    const double m = mass_after(w, row, o, wm);
    rep.worst = std::max(rep.worst, m - big_m);
    if (m > big_m + tol) rep.pass = false;
    ++rep.cases;
  }
  return rep;
}

struct EquivalenceSuite {
  std::size_t instances = 0;
  double max_f_discrepancy = 0.0;
  double max_probability_discrepancy = 0.0;
  double max_origin_sum_error = 0.0;
  double max_kappa_spread = 0.0;
  bool equal_copy_counts = true;
};

/// Explicit noisy-copy construction against the efficient path on tiny HP and
/// WHP instances built with constant kappa.
inline EquivalenceSuite check_noisy_copy_equivalence(std::size_t instances, std::uint64_t seed) {
  EquivalenceSuite s;
  Rng rng = StreamFactory(seed).stream("check/equivalence");
  oracle::InstanceShape shape;
  shape.max_hypotheses = 6;
  shape.max_actions = 4;
  shape.max_radius = 1;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto inst = i % 2 == 0 ? oracle::random_hp_instance(rng, shape) : oracle::random_whp_instance(rng, shape);
    const auto np = oracle::build_noisy_problem(inst);
    const auto inv = oracle::check_invariants(np);
    const auto eq = oracle::check_equivalence(np);
    s.max_f_discrepancy = std::max(s.max_f_discrepancy, eq.max_f_discrepancy);
    s.max_probability_discrepancy = std::max(s.max_probability_discrepancy, eq.max_probability_discrepancy);
    s.max_origin_sum_error = std::max(s.max_origin_sum_error, inv.max_origin_sum_error);
    s.max_kappa_spread = std::max(s.max_kappa_spread, inv.kappa_spread);
    s.equal_copy_counts = s.equal_copy_counts && inv.equal_copy_counts;
    ++s.instances;
  }
  return s;
}

struct CertificationSuite {
  std::vector<oracle::BoundCertificate> certificates;
  std::size_t passed = 0;
};

/// Theorem-bound certificates on random tiny instances, Q = min_copy f(all).
/// Instances whose reachable Q is below `min_q` are redrawn.
inline CertificationSuite certify_random_instances(std::size_t instances, std::uint64_t seed, double min_q = 0.05) {
  CertificationSuite s;
  Rng rng = StreamFactory(seed).stream("certify");
  oracle::InstanceShape shape;
  shape.min_actions = 2;
  std::size_t attempt = 0;
  while (s.certificates.size() < instances) {
    const auto inst = attempt++ % 2 == 0 ? oracle::random_hp_instance(rng, shape) : oracle::random_whp_instance(rng, shape);
    const auto np = oracle::build_noisy_problem(inst);
    const double q = oracle::max_coverage(np);
    if (q < min_q) continue;
    auto c = oracle::certify_bounds(np, q);
    if (c.pass()) ++s.passed;
    s.certificates.push_back(c);
  }
  return s;
}

}  // namespace touchloc::harness
