#pragma once

#include <touchloc/action.hpp>
#include <touchloc/metrics.hpp>
#include <touchloc/rng.hpp>
#include <touchloc/scene.hpp>
#include <touchloc/sensing.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace touchloc::oracle {

inline constexpr std::size_t kMaxHypotheses = 8;
inline constexpr std::size_t kMaxActions = 5;
inline constexpr std::size_t kMaxTimes = 6;
inline constexpr int kMaxMultiplicity = 3;

class SizeLimitExceeded : public std::runtime_error {
 public:
  explicit SizeLimitExceeded(const std::string& what) : std::runtime_error("size limits exceeded: " + what) {}
};

/// A small abstract problem: prior over hypotheses, contact times per
/// (action, hypothesis), action costs and observation sets.
struct TinyInstance {
  std::vector<double> prior;                 // p(phi), sums to 1
  std::vector<std::vector<double>> contact;  // [action][hypothesis], +inf for NoContact
  std::vector<double> cost;
  std::vector<ObservationSet> obs;  // per action
  WeightingModel w;

  std::size_t hypotheses() const { return prior.size(); }
  std::size_t actions() const { return contact.size(); }
};

inline void check_limits(const TinyInstance& inst) {
  if (inst.hypotheses() == 0 || inst.hypotheses() > kMaxHypotheses) {
    throw SizeLimitExceeded(std::to_string(inst.hypotheses()) + " hypotheses");
  }
  if (inst.actions() > kMaxActions) throw SizeLimitExceeded(std::to_string(inst.actions()) + " actions");
  if (inst.cost.size() != inst.actions() || inst.obs.size() != inst.actions()) {
    throw std::invalid_argument("instance arrays disagree in length");
  }
  for (std::size_t a = 0; a < inst.actions(); ++a) {
    if (inst.contact[a].size() != inst.hypotheses()) throw std::invalid_argument("ragged contact table");
    if (inst.obs[a].times.size() > kMaxTimes) {
      throw SizeLimitExceeded(std::to_string(inst.obs[a].times.size()) + " observations for one action");
    }
    if (inst.obs[a].nocontact_multiplicity > kMaxMultiplicity) {
      throw SizeLimitExceeded("NoContact multiplicity " + std::to_string(inst.obs[a].nocontact_multiplicity));
    }
  }
}

/// Builds an instance from posed hypotheses and real actions. Contact times
/// are snapped to the nearest discrete observation time.
inline TinyInstance make_tiny_instance(std::span<const Pose> hypotheses, std::span<const double> prior,
                                       std::span<const Action> actions, const Scene& scene,
                                       const WeightingModel& w, double spacing, int k) {
  TinyInstance inst;
  const double total = std::accumulate(prior.begin(), prior.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("prior mass must be positive");
  for (double p : prior) inst.prior.push_back(p / total);
  inst.w = w;
  for (const auto& a : actions) {
    inst.obs.push_back(discretize_observations(a, spacing, k));
    inst.cost.push_back(action_cost(a));
    std::vector<double> row;
    for (const auto& h : hypotheses) {
      const Observation o = scene.contact_time(a, h);
      if (o.is_no_contact()) {
        row.push_back(kNoContact);
        continue;
      }
      const auto& times = inst.obs.back().times;
      const double snapped = *std::min_element(times.begin(), times.end(), [&](double x, double y) {
        return std::abs(x - o.time()) < std::abs(y - o.time());
      });
      row.push_back(snapped);
    }
    inst.contact.push_back(std::move(row));
  }
  check_limits(inst);
  return inst;
}

/// One non-noisy realization: its origin hypothesis and one observation label
/// per action. Labels index `times`, then the NoContact copies.
struct NoisyCopy {
  int origin = 0;
  std::vector<int> label;
  double p = 0.0;
};

/// The explicit non-noisy problem built from noisy copies.
struct NoisyProblem {
  TinyInstance inst;
  WeightingModel w;  // inst.w with the copy cutoff applied
  std::vector<NoisyCopy> copies;
  std::vector<std::vector<std::vector<int>>> kept;  // [action][hypothesis] labels with omega > 0
  std::vector<std::vector<double>> kappa;           // [action][hypothesis] sum of kept omega

  int label_count(std::size_t a) const {
    return static_cast<int>(inst.obs[a].times.size()) + inst.obs[a].nocontact_multiplicity;
  }
  bool is_nocontact_label(std::size_t a, int label) const {
    return label >= static_cast<int>(inst.obs[a].times.size());
  }
  Observation label_observation(std::size_t a, int label) const {
    return is_nocontact_label(a, label) ? Observation::no_contact()
                                        : Observation::contact(inst.obs[a].times[static_cast<std::size_t>(label)]);
  }
  double omega(std::size_t a, std::size_t phi, int label) const {
    return weight(w, label_observation(a, label).raw(), inst.contact[a][phi]);
  }
  double max_omega(std::size_t a, std::size_t phi) const {
    double m = 0.0;
    for (int l : kept[a][phi]) m = std::max(m, omega(a, phi, l));
    return m;
  }
};

/// Splits every hypothesis into one copy per combination of kept labels.
/// Kernel values below `epsilon` are dropped before normalizing.
inline NoisyProblem build_noisy_problem(const TinyInstance& inst, double epsilon = 0.0) {
  check_limits(inst);
  NoisyProblem np;
  np.inst = inst;
  np.w = inst.w;
  np.w.cutoff = std::max(inst.w.cutoff, epsilon);
  const std::size_t na = inst.actions(), nh = inst.hypotheses();
  np.kept.assign(na, std::vector<std::vector<int>>(nh));
  np.kappa.assign(na, std::vector<double>(nh, 0.0));
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t phi = 0; phi < nh; ++phi) {
      for (int l = 0; l < np.label_count(a); ++l) {
        const double om = np.omega(a, phi, l);
        if (om > 0.0) {
          np.kept[a][phi].push_back(l);
          np.kappa[a][phi] += om;
        }
      }
      if (np.kept[a][phi].empty()) throw std::invalid_argument("hypothesis has no observation with nonzero weight");
    }
  }
  for (std::size_t phi = 0; phi < nh; ++phi) {
    std::vector<NoisyCopy> partial{{static_cast<int>(phi), {}, inst.prior[phi]}};
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<NoisyCopy> next;
      for (const auto& c : partial) {
        for (int l : np.kept[a][phi]) {
          NoisyCopy d = c;
          d.label.push_back(l);
          d.p *= np.omega(a, phi, l) / np.kappa[a][phi];
          next.push_back(std::move(d));
        }
      }
      partial = std::move(next);
    }
    np.copies.insert(np.copies.end(), partial.begin(), partial.end());
  }
  return np;
}

struct ProblemInvariants {
  double max_origin_sum_error = 0.0;
  bool equal_copy_counts = true;  // |Omega_a(phi)| equal across hypotheses
  double kappa_spread = 0.0;      // max - min of kappa over (a, phi)
};

inline ProblemInvariants check_invariants(const NoisyProblem& np) {
  ProblemInvariants r;
  std::vector<double> sums(np.inst.hypotheses(), 0.0);
  for (const auto& c : np.copies) sums[static_cast<std::size_t>(c.origin)] += c.p;
  for (std::size_t phi = 0; phi < sums.size(); ++phi) {
    r.max_origin_sum_error = std::max(r.max_origin_sum_error, std::abs(sums[phi] - np.inst.prior[phi]));
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t a = 0; a < np.inst.actions(); ++a) {
    for (std::size_t phi = 0; phi < np.inst.hypotheses(); ++phi) {
      if (np.kept[a][phi].size() != np.kept[a][0].size()) r.equal_copy_counts = false;
      lo = std::min(lo, np.kappa[a][phi]);
      hi = std::max(hi, np.kappa[a][phi]);
    }
  }
  r.kappa_spread = np.inst.actions() ? hi - lo : 0.0;
  return r;
}

using ActionMask = std::uint32_t;

/// f(A, copy) evaluated literally: every copy of every hypothesis is visited.
inline double f_explicit(const NoisyProblem& np, ActionMask subset, std::size_t copy) {
  const NoisyCopy& target = np.copies.at(copy);
  const std::size_t na = np.inst.actions();
  double kept_mass = 0.0;
  for (std::size_t phi = 0; phi < np.inst.hypotheses(); ++phi) {
    double scale = 1.0;
    for (std::size_t a = 0; a < na; ++a) {
      if (!(subset >> a & 1U)) continue;
      const double max_p = np.inst.prior[phi] * np.max_omega(a, phi) / np.kappa[a][phi];
      scale *= np.inst.prior[phi] / max_p;
    }
    double agree = 0.0;
    for (const auto& c : np.copies) {
      if (c.origin != static_cast<int>(phi)) continue;
      bool match = true;
      for (std::size_t a = 0; a < na && match; ++a) {
        if ((subset >> a & 1U) && c.label[a] != target.label[a]) match = false;
      }
      if (match) agree += c.p;
    }
    kept_mass += scale * agree;
  }
  return 1.0 - kept_mass;
}

/// p_psi(phi) for the history a copy would produce on `subset`.
inline std::vector<double> history_weights(const NoisyProblem& np, ActionMask subset, const NoisyCopy& copy) {
  std::vector<double> w = np.inst.prior;
  for (std::size_t a = 0; a < np.inst.actions(); ++a) {
    if (!(subset >> a & 1U)) continue;
    const Observation o = np.label_observation(a, copy.label[a]);
    for (std::size_t phi = 0; phi < w.size(); ++phi) w[phi] *= weight(np.w, o.raw(), np.inst.contact[a][phi]);
  }
  return w;
}

/// p(a = o | psi) by summing the probabilities of consistent copies, laid out
/// like `bucket_masses` (contact times, then all NoContact copies together).
inline std::vector<double> explicit_observation_probability(const NoisyProblem& np, ActionMask subset,
                                                            const NoisyCopy& history, std::size_t action) {
  const std::size_t nt = np.inst.obs[action].times.size();
  std::vector<double> p(nt + 1, 0.0);
  double z = 0.0;
  for (const auto& c : np.copies) {
    bool match = true;
    for (std::size_t a = 0; a < np.inst.actions() && match; ++a) {
      if ((subset >> a & 1U) && c.label[a] != history.label[a]) match = false;
    }
    if (!match) continue;
    const int l = c.label[action];
    p[np.is_nocontact_label(action, l) ? nt : static_cast<std::size_t>(l)] += c.p;
    z += c.p;
  }
  if (z > 0.0)
    for (double& v : p) v /= z;
  return p;
}

struct EquivalenceReport {
  double max_f_discrepancy = 0.0;
  double max_probability_discrepancy = 0.0;
  std::size_t comparisons = 0;
};

/// Compares the explicit construction with the efficient path over every
/// copy and every action subset, and every held-out action's observation
/// distribution.
inline EquivalenceReport check_equivalence(const NoisyProblem& np) {
  EquivalenceReport r;
  const std::size_t na = np.inst.actions();
  for (ActionMask subset = 0; subset < (ActionMask{1} << na); ++subset) {
    for (std::size_t ci = 0; ci < np.copies.size(); ++ci) {
      const auto& copy = np.copies[ci];
      const std::vector<double> w = history_weights(np, subset, copy);
      const double efficient = 1.0 - total_mass(w);
      r.max_f_discrepancy = std::max(r.max_f_discrepancy, std::abs(f_explicit(np, subset, ci) - efficient));
      ++r.comparisons;
      for (std::size_t a = 0; a < na; ++a) {
        if (subset >> a & 1U) continue;
        const auto expl = explicit_observation_probability(np, subset, copy, a);
        const auto eff = observation_probability(w, np.inst.contact[a], np.inst.obs[a], np.w);
        for (std::size_t k = 0; k < expl.size(); ++k) {
          r.max_probability_discrepancy = std::max(r.max_probability_discrepancy, std::abs(expl[k] - eff[k]));
        }
      }
    }
  }
  return r;
}

enum class CostKind { kAverage, kWorstCase };

namespace detail {

/// Memo key: the labels seen on each taken action (0 = not taken). Given the
/// taken set, these labels fix the surviving copies and vice versa.
inline std::uint64_t history_key(const std::vector<int>& labels) {
  std::uint64_t key = 0;
  for (int l : labels) key = key * 32 + static_cast<std::uint64_t>(l + 1);
  return key;
}

inline double f_of_history(const NoisyProblem& np, const std::vector<int>& labels) {
  std::vector<double> w = np.inst.prior;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    if (labels[a] < 0) continue;
    const Observation o = np.label_observation(a, labels[a]);
    for (std::size_t phi = 0; phi < w.size(); ++phi) w[phi] *= weight(np.w, o.raw(), np.inst.contact[a][phi]);
  }
  return 1.0 - total_mass(w);
}

/// Surviving copies split by their label on `action`.
inline std::vector<std::pair<int, std::vector<int>>> split(const NoisyProblem& np, const std::vector<int>& alive,
                                                           std::size_t action) {
  std::vector<std::pair<int, std::vector<int>>> parts;
  for (int ci : alive) {
    const int l = np.copies[static_cast<std::size_t>(ci)].label[action];
    auto it = std::find_if(parts.begin(), parts.end(), [l](const auto& e) { return e.first == l; });
    if (it == parts.end()) {
      parts.push_back({l, {ci}});
    } else {
      it->second.push_back(ci);
    }
  }
  std::sort(parts.begin(), parts.end());
  return parts;
}

inline double mass_of(const NoisyProblem& np, const std::vector<int>& alive) {
  double m = 0.0;
  for (int ci : alive) m += np.copies[static_cast<std::size_t>(ci)].p;
  return m;
}

inline constexpr double kCoverTolerance = 1e-12;

}  // namespace detail

/// min over copies of f(all actions, copy): the largest reachable target.
inline double max_coverage(const NoisyProblem& np) {
  double q = std::numeric_limits<double>::infinity();
  for (const auto& c : np.copies) q = std::min(q, detail::f_of_history(np, c.label));
  return q;
}

/// Exact optimal expected or worst-case cost to reach f >= q on every
/// realization, by exhaustive decision-tree search.
inline double optimal_policy_bruteforce(const NoisyProblem& np, double q, CostKind kind) {
  if (q <= 0.0) return 0.0;
  if (max_coverage(np) < q - detail::kCoverTolerance) throw std::invalid_argument("Q exceeds f(𝔸)");
  const std::size_t na = np.inst.actions();
  std::unordered_map<std::uint64_t, double> memo;
  std::vector<int> labels(na, -1);
  std::function<double(const std::vector<int>&)> solve = [&](const std::vector<int>& alive) -> double {
    if (detail::f_of_history(np, labels) >= q - detail::kCoverTolerance) return 0.0;
    const std::uint64_t key = detail::history_key(labels);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const double total = detail::mass_of(np, alive);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < na; ++a) {
      if (labels[a] >= 0) continue;
      double value = 0.0;
      for (const auto& [l, part] : detail::split(np, alive, a)) {
        labels[a] = l;
        const double v = solve(part);
        labels[a] = -1;
        if (kind == CostKind::kAverage) {
          value += detail::mass_of(np, part) / total * v;
        } else {
          value = std::max(value, v);
        }
      }
      best = std::min(best, np.inst.cost[a] + value);
    }
    memo.emplace(key, best);
    return best;
  };
  std::vector<int> all(np.copies.size());
  std::iota(all.begin(), all.end(), 0);
  return solve(all);
}

struct GreedyCosts {
  double average = 0.0;
  double worst_case = 0.0;
};

/// Runs the greedy policy on the truncated objective min(f, q) with the
/// efficient gain computation, over every realization of the non-noisy
/// problem, and returns its expected and worst-case cost.
inline GreedyCosts greedy_policy_cost(const NoisyProblem& np, double q) {
  GreedyCosts out;
  if (q <= 0.0) return out;
  const std::size_t na = np.inst.actions();
  std::vector<int> labels(na, -1);
  std::function<GreedyCosts(const std::vector<int>&)> walk = [&](const std::vector<int>& alive) -> GreedyCosts {
    const double f_now = detail::f_of_history(np, labels);
    if (f_now >= q - detail::kCoverTolerance) return {};
    std::vector<double> w = np.inst.prior;
    for (std::size_t a = 0; a < na; ++a) {
      if (labels[a] < 0) continue;
      const Observation o = np.label_observation(a, labels[a]);
      for (std::size_t phi = 0; phi < w.size(); ++phi) w[phi] *= weight(np.w, o.raw(), np.inst.contact[a][phi]);
    }
    int chosen = -1;
    double best_score = -1.0;
    for (std::size_t a = 0; a < na; ++a) {
      if (labels[a] >= 0) continue;
      const GainReport r = marginal_gain_hp(w, np.inst.contact[a], np.inst.obs[a], np.w);
      double gain = 0.0;
      for (const auto& oc : r.outcomes) {
        gain += oc.probability * (std::min(1.0 - oc.value, q) - std::min(f_now, q));
      }
      const double score = gain / np.inst.cost[a];
      if (chosen < 0 || score > best_score) {
        chosen = static_cast<int>(a);
        best_score = score;
      }
    }
    if (chosen < 0) throw std::logic_error("greedy ran out of actions before reaching Q");
    const auto a = static_cast<std::size_t>(chosen);
    GreedyCosts acc;
    const double total = detail::mass_of(np, alive);
    for (const auto& [l, part] : detail::split(np, alive, a)) {
      labels[a] = l;
      const GreedyCosts sub = walk(part);
      labels[a] = -1;
      acc.average += detail::mass_of(np, part) / total * sub.average;
      acc.worst_case = std::max(acc.worst_case, sub.worst_case);
    }
    acc.average += np.inst.cost[a];
    acc.worst_case += np.inst.cost[a];
    return acc;
  };
  std::vector<int> all(np.copies.size());
  std::iota(all.begin(), all.end(), 0);
  return walk(all);
}

/// Largest eta such that f(psi) > q - eta implies f(psi) >= q, over every
/// history some realization can produce.
inline double coverage_gap(const NoisyProblem& np, double q) {
  const std::size_t na = np.inst.actions();
  double below = -std::numeric_limits<double>::infinity();
  for (ActionMask subset = 0; subset < (ActionMask{1} << na); ++subset) {
    for (const auto& c : np.copies) {
      std::vector<int> labels(na, -1);
      for (std::size_t a = 0; a < na; ++a)
        if (subset >> a & 1U) labels[a] = c.label[a];
      const double f = detail::f_of_history(np, labels);
      if (f < q - detail::kCoverTolerance) below = std::max(below, f);
    }
  }
  return std::isfinite(below) ? q - below : q;
}

inline double min_copy_probability(const NoisyProblem& np) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : np.copies) d = std::min(d, c.p);
  return d;
}

struct BoundCertificate {
  double q = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  double greedy_avg = 0.0;
  double optimal_avg = 0.0;
  double bound_avg = 0.0;
  double greedy_wc = 0.0;
  double optimal_wc = 0.0;
  double bound_wc = 0.0;
  bool pass_avg = false;
  bool pass_wc = false;
  bool sane = false;  // greedy is never cheaper than the optimum

  bool pass() const { return pass_avg && pass_wc && sane; }
};

inline BoundCertificate certify_bounds(const NoisyProblem& np, double q) {
  BoundCertificate c;
  c.q = q;
  c.eta = coverage_gap(np, q);
  c.delta = min_copy_probability(np);
  const GreedyCosts g = greedy_policy_cost(np, q);
  c.greedy_avg = g.average;
  c.greedy_wc = g.worst_case;
  c.optimal_avg = optimal_policy_bruteforce(np, q, CostKind::kAverage);
  c.optimal_wc = optimal_policy_bruteforce(np, q, CostKind::kWorstCase);
  constexpr double tol = 1e-9;
  if (q <= 0.0) {
    c.pass_avg = c.pass_wc = c.sane = true;
    return c;
  }
  c.bound_avg = c.optimal_avg * (std::log(q / c.eta) + 1.0);
  c.bound_wc = c.optimal_wc * (std::log(q / (c.delta * c.eta)) + 1.0);
  c.pass_avg = c.greedy_avg <= c.bound_avg * (1.0 + tol) + tol;
  c.pass_wc = c.greedy_wc <= c.bound_wc * (1.0 + tol) + tol;
  c.sane = c.greedy_avg >= c.optimal_avg * (1.0 - tol) - tol && c.greedy_wc >= c.optimal_wc * (1.0 - tol) - tol;
  return c;
}

inline void write_certificates_csv(std::ostream& os, const std::vector<BoundCertificate>& certs) {
  os << "instance,q,eta,delta,greedy_avg,optimal_avg,bound_avg,greedy_wc,optimal_wc,bound_wc,pass\n";
  char buf[512];
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const auto& c = certs[i];
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d\n", i, c.q, c.eta,
                  c.delta, c.greedy_avg, c.optimal_avg, c.bound_avg, c.greedy_wc, c.optimal_wc, c.bound_wc,
                  c.pass() ? 1 : 0);
    os << buf;
  }
}

struct InstanceShape {
  std::size_t max_hypotheses = kMaxHypotheses;
  std::size_t min_actions = 1;
  std::size_t max_actions = kMaxActions;
  std::size_t max_times = kMaxTimes;
  int max_radius = 1;  // HP keeps 2r+1 labels; WHP keeps labels within r steps
};

namespace detail {

inline std::vector<double> random_prior(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::vector<double> p(n);
  for (auto& v : p) v = u(rng);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= s;
  return p;
}

}  // namespace detail

/// HP instance with kappa equal to K everywhere: d_T = (r + 1/2) spacing,
/// K = 2r + 1, and every contact time on an interior grid point.
inline TinyInstance random_hp_instance(Rng& rng, const InstanceShape& shape = {}) {
  std::uniform_int_distribution<int> radius_d(0, shape.max_radius);
  const int r = radius_d(rng);
  const std::size_t min_times = static_cast<std::size_t>(2 * r + 1);
  std::uniform_int_distribution<std::size_t> nh_d(2, shape.max_hypotheses), na_d(shape.min_actions, shape.max_actions),
      nt_d(std::min(min_times + 1, shape.max_times), shape.max_times);
  std::uniform_real_distribution<double> cost_d(1.0, 3.0), u(0.0, 1.0);
  const double spacing = 1.0;
  TinyInstance inst;
  inst.prior = detail::random_prior(nh_d(rng), rng);
  inst.w = WeightingModel::hp((r + 0.5) * spacing);
  const std::size_t na = na_d(rng);
  for (std::size_t a = 0; a < na; ++a) {
    const std::size_t nt = nt_d(rng);
    ObservationSet obs = discretize_observations(static_cast<double>(nt - 1) * spacing, spacing, 2 * r + 1);
    std::uniform_int_distribution<int> idx(r, static_cast<int>(nt) - 1 - r);
    std::vector<double> row;
    for (std::size_t h = 0; h < inst.hypotheses(); ++h) {
      row.push_back(u(rng) < 0.25 ? kNoContact : obs.times[static_cast<std::size_t>(idx(rng))]);
    }
    inst.contact.push_back(std::move(row));
    inst.obs.push_back(std::move(obs));
    inst.cost.push_back(cost_d(rng));
  }
  return inst;
}

/// WHP instance with kappa constant: every hypothesis contacts every action
/// on an interior grid point, and the cutoff keeps labels within r steps.
inline TinyInstance random_whp_instance(Rng& rng, const InstanceShape& shape = {}) {
  std::uniform_int_distribution<int> radius_d(0, shape.max_radius);
  const int r = radius_d(rng);
  const std::size_t min_times = static_cast<std::size_t>(2 * r + 1);
  std::uniform_int_distribution<std::size_t> nh_d(2, shape.max_hypotheses), na_d(shape.min_actions, shape.max_actions),
      nt_d(std::min(min_times + 1, shape.max_times), shape.max_times);
  std::uniform_real_distribution<double> cost_d(1.0, 3.0), sigma_d(0.5, 1.5);
  const double spacing = 1.0;
  const double sigma = sigma_d(rng);
  TinyInstance inst;
  inst.prior = detail::random_prior(nh_d(rng), rng);
  // Cutoff halfway (in distance) between the r-th and (r+1)-th grid step.
  const double d_cut = (r + 0.5) * spacing;
  inst.w = WeightingModel::whp(sigma, std::exp(-d_cut * d_cut / (2.0 * sigma * sigma)));
  const std::size_t na = na_d(rng);
  for (std::size_t a = 0; a < na; ++a) {
    const std::size_t nt = nt_d(rng);
    ObservationSet obs = discretize_observations(static_cast<double>(nt - 1) * spacing, spacing, 1);
    std::uniform_int_distribution<int> idx(r, static_cast<int>(nt) - 1 - r);
    std::vector<double> row;
    for (std::size_t h = 0; h < inst.hypotheses(); ++h) row.push_back(obs.times[static_cast<std::size_t>(idx(rng))]);
    inst.contact.push_back(std::move(row));
    inst.obs.push_back(std::move(obs));
    inst.cost.push_back(cost_d(rng));
  }
  return inst;
}

}  // namespace touchloc::oracle
