#pragma once

#include <touchloc/action.hpp>
#include <touchloc/belief.hpp>
#include <touchloc/contact_table.hpp>
#include <touchloc/metrics.hpp>
#include <touchloc/rng.hpp>
#include <touchloc/scene.hpp>
#include <touchloc/sensing.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace touchloc {

enum class SelectorKind { kHP, kWHP, kIG, kRandom, kHuman };

inline std::string selector_name(SelectorKind k) {
  switch (k) {
    case SelectorKind::kHP: return "hp";
    case SelectorKind::kWHP: return "whp";
    case SelectorKind::kIG: return "ig";
    case SelectorKind::kRandom: return "random";
    case SelectorKind::kHuman: return "human";
  }
  return "?";
}

inline SelectorKind parse_selector(const std::string& s) {
  if (s == "hp") return SelectorKind::kHP;
  if (s == "whp") return SelectorKind::kWHP;
  if (s == "ig") return SelectorKind::kIG;
  if (s == "random") return SelectorKind::kRandom;
  if (s == "human") return SelectorKind::kHuman;
  throw std::invalid_argument("unknown metric '" + s + "'");
}

/// What a gain evaluation needs besides the belief: the weighting that defines
/// the metric and the observation discretization.
struct Metric {
  SelectorKind kind = SelectorKind::kHP;
  WeightingModel weighting = WeightingModel::hp(1.0);
  double obs_spacing = 0.5;
  int nocontact_multiplicity = 1;
  double regularizer = 1e-12;

  bool is_greedy() const {
    return kind == SelectorKind::kHP || kind == SelectorKind::kWHP || kind == SelectorKind::kIG;
  }
};

/// Read-only inputs of one selection round.
struct SelectionRound {
  std::span<const Action> actions;
  std::span<const Pose> poses;
  std::span<const double> weights;
  const ContactTable* table = nullptr;
  Metric metric;
  std::optional<IgContext> ig;

  SelectionRound(std::span<const Action> a, std::span<const Pose> p, std::span<const double> w,
                 const ContactTable& t, const Metric& m)
      : actions(a), poses(p), weights(w), table(&t), metric(m) {
    if (t.action_count() != a.size() || t.particle_count() != p.size() || w.size() != p.size()) {
      throw std::invalid_argument("selection round size mismatch");
    }
  }

  /// Gain of action `index`. The IG context is built on first use so its cost
  /// lands inside the timed selection.
  GainReport evaluate(std::size_t index) {
    const Action& a = actions[index];
    const ObservationSet obs =
        discretize_observations(a, metric.obs_spacing, metric.nocontact_multiplicity);
    GainReport r;
    if (metric.kind == SelectorKind::kIG) {
      if (!ig) ig = IgContext::make(poses, weights, metric.regularizer);
      r = marginal_gain_ig(*ig, weights, table->row(index), obs, metric.weighting);
    } else {
      r = marginal_gain_hp(weights, table->row(index), obs, metric.weighting);
    }
    r.outcomes.clear();
    r.action_id = a.id;
    r.set_cost(action_cost(a));
    return r;
  }
};

namespace detail {

/// Higher score wins; equal scores go to the lower id.
inline bool better(double score_a, int id_a, double score_b, int id_b) {
  return score_a > score_b || (score_a == score_b && id_a < id_b);
}

}  // namespace detail

/// Evaluates every unselected action once and returns the best score.
inline GainReport select_greedy(SelectionRound& round, const std::vector<bool>& selected,
                                std::size_t* evaluations = nullptr) {
  std::optional<GainReport> best;
  for (std::size_t i = 0; i < round.actions.size(); ++i) {
    if (selected[i]) continue;
    GainReport r = round.evaluate(i);
    if (evaluations) ++*evaluations;
    if (!best || detail::better(r.score, r.action_id, best->score, best->action_id)) best = std::move(r);
  }
  if (!best) throw std::invalid_argument("no unselected action");
  return *best;
}

/// Stale-score bookkeeping for lazy greedy.
class PolicyState {
 public:
  explicit PolicyState(std::size_t action_count)
      : score_(action_count, std::numeric_limits<double>::infinity()), stamp_(action_count, -1),
        selected_(action_count, false) {}

  const std::vector<bool>& selected() const { return selected_; }
  void mark_selected(std::size_t index) { selected_.at(index) = true; }
  std::size_t remaining() const {
    std::size_t n = 0;
    for (bool s : selected_) n += s ? 0 : 1;
    return n;
  }

  /// Drops every stored bound; the next round evaluates all actions. Needed
  /// whenever the particle set is replaced, since old scores then bound nothing.
  void invalidate() {
    std::fill(score_.begin(), score_.end(), std::numeric_limits<double>::infinity());
    std::fill(stamp_.begin(), stamp_.end(), -1);
  }

  int round() const { return round_; }
  void next_round() { ++round_; }

  std::vector<double>& scores() { return score_; }
  std::vector<int>& stamps() { return stamp_; }

 private:
  std::vector<double> score_;
  std::vector<int> stamp_;
  std::vector<bool> selected_;
  int round_ = 0;
};

/// Lazy greedy: re-evaluates only actions whose stale bound could still beat
/// the best fresh score. Picks the same action as `select_greedy` whenever
/// stale scores bound fresh ones. Call `state.next_round()` after selecting.
inline GainReport select_lazy_greedy(PolicyState& state, SelectionRound& round,
                                     std::size_t* evaluations = nullptr, double tie_tolerance = 1e-12) {
  auto& score = state.scores();
  auto& stamp = state.stamps();
  const auto& selected = state.selected();
  const int now = state.round();
  std::vector<std::optional<GainReport>> fresh(round.actions.size());
  auto refresh = [&](std::size_t i) {
    fresh[i] = round.evaluate(i);
    if (evaluations) ++*evaluations;
    score[i] = fresh[i]->score;
    stamp[i] = now;
  };
  for (;;) {
    std::optional<std::size_t> top;
    for (std::size_t i = 0; i < score.size(); ++i) {
      if (selected[i]) continue;
      if (!top || detail::better(score[i], round.actions[i].id, score[*top], round.actions[*top].id)) top = i;
    }
    if (!top) throw std::invalid_argument("no unselected action");
    if (stamp[*top] != now) {
      refresh(*top);
      continue;
    }
    // Stale bounds within rounding of the leader are refreshed too, so a
    // last-bit wobble in a bound cannot change the pick.
    bool refreshed = false;
    for (std::size_t i = 0; i < score.size(); ++i) {
      if (selected[i] || stamp[i] == now) continue;
      if (score[i] >= score[*top] - tie_tolerance) {
        refresh(i);
        refreshed = true;
      }
    }
    if (refreshed) continue;
    return *fresh[*top];
  }
}

/// Uniform over unselected actions.
inline std::size_t select_random(const std::vector<bool>& selected, Rng& rng) {
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (!selected[i]) open.push_back(i);
  if (open.empty()) throw std::invalid_argument("no unselected action");
  std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
  return open[pick(rng)];
}

/// Next entry of `sequence` not yet selected, or nothing when exhausted.
inline std::optional<std::size_t> select_fixed(const std::vector<std::size_t>& sequence,
                                               const std::vector<bool>& selected) {
  for (std::size_t i : sequence)
    if (!selected.at(i)) return i;
  return std::nullopt;
}

struct TerminationRule {
  enum class Kind { kMassTarget, kEntropyTarget, kBudget };
  Kind kind = Kind::kBudget;
  double value = 5.0;

  static TerminationRule mass_target(double q) {
    if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("mass target must lie in (0, 1]");
    return {Kind::kMassTarget, q};
  }
  static TerminationRule entropy_target(double h) { return {Kind::kEntropyTarget, h}; }
  static TerminationRule budget(int n) {
    if (n < 0) throw std::invalid_argument("budget must be non-negative");
    return {Kind::kBudget, static_cast<double>(n)};
  }

  bool done(std::size_t steps, double f_psi, double entropy) const {
    switch (kind) {
      case Kind::kMassTarget: return f_psi >= value;
      case Kind::kEntropyTarget: return entropy <= value;
      case Kind::kBudget: return static_cast<double>(steps) >= value;
    }
    return true;
  }
};

struct ResampleParams {
  bool enabled = true;
  std::size_t particles = 0;  // 0 keeps the current count
  std::array<double, 4> jitter_std{0.0, 0.0, 0.0, 0.0};
  /// When in (0, 1), resampled particles are shrunk toward the weighted mean
  /// by sqrt(1 - h^2) and perturbed with h times the posterior std-dev, which
  /// keeps the first two moments (kernel shrinkage). `jitter_std` is added on top.
  double kernel_bandwidth = 0.0;
};

struct EpisodeRow {
  int step = 0;
  int action_id = -1;
  std::string obs_kind;  // "init", "contact", "no_contact"
  double obs_time_s = std::numeric_limits<double>::quiet_NaN();
  double mass_remaining = 1.0;
  double f_psi = 0.0;
  double entropy = 0.0;
  double cov_eig_sum = 0.0;
  double selection_ms = 0.0;
  double cumulative_cost_s = 0.0;
  std::size_t evaluations = 0;
};

struct EpisodeLog {
  std::string metric;
  std::vector<EpisodeRow> rows;  // row 0 is the prior
  History history;
  bool annihilated = false;
};

struct EpisodeOptions {
  Metric metric;
  /// Weighting used to update the belief. For greedy metrics this is normally
  /// the metric's own weighting.
  WeightingModel update = WeightingModel::whp(0.5);
  TerminationRule termination = TerminationRule::budget(5);
  ResampleParams resample;
  bool lazy = false;
  double noise_sigma = 0.2;
  bool wall_clock = true;
  int threads = 1;
  std::vector<std::size_t> fixed_sequence;  // for the human selector
};

namespace detail {

inline void fill_stats(EpisodeRow& row, std::span<const Pose> poses, std::span<const double> w,
                       double regularizer) {
  row.mass_remaining = total_mass(w);
  const auto [mean, cov] = weighted_moments(poses, w);
  (void)mean;
  row.entropy = gaussian_entropy(cov, regularizer);
  row.cov_eig_sum = covariance_eigen_sum(cov);
}

}  // namespace detail

/// One episode against a known true pose.
///
/// The mass track (f = 1 - M) is carried through resampling: each resampled
/// particle gets an equal share of the mass left before resampling. Row
/// statistics are taken after the update and before resampling.
inline EpisodeLog run_episode(const Scene& scene, const Pose& truth, std::span<const Action> actions,
                              const ParticleBelief& prior, const EpisodeOptions& opt,
                              const StreamFactory& streams) {
  using clock = std::chrono::steady_clock;
  EpisodeLog log;
  log.metric = selector_name(opt.metric.kind);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].id != static_cast<int>(i)) throw std::invalid_argument("action ids must be dense from 0");
  }
  Rng obs_rng = streams.stream("observe");
  Rng pick_rng = streams.stream("select");
  Rng resample_rng = streams.stream("resample");

  ParticleBelief belief = prior;
  std::vector<Pose> poses = belief.poses();
  std::vector<double> weights = belief.weights();
  const double initial_mass = total_mass(weights);

  EpisodeRow init;
  init.step = 0;
  init.obs_kind = "init";
  detail::fill_stats(init, poses, weights, opt.metric.regularizer);
  init.f_psi = initial_mass - init.mass_remaining;
  log.rows.push_back(init);

  PolicyState state(actions.size());
  ContactTable table;
  bool table_valid = false;
  double cumulative = 0.0;

  for (std::size_t step = 1;; ++step) {
    const EpisodeRow& last = log.rows.back();
    if (opt.termination.done(step - 1, last.f_psi, last.entropy)) break;
    if (state.remaining() == 0) break;

    if (opt.metric.is_greedy() && !table_valid) {
      table = ContactTable::build(actions, poses, scene, opt.threads);
      table_valid = true;
    }

    std::size_t chosen = 0;
    std::size_t evals = 0;
    const auto t0 = clock::now();
    if (opt.metric.is_greedy()) {
      SelectionRound round(actions, poses, weights, table, opt.metric);
      const GainReport r = opt.lazy ? select_lazy_greedy(state, round, &evals)
                                    : select_greedy(round, state.selected(), &evals);
      chosen = static_cast<std::size_t>(r.action_id);
    } else if (opt.metric.kind == SelectorKind::kRandom) {
      chosen = select_random(state.selected(), pick_rng);
    } else {
      auto next = select_fixed(opt.fixed_sequence, state.selected());
      if (!next) break;
      chosen = *next;
    }
    const auto t1 = clock::now();
    state.mark_selected(chosen);
    state.next_round();

    const Action& action = actions[chosen];
    const Observation obs = simulate_observation(action, truth, scene, opt.noise_sigma, obs_rng);
    log.history.push(action.id, obs);
    cumulative += action_cost(action);

    std::vector<double> row(poses.size());
    if (table_valid) {
      const auto r = table.row(chosen);
      std::copy(r.begin(), r.end(), row.begin());
    } else {
      for (std::size_t i = 0; i < poses.size(); ++i) row[i] = scene.contact_time(action, poses[i]).raw();
    }
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] *= weight(opt.update, obs.raw(), row[i]);

    EpisodeRow out;
    out.step = static_cast<int>(step);
    out.action_id = action.id;
    out.obs_kind = obs.is_contact() ? "contact" : "no_contact";
    out.obs_time_s = obs.is_contact() ? obs.time() : std::numeric_limits<double>::quiet_NaN();
    out.selection_ms = opt.wall_clock ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
    out.cumulative_cost_s = cumulative;
    out.evaluations = evals;
    out.mass_remaining = total_mass(weights);
    out.f_psi = initial_mass - out.mass_remaining;
    if (!(out.mass_remaining > 0.0)) {
      out.entropy = std::numeric_limits<double>::quiet_NaN();
      out.cov_eig_sum = std::numeric_limits<double>::quiet_NaN();
      log.rows.push_back(out);
      log.annihilated = true;
      break;
    }
    detail::fill_stats(out, poses, weights, opt.metric.regularizer);
    out.f_psi = initial_mass - out.mass_remaining;
    log.rows.push_back(out);

    if (opt.resample.enabled) {
      ParticleBelief current;
      current.initial_mass = initial_mass;
      current.particles.reserve(poses.size());
      for (std::size_t i = 0; i < poses.size(); ++i) current.particles.push_back({poses[i], weights[i]});
      const std::size_t n = opt.resample.particles ? opt.resample.particles : poses.size();
      const double h = opt.resample.kernel_bandwidth;
      if (h > 0.0 && h < 1.0) {
        const auto [mean, cov] = weighted_moments(poses, weights);
        belief = resample(current, n, {0.0, 0.0, 0.0, 0.0}, resample_rng);
        const double a = std::sqrt(1.0 - h * h);
        std::normal_distribution<double> unit(0.0, 1.0);
        for (auto& p : belief.particles) {
          Vector4 v = p.pose.as_vector();
          v[3] = mean[3] + Pose::wrap_angle(v[3] - mean[3]);
          for (int k = 0; k < 4; ++k) {
            const double sd = std::sqrt(std::max(0.0, cov(k, k)));
            v[k] = mean[k] + a * (v[k] - mean[k]) + h * sd * unit(resample_rng);
            if (opt.resample.jitter_std[k] > 0.0) v[k] += opt.resample.jitter_std[k] * unit(resample_rng);
          }
          p.pose = Pose::from_vector(v).normalized();
        }
      } else {
        belief = resample(current, n, opt.resample.jitter_std, resample_rng);
      }
      poses = belief.poses();
      weights = belief.weights();
      table_valid = false;
      state.invalidate();
    }
  }
  return log;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_episode_csv(std::ostream& os, const EpisodeLog& log) {
  os << "step,action_id,obs_kind,obs_time_s,mass_remaining,f_psi,entropy,cov_eig_sum,selection_ms,"
        "cumulative_cost_s\n";
  for (const auto& r : log.rows) {
    os << r.step << ',' << r.action_id << ',' << r.obs_kind << ',' << format_number(r.obs_time_s) << ','
       << format_number(r.mass_remaining) << ',' << format_number(r.f_psi) << ',' << format_number(r.entropy)
       << ',' << format_number(r.cov_eig_sum) << ',' << format_number(r.selection_ms) << ','
       << format_number(r.cumulative_cost_s) << '\n';
  }
}

}  // namespace touchloc
