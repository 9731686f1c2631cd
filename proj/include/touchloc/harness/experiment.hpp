#pragma once

#include <touchloc/actions.hpp>
#include <touchloc/belief.hpp>
#include <touchloc/contact_table.hpp>
#include <touchloc/geometry.hpp>
#include <touchloc/harness/config.hpp>
#include <touchloc/harness/stats.hpp>
#include <touchloc/policy.hpp>
#include <touchloc/scene.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace touchloc::harness {

inline Scene make_scene(const ExperimentConfig& c) {
  if (c.scene == "drill-like") return make_drill_scene(c.table);
  if (c.scene == "door-like") return make_door_scene();
  Scene s{c.scene, load_mesh(c.scene), std::nullopt, SensorRig::single_point()};
  return s;
}

/// The per-seed inputs shared by every metric: the prior particle set and the
/// action set generated against it.
struct SeedSetup {
  std::uint64_t seed = 0;
  Pose truth;
  ParticleBelief prior;
  std::vector<Action> actions;
  std::vector<std::size_t> human_sequence;
};

inline SeedSetup prepare_seed(const ExperimentConfig& c, const Scene& scene, std::uint64_t seed) {
  SeedSetup s;
  s.seed = seed;
  const StreamFactory streams(seed);
  s.truth = Pose{c.sensed.x + c.truth_offset.x, c.sensed.y + c.truth_offset.y, c.sensed.z + c.truth_offset.z,
                 Pose::wrap_angle(c.sensed.theta + c.truth_offset.theta)};
  Rng prior_rng = streams.stream("prior");
  s.prior = init_belief(c.sensed, c.prior_variance, c.particles, prior_rng);
  const auto poses = s.prior.poses();
  s.actions = generate_action_set(scene, c.sensed, poses, c.actions, streams.child("actions"));
  for (int i = 0; i < c.actions.human; ++i) s.human_sequence.push_back(static_cast<std::size_t>(i));
  return s;
}

inline EpisodeOptions episode_options(const ExperimentConfig& c, SelectorKind kind, const SeedSetup& setup) {
  EpisodeOptions o;
  o.metric.kind = kind;
  o.metric.weighting = c.weighting_for(kind);
  o.metric.obs_spacing = c.obs_spacing;
  o.metric.nocontact_multiplicity = c.nocontact_multiplicity;
  o.metric.regularizer = c.regularizer;
  o.update = c.weighting_for(kind);
  o.termination = c.termination_rule();
  o.resample.enabled = c.resample;
  o.resample.particles = c.particles;
  o.resample.jitter_std = c.jitter_std();
  o.resample.kernel_bandwidth = c.kernel_bandwidth;
  o.lazy = c.lazy && kind != SelectorKind::kIG;
  o.noise_sigma = c.noise_sigma;
  o.wall_clock = c.wall_clock;
  o.threads = c.threads;
  o.fixed_sequence = setup.human_sequence;
  return o;
}

inline EpisodeLog run_metric(const ExperimentConfig& c, const Scene& scene, const SeedSetup& setup,
                             SelectorKind kind) {
  const StreamFactory streams(setup.seed);
  return run_episode(scene, setup.truth, setup.actions, setup.prior, episode_options(c, kind, setup),
                     streams.child("episode/" + selector_name(kind)));
}

struct SummaryRow {
  std::string metric;
  int step = 0;
  Interval cov;
  Interval selection_ms;
  std::size_t episodes = 0;
};

/// Per-metric, per-step mean and 95% interval across seeds. Episodes that
/// ended (or lost all mass) before a step do not contribute to it.
inline std::vector<SummaryRow> summarize(const std::map<std::string, std::vector<EpisodeLog>>& logs,
                                         const std::vector<SelectorKind>& order) {
  std::vector<SummaryRow> out;
  for (SelectorKind k : order) {
    const auto it = logs.find(selector_name(k));
    if (it == logs.end()) continue;
    std::size_t max_steps = 0;
    for (const auto& l : it->second) max_steps = std::max(max_steps, l.rows.size());
    for (std::size_t step = 0; step < max_steps; ++step) {
      std::vector<double> cov, ms;
      for (const auto& l : it->second) {
        if (step >= l.rows.size() || !std::isfinite(l.rows[step].cov_eig_sum)) continue;
        cov.push_back(l.rows[step].cov_eig_sum);
        ms.push_back(l.rows[step].selection_ms);
      }
      if (cov.empty()) continue;
      out.push_back({it->first, static_cast<int>(step), mean_ci95(cov), mean_ci95(ms), cov.size()});
    }
  }
  return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "metric,step,mean_cov_eig_sum,ci95_lo,ci95_hi,mean_selection_ms,ci95_ms\n";
  for (const auto& r : rows) {
    os << r.metric << ',' << r.step << ',' << format_number(r.cov.mean) << ',' << format_number(r.cov.lo) << ','
       << format_number(r.cov.hi) << ',' << format_number(r.selection_ms.mean) << ','
       << format_number(r.selection_ms.half_width) << '\n';
  }
}

struct ExperimentResult {
  std::map<std::string, std::vector<EpisodeLog>> logs;  // by metric, in seed order
  std::vector<SummaryRow> summary;
  std::vector<std::filesystem::path> files;
};

inline std::string episode_file_name(std::uint64_t seed, const std::string& metric) {
  return "episode_seed" + std::to_string(seed) + "_" + metric + ".csv";
}

/// Runs every metric on every seed with a shared action set and prior per
/// seed. Writes episode, action-set and summary CSVs when `out_dir` is set.
inline ExperimentResult run_experiment(const ExperimentConfig& c, const std::filesystem::path& out_dir = {}) {
  validate(c);
  const Scene scene = make_scene(c);
  ExperimentResult res;
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  for (std::uint64_t seed : c.seeds) {
    const SeedSetup setup = prepare_seed(c, scene, seed);
    if (!out_dir.empty()) {
      const auto p = out_dir / ("actions_seed" + std::to_string(seed) + ".csv");
      std::ofstream f(p);
      write_actions_csv(f, setup.actions);
      res.files.push_back(p);
    }
    for (SelectorKind k : c.metrics) {
      EpisodeLog log = run_metric(c, scene, setup, k);
      if (!out_dir.empty()) {
        const auto p = out_dir / episode_file_name(seed, log.metric);
        std::ofstream f(p);
        write_episode_csv(f, log);
        res.files.push_back(p);
      }
      res.logs[log.metric].push_back(std::move(log));
    }
  }
  res.summary = summarize(res.logs, c.metrics);
  if (!out_dir.empty()) {
    const auto p = out_dir / "summary.csv";
    std::ofstream f(p);
    write_summary_csv(f, res.summary);
    res.files.push_back(p);
  }
  return res;
}

struct BenchRow {
  std::string metric;
  Interval ms;
  std::size_t samples = 0;
};

/// Times one full greedy selection (every action evaluated) for IG, HP and
/// WHP on the same prior and action set, `reps` times per seed. The contact
/// table is built outside the timed region.
inline std::vector<BenchRow> run_bench(const ExperimentConfig& c, int reps = 3) {
  validate(c);
  const Scene scene = make_scene(c);
  const std::vector<SelectorKind> kinds{SelectorKind::kHP, SelectorKind::kWHP, SelectorKind::kIG};
  std::map<SelectorKind, std::vector<double>> samples;
  for (std::uint64_t seed : c.seeds) {
    const SeedSetup setup = prepare_seed(c, scene, seed);
    const auto poses = setup.prior.poses();
    const auto weights = setup.prior.weights();
    const ContactTable table = ContactTable::build(setup.actions, poses, scene, c.threads);
    const std::vector<bool> none(setup.actions.size(), false);
    for (int r = 0; r < reps; ++r) {
      for (SelectorKind k : kinds) {
        const EpisodeOptions o = episode_options(c, k, setup);
        const auto t0 = std::chrono::steady_clock::now();
        SelectionRound round(setup.actions, poses, weights, table, o.metric);
        const GainReport g = select_greedy(round, none);
        const auto t1 = std::chrono::steady_clock::now();
        (void)g;
        samples[k].push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
    }
  }
  std::vector<BenchRow> out;
  for (SelectorKind k : kinds) out.push_back({selector_name(k), mean_ci95(samples[k]), samples[k].size()});
  return out;
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "metric,samples,mean_ms,ci95_lo,ci95_hi\n";
  for (const auto& r : rows) {
    os << r.metric << ',' << r.samples << ',' << format_number(r.ms.mean) << ',' << format_number(r.ms.lo) << ','
       << format_number(r.ms.hi) << '\n';
  }
}

}  // namespace touchloc::harness
