#include <touchloc/harness/config.hpp>
#include <touchloc/harness/experiment.hpp>
#include <touchloc/harness/properties.hpp>
#include <touchloc/oracle.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace touchloc;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const unsigned long long v = std::stoull(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad seed '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("--seeds is empty");
  return out;
}

int cmd_run(const std::string& config, const std::string& out, const std::string& seeds) {
  auto c = harness::load_config(config);
  if (!seeds.empty()) c.seeds = parse_seeds(seeds);
  const std::string dir = out.empty() ? c.output_dir : out;
  const auto res = harness::run_experiment(c, dir);
  harness::write_summary_csv(std::cout, res.summary);
  for (const auto& [metric, logs] : res.logs) {
    std::size_t dead = 0;
    for (const auto& l : logs) dead += l.annihilated ? 1 : 0;
    if (dead) std::fprintf(stderr, "%s: %zu episode(s) lost all particle mass\n", metric.c_str(), dead);
  }
  std::fprintf(stderr, "wrote %zu files to %s\n", res.files.size(), dir.c_str());
  return 0;
}

int cmd_check(std::uint64_t seed) {
  const auto as = harness::check_adaptive_submodularity(200, seed);
  std::printf("adaptive_submodularity cases=%zu worst=%.3g %s\n", as.cases, as.worst, as.pass ? "PASS" : "FAIL");
  const auto sm = harness::check_strong_monotonicity(10000, seed);
  std::printf("strong_monotonicity cases=%zu worst=%.3g %s\n", sm.cases, sm.worst, sm.pass ? "PASS" : "FAIL");
  const auto eq = harness::check_noisy_copy_equivalence(50, seed);
  const bool eq_ok = eq.max_f_discrepancy <= 1e-9 && eq.max_probability_discrepancy <= 1e-9;
  std::printf("noisy_copy_equivalence instances=%zu f=%.3g p=%.3g %s\n", eq.instances, eq.max_f_discrepancy,
              eq.max_probability_discrepancy, eq_ok ? "PASS" : "FAIL");
  return as.pass && sm.pass && eq_ok ? 0 : 1;
}

int cmd_bench(const std::string& config, int reps) {
  const auto c = harness::load_config(config);
  const auto rows = harness::run_bench(c, reps);
  harness::write_bench_csv(std::cout, rows);
  return 0;
}

int cmd_certify(std::size_t instances, std::uint64_t seed) {
  const auto s = harness::certify_random_instances(instances, seed);
  oracle::write_certificates_csv(std::cout, s.certificates);
  std::fprintf(stderr, "%zu/%zu certificates pass\n", s.passed, s.certificates.size());
  return s.passed == s.certificates.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Touch-based localization: action selection, property checks and benchmarks"};
  app.require_subcommand(1);

  std::string config, out, seeds;
  auto* run = app.add_subcommand("run", "run every configured metric on every seed");
  run->add_option("--config", config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory (overrides output_dir)");
  run->add_option("--seeds", seeds, "comma-separated seeds (overrides seeds)");

  std::uint64_t seed = 1;
  auto* check = app.add_subcommand("check", "adaptive submodularity, strong monotonicity, noisy-copy equivalence");
  check->add_option("--seed", seed, "random seed");

  int reps = 3;
  auto* bench = app.add_subcommand("bench", "time one greedy selection per metric on shared inputs");
  bench->add_option("--config", config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
  bench->add_option("--reps", reps, "repetitions per seed")->check(CLI::PositiveNumber);

  std::size_t instances = 50;
  auto* certify = app.add_subcommand("certify", "brute-force bound certificates on tiny instances");
  certify->add_option("--instances", instances, "number of instances")->check(CLI::PositiveNumber);
  certify->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out, seeds);
    if (*check) return cmd_check(seed);
    if (*bench) return cmd_bench(config, reps);
    if (*certify) return cmd_certify(instances, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
