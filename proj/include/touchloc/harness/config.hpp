#pragma once

#include <touchloc/action.hpp>
#include <touchloc/actions.hpp>
#include <touchloc/policy.hpp>
#include <touchloc/sensing.hpp>

#include <yaml-cpp/yaml.h>

#include <array>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace touchloc::harness {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error("config: " + what) {}
};

/// Everything one `run` needs. Defaults reproduce the desk-scale setup.
struct ExperimentConfig {
  std::string scene = "drill-like";  // drill-like | door-like | path to .obj
  bool table = true;                 // support plane under the drill-like scene
  Pose sensed{0.0, 0.0, 0.0, 0.0};
  Pose truth_offset{0.015, -0.015, -0.01, 0.05};
  std::array<double, 4> prior_variance{0.0009, 0.0009, 0.0009, 0.01};
  std::size_t particles = 300;

  ActionSetConfig actions{3, 10, 42, 5, {}, 0.5, 0.05, 0.05, 0.15, 3.0};

  std::vector<SelectorKind> metrics{SelectorKind::kIG, SelectorKind::kHP, SelectorKind::kWHP,
                                    SelectorKind::kRandom, SelectorKind::kHuman};
  double d_t = 0.2;
  double sigma = 0.1;
  bool ig_squared = false;
  double obs_spacing = 0.1;
  int nocontact_multiplicity = 1;
  double noise_sigma = 0.05;
  double regularizer = 1e-12;
  std::string baseline_update = "whp";  // weighting used by random / human

  std::string termination = "budget";  // budget | mass | entropy
  double termination_value = 5.0;

  bool resample = true;
  double jitter_fraction = 0.1;  // of the prior std-dev, per dimension
  double kernel_bandwidth = 0.0;

  bool lazy = false;
  bool wall_clock = true;
  int threads = 1;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string output_dir = "out";

  WeightingModel weighting_for(SelectorKind k) const {
    switch (k) {
      case SelectorKind::kHP: return WeightingModel::hp(d_t);
      case SelectorKind::kWHP: return WeightingModel::whp(sigma);
      case SelectorKind::kIG: return WeightingModel::ig(sigma, ig_squared);
      default: break;
    }
    return baseline_update == "hp" ? WeightingModel::hp(d_t) : WeightingModel::whp(sigma);
  }

  TerminationRule termination_rule() const {
    if (termination == "budget") return TerminationRule::budget(static_cast<int>(termination_value));
    if (termination == "mass") return TerminationRule::mass_target(termination_value);
    if (termination == "entropy") return TerminationRule::entropy_target(termination_value);
    throw ConfigError("unknown termination '" + termination + "'");
  }

  std::array<double, 4> jitter_std() const {
    std::array<double, 4> j{};
    for (int k = 0; k < 4; ++k) j[static_cast<std::size_t>(k)] = jitter_fraction * std::sqrt(prior_variance[static_cast<std::size_t>(k)]);
    return j;
  }
};

namespace detail {

inline std::vector<double> read_numbers(const YAML::Node& n, const std::string& key, std::size_t count) {
  if (!n.IsSequence() || n.size() != count) {
    throw ConfigError(key + " must be a list of " + std::to_string(count) + " numbers");
  }
  std::vector<double> v;
  for (const auto& e : n) v.push_back(e.as<double>());
  return v;
}

inline Pose read_pose(const YAML::Node& n, const std::string& key) {
  const auto v = read_numbers(n, key, 4);
  return Pose{v[0], v[1], v[2], v[3]};
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key + " must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key + ": cannot read '" + n.Scalar() + "'");
  }
}

}  // namespace detail

inline void validate(const ExperimentConfig& c);

/// Parses a flat YAML mapping. Unknown keys and malformed values throw.
inline ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(e.what());
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("top level must be a key-value mapping");
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    using detail::scalar;
    if (key == "scene") c.scene = scalar<std::string>(v, key);
    else if (key == "table") c.table = scalar<bool>(v, key);
    else if (key == "sensed_pose") c.sensed = detail::read_pose(v, key);
    else if (key == "truth_offset") c.truth_offset = detail::read_pose(v, key);
    else if (key == "prior_variance") {
      const auto p = detail::read_numbers(v, key, 4);
      for (std::size_t k = 0; k < 4; ++k) c.prior_variance[k] = p[k];
    } else if (key == "particles") c.particles = scalar<std::size_t>(v, key);
    else if (key == "actions_human") c.actions.human = scalar<int>(v, key);
    else if (key == "actions_sphere") c.actions.sphere = scalar<int>(v, key);
    else if (key == "actions_normal") c.actions.normal = scalar<int>(v, key);
    else if (key == "actions_table") c.actions.table = scalar<int>(v, key);
    else if (key == "speed") c.actions.motion.speed = scalar<double>(v, key);
    else if (key == "fixed_time") c.actions.motion.fixed_time = scalar<double>(v, key);
    else if (key == "sphere_radius") c.actions.sphere_radius = scalar<double>(v, key);
    else if (key == "inplane_max") c.actions.inplane_max = scalar<double>(v, key);
    else if (key == "start_margin") c.actions.margin = scalar<double>(v, key);
    else if (key == "table_scatter") c.actions.table_scatter = scalar<double>(v, key);
    else if (key == "probe_length") c.actions.probe_length = scalar<double>(v, key);
    else if (key == "metrics") {
      if (!v.IsSequence()) throw ConfigError("metrics must be a list");
      c.metrics.clear();
      for (const auto& m : v) {
        try {
          c.metrics.push_back(parse_selector(m.as<std::string>()));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
    } else if (key == "d_t") c.d_t = scalar<double>(v, key);
    else if (key == "sigma") c.sigma = scalar<double>(v, key);
    else if (key == "ig_squared") c.ig_squared = scalar<bool>(v, key);
    else if (key == "obs_spacing") c.obs_spacing = scalar<double>(v, key);
    else if (key == "nocontact_multiplicity") c.nocontact_multiplicity = scalar<int>(v, key);
    else if (key == "noise_sigma") c.noise_sigma = scalar<double>(v, key);
    else if (key == "regularizer") c.regularizer = scalar<double>(v, key);
    else if (key == "baseline_update") c.baseline_update = scalar<std::string>(v, key);
    else if (key == "termination") c.termination = scalar<std::string>(v, key);
    else if (key == "termination_value") c.termination_value = scalar<double>(v, key);
    else if (key == "resample") c.resample = scalar<bool>(v, key);
    else if (key == "jitter_fraction") c.jitter_fraction = scalar<double>(v, key);
    else if (key == "kernel_bandwidth") c.kernel_bandwidth = scalar<double>(v, key);
    else if (key == "lazy") c.lazy = scalar<bool>(v, key);
    else if (key == "wall_clock") c.wall_clock = scalar<bool>(v, key);
    else if (key == "threads") c.threads = scalar<int>(v, key);
    else if (key == "seeds") {
      if (!v.IsSequence() || v.size() == 0) throw ConfigError("seeds must be a non-empty list");
      c.seeds.clear();
      for (const auto& s : v) c.seeds.push_back(s.as<std::uint64_t>());
    } else if (key == "output_dir") c.output_dir = scalar<std::string>(v, key);
    else throw ConfigError("unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline void validate(const ExperimentConfig& c) {
  if (c.particles == 0) throw ConfigError("particles must be positive");
  for (double v : c.prior_variance)
    if (!(v > 0.0)) throw ConfigError("prior_variance entries must be positive");
  if (c.actions.human < 0 || c.actions.sphere < 0 || c.actions.normal < 0 || c.actions.table < 0) {
    throw ConfigError("action counts must be non-negative");
  }
  if (c.actions.human + c.actions.sphere + c.actions.normal + c.actions.table == 0) {
    throw ConfigError("action set is empty");
  }
  if (!(c.actions.motion.speed > 0.0)) throw ConfigError("speed must be positive");
  if (c.actions.motion.fixed_time < 0.0) throw ConfigError("fixed_time must be non-negative");
  if (!(c.d_t > 0.0) || !(c.sigma > 0.0)) throw ConfigError("d_t and sigma must be positive");
  if (!(c.obs_spacing > 0.0)) throw ConfigError("obs_spacing must be positive");
  if (c.nocontact_multiplicity < 1) throw ConfigError("nocontact_multiplicity must be at least 1");
  if (c.noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
  if (c.baseline_update != "hp" && c.baseline_update != "whp") throw ConfigError("baseline_update must be hp or whp");
  if (c.jitter_fraction < 0.0) throw ConfigError("jitter_fraction must be non-negative");
  if (c.kernel_bandwidth < 0.0 || c.kernel_bandwidth >= 1.0) throw ConfigError("kernel_bandwidth must lie in [0, 1)");
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  if (c.metrics.empty()) throw ConfigError("metrics must not be empty");
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  try {
    (void)c.termination_rule();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace touchloc::harness
