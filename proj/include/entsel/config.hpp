// Experiment configuration: JSON schema with strict key checking, a
// canonical serialization and the hashes that name output files.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entsel/entropic.hpp"
#include "entsel/instances.hpp"

namespace entsel {

struct RayConfig {
  double ray_tol = 1e-6;
  double transverse_tol_cells = 0.25;
  double decomposition_tol = 1e-3;
  std::vector<double> delta_cells{4.0, 2.0, 1.0};
};

struct SelectionConfig {
  // Appended to eps_schedule for the selection experiment.
  std::vector<double> extra_eps{0.0125, 0.00625};
  // Also append the smallest eps allowed by the resolution guard.
  bool include_min_eps = true;
  double coupling_delta_cells = 4.0;
  std::vector<double> omega_cells{4.0, 8.0};
  bool estimate_c = false;  // false: use c_value
  double c_value = 0.0;
  double guard_cells = 2.0;
};

struct DualitySuiteConfig {
  int instances = 20;
  int max_points = 64;
  int max_dim = 3;
  std::vector<double> eps{1.0, 0.5, 0.25, 0.1, 0.05};
};

struct DiscreteOracleConfig {
  std::vector<double> eps{1.0, 0.5, 0.2, 0.1, 0.05, 0.005, 0.002, 0.001};
};

struct ExperimentConfig {
  Scenario scenario;
  nlohmann::json scenario_json;  // as given: a builtin name or an inline object
  std::vector<int> grid{32};
  std::vector<double> eps_schedule{0.2, 0.1, 0.05, 0.025};
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  SinkhornOptions sinkhorn;
  RayConfig rays;
  SelectionConfig selection;
  double theta = 0.05;
  DualitySuiteConfig duality_suite;
  DiscreteOracleConfig discrete_oracle;

  GridSpec grid_spec() const;
  /// Largest cell width of the discretized marginals.
  double cell_width() const;
  /// eps_schedule, then the selection extension (still strictly decreasing).
  std::vector<double> selection_schedule() const;
};

ExperimentConfig default_config();

/// Unknown keys and malformed values raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Checks schedules and the resolution guard.
void validate(const ExperimentConfig& config);

/// Every setting that influences results, with sorted keys. The output
/// directory is excluded so relocated runs hash identically.
nlohmann::json canonical_json(const ExperimentConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);

/// Hash of canonical_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
/// Hash of the scenario and grid only.
std::string instance_hash(const ExperimentConfig& config);

Scenario scenario_from_json(const nlohmann::json& j);

}  // namespace entsel
