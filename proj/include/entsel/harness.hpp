// End-to-end experiments. Each returns derived tables and the pass/fail
// checks it is responsible for; solver outputs are never modified.
#pragma once

#include <string>
#include <vector>

#include "entsel/config.hpp"
#include "entsel/entropic.hpp"
#include "entsel/exact_ot.hpp"
#include "entsel/rays.hpp"
#include "entsel/report.hpp"

namespace entsel {

/// Everything the scenario experiments share: the discretized instance, its
/// exact solution and rays, and one warm-started sweep over
/// config.selection_schedule() (the cost-gap schedule is its prefix).
struct Pipeline {
  ExperimentConfig config;
  std::string instance;
  DiscreteMeasure mu;
  DiscreteMeasure nu;
  Matrix cost;
  KantorovichSolution exact;
  LipschitzPotential u;
  RayDecomposition rays;
  std::size_t central = 0;
  SweepResult sweep;
};

enum class SweepScope { none, cost_gap, full };

Pipeline build_pipeline(const ExperimentConfig& config, SweepScope scope = SweepScope::full);

struct ExperimentResult {
  std::vector<Table> tables;
  std::vector<CriterionResult> checks;
  std::vector<std::string> notes;
};

ExperimentResult run_duality_suite(const ExperimentConfig& config);
ExperimentResult run_cost_gap(const Pipeline& p);
ExperimentResult run_concentration(const Pipeline& p);
ExperimentResult run_selection(const Pipeline& p);
ExperimentResult run_schrodinger_check(const ExperimentConfig& config);
ExperimentResult run_discrete_oracle(const ExperimentConfig& config);
ExperimentResult run_c_round_trip(const Pipeline& p);

/// Single-command views used by the CLI.
Table solve_table(const Pipeline& p, double eps);
ExperimentResult rays_tables(const Pipeline& p);

/// All experiments, criteria numbered 1-7.
Report run_verify(const ExperimentConfig& config);

/// Least-squares line y = slope x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace entsel
