// entsel: command-line driver for the experiments.
#include <algorithm>
#include <cstdint>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entsel/harness.hpp"
#include "entsel/selection.hpp"
#include "entsel/serialize.hpp"

using namespace entsel;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config_path;
  std::vector<double> eps;
  std::string grid;
  double tol = 0.0;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string scenario;
};

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("--grid: cannot parse '" + text + "'");
    }
  }
  return out;
}

ExperimentConfig resolve(const Overrides& o, bool eps_is_schedule) {
  json j = json::object();
  if (!o.config_path.empty()) {
    const auto base = load_config(o.config_path);
    j = canonical_json(base);
    j["output_dir"] = base.output_dir;
  }
  if (!o.scenario.empty()) j["scenario"] = o.scenario;
  if (!o.grid.empty()) j["grid"] = parse_grid(o.grid);
  if (!o.eps.empty()) {
    // solve takes eps values in any order; they still pass the schedule checks.
    std::vector<double> eps = o.eps;
    if (!eps_is_schedule) {
      std::sort(eps.begin(), eps.end(), std::greater<>());
      eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
    }
    j["eps_schedule"] = eps;
  }
  if (o.tol > 0.0) j["sinkhorn"]["tol"] = o.tol;
  if (!o.out.empty()) j["output_dir"] = o.out;
  if (o.seed_set) j["seed"] = o.seed;
  return config_from_json(j);
}

void print_checks(const Report& r) {
  for (const auto& c : r.criteria) {
    std::cout << (c.passed ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": "
              << c.detail << "\n";
  }
}

int emit(Report& report, const ExperimentConfig& config) {
  report.hash = config_hash(config);
  for (const auto& path : emit_report(report, config.output_dir)) {
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

void write_document(const json& doc, const std::string& stem, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  const auto path =
      std::filesystem::path(config.output_dir) / (stem + "-" + config_hash(config) + ".json");
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2) << "\n";
  if (!out) throw Error("write failed for '" + path.string() + "'");
  std::cout << "wrote " << path.string() << "\n";
}

void absorb(Report& report, ExperimentResult&& r) {
  for (auto& t : r.tables) report.tables.push_back(std::move(t));
  for (auto& c : r.checks) report.criteria.push_back(std::move(c));
  for (auto& n : r.notes) report.notes.push_back(std::move(n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropic optimal transport: small-eps selection experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--eps", o.eps, "eps value(s); a schedule for sweep/select/verify")
      ->delimiter(',');
  app.add_option("--grid", o.grid, "cells per axis: n or n1,n2,...");
  app.add_option("--tol", o.tol, "Sinkhorn marginal tolerance (L1)");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "random seed")->each([&](const std::string&) { o.seed_set = true; });
  app.add_option("--scenario", o.scenario, "builtin scenario name");

  auto* solve = app.add_subcommand("solve", "exact solve and one entropic solve");
  auto* sweep = app.add_subcommand("sweep", "eps sweep: cost gap and concentration tables");
  auto* rays = app.add_subcommand("rays", "exact solve and transport-ray decomposition");
  auto* select = app.add_subcommand("select", "per-ray comparison with the Schrodinger limit");
  auto* verify = app.add_subcommand("verify", "all experiments and acceptance checks");
  auto* report = app.add_subcommand("report", "summarize the JSON tables in --out");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*report) {
      const std::string dir = o.out.empty() ? resolve(o, true).output_dir : o.out;
      Report r;
      r.experiment = "report";
      r.tables = load_tables(dir);
      r.hash = hex64(fnv1a(to_markdown(r)));
      std::cout << to_markdown(r);
      return 0;
    }

    const ExperimentConfig config = resolve(o, !*solve);
    if (*verify) {
      Report r = run_verify(config);
      print_checks(r);
      for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
      emit(r, config);
      return r.all_passed() ? 0 : 1;
    }

    Report r;
    if (*solve) {
      r.experiment = "solve";
      const Pipeline p = build_pipeline(config, SweepScope::none);
      const std::vector<double> eps = o.eps.empty() ? std::vector<double>{config.eps_schedule.back()}
                                                    : o.eps;
      Table t;
      for (double e : eps) {
        Table one = solve_table(p, e);
        if (t.columns.empty()) {
          t = std::move(one);
        } else {
          for (auto& row : one.rows) t.add_row(std::move(row));
        }
      }
      r.tables.push_back(std::move(t));
    } else if (*sweep) {
      r.experiment = "sweep";
      const Pipeline p = build_pipeline(config, SweepScope::cost_gap);
      absorb(r, run_cost_gap(p));
      absorb(r, run_concentration(p));
    } else if (*rays) {
      r.experiment = "rays";
      const Pipeline p = build_pipeline(config, SweepScope::none);
      absorb(r, rays_tables(p));
      write_document(to_json(p.rays), "ray_decomposition", config);
    } else if (*select) {
      r.experiment = "select";
      const Pipeline p = build_pipeline(config, SweepScope::full);
      absorb(r, run_selection(p));
      absorb(r, run_c_round_trip(p));
      if (!p.rays.rays.empty()) {
        const auto& ray = p.rays.rays[p.central];
        std::vector<double> deltas;
        for (double c : config.rays.delta_cells) deltas.push_back(c * config.cell_width());
        const auto limit =
            solve_schrodinger_1d(restrict_measure(p.mu, ray, RaySide::source, deltas),
                                 restrict_measure(p.nu, ray, RaySide::target, deltas),
                                 p.mu.dim(), config.selection.c_value);
        json doc = to_json(limit);
        doc["ray"] = p.central;
        write_document(doc, "schrodinger_central", config);
      }
    }
    print_checks(r);
    for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
    emit(r, config);
    return r.all_passed() ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
