#include "entsel/config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace entsel {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void maybe(const json& j, const std::string& key, const std::string& where, T& out) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

DensitySpec density_from_json(const json& j, const std::string& where) {
  DensitySpec d;
  if (j.is_string()) {
    if (j.get<std::string>() != "uniform") throw ConfigError(where + ": unknown density");
    return d;
  }
  check_keys(j, {"kind", "terms", "shape", "values"}, where);
  const auto kind = get<std::string>(j, "kind", where);
  if (kind == "uniform") {
    d.kind = DensitySpec::Kind::uniform;
  } else if (kind == "polynomial") {
    d.kind = DensitySpec::Kind::polynomial;
    for (const auto& t : j.at("terms")) {
      check_keys(t, {"coeff", "powers"}, where + ".terms");
      d.terms.push_back({get<double>(t, "coeff", where), get<std::vector<int>>(t, "powers", where)});
    }
  } else if (kind == "tabulated") {
    d.kind = DensitySpec::Kind::tabulated;
    d.table_shape = get<std::vector<int>>(j, "shape", where);
    d.table_values = get<std::vector<double>>(j, "values", where);
  } else {
    throw ConfigError(where + ": unknown density kind '" + kind + "'");
  }
  return d;
}

Box box_from_json(const json& j, const std::string& where) {
  return {get<std::vector<double>>(j, "low", where), get<std::vector<double>>(j, "high", where)};
}

std::vector<double> checked_positive(std::vector<double> v, const std::string& where) {
  for (double x : v) {
    if (!(x > 0.0)) throw ConfigError(where + ": values must be positive");
  }
  return v;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  if (j.is_string()) return builtin_scenario(j.get<std::string>());
  const std::string where = "scenario";
  check_keys(j, {"name", "dim", "source", "target"}, where);
  std::string name = j.contains("name") ? get<std::string>(j, "name", where) : "inline";
  const int dim = get<int>(j, "dim", where);
  const json& s = j.at("source");
  const json& t = j.at("target");
  check_keys(s, {"low", "high", "density"}, where + ".source");
  check_keys(t, {"low", "high", "density"}, where + ".target");
  DensitySpec ds;
  DensitySpec dt;
  if (s.contains("density")) ds = density_from_json(s.at("density"), where + ".source.density");
  if (t.contains("density")) dt = density_from_json(t.at("density"), where + ".target.density");
  Scenario sc = make_scenario(std::move(name), box_from_json(s, where + ".source"),
                              box_from_json(t, where + ".target"), ds, dt);
  if (sc.dim != dim) throw ConfigError("scenario: dim does not match the boxes");
  return sc;
}

GridSpec ExperimentConfig::grid_spec() const {
  if (grid.size() == 1) return GridSpec::uniform(scenario.dim, grid.front());
  GridSpec g;
  g.per_axis_counts = grid;
  return g;
}

double ExperimentConfig::cell_width() const {
  if (scenario.tied_discrete) return kAtomicCellWidth;
  const GridSpec g = grid_spec();
  double h = 0.0;
  for (int a = 0; a < scenario.dim; ++a) {
    h = std::max(h, scenario.source_domain.width(a) / g.per_axis_counts[a]);
    h = std::max(h, scenario.target_domain.width(a) / g.per_axis_counts[a]);
  }
  return h;
}

std::vector<double> ExperimentConfig::selection_schedule() const {
  // Extensions below the resolution guard are dropped.
  const double floor_eps = 4.0 * cell_width() * cell_width();
  std::vector<double> out = eps_schedule;
  for (double e : selection.extra_eps) {
    if (e < out.back() && e >= floor_eps) out.push_back(e);
  }
  if (selection.include_min_eps && floor_eps < out.back()) out.push_back(floor_eps);
  return out;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.scenario_json = "translated-squares-2d";
  c.scenario = builtin_scenario("translated-squares-2d");
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  const std::string w = "config";
  check_keys(j, {"scenario", "grid", "eps_schedule", "output_dir", "seed", "sinkhorn", "rays",
                 "selection", "concentration", "duality_suite", "discrete_oracle"},
             w);
  ExperimentConfig c = default_config();
  if (j.contains("scenario")) {
    c.scenario_json = j.at("scenario");
    c.scenario = scenario_from_json(c.scenario_json);
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    c.grid = g.is_number() ? std::vector<int>{g.get<int>()} : get<std::vector<int>>(j, "grid", w);
  }
  maybe(j, "eps_schedule", w, c.eps_schedule);
  maybe(j, "output_dir", w, c.output_dir);
  maybe(j, "seed", w, c.seed);
  if (j.contains("sinkhorn")) {
    const json& s = j.at("sinkhorn");
    check_keys(s, {"tol", "max_iter"}, "sinkhorn");
    maybe(s, "tol", "sinkhorn", c.sinkhorn.tol);
    maybe(s, "max_iter", "sinkhorn", c.sinkhorn.max_iter);
  }
  if (j.contains("rays")) {
    const json& r = j.at("rays");
    check_keys(r, {"ray_tol", "transverse_tol_cells", "decomposition_tol", "delta_cells"}, "rays");
    maybe(r, "ray_tol", "rays", c.rays.ray_tol);
    maybe(r, "transverse_tol_cells", "rays", c.rays.transverse_tol_cells);
    maybe(r, "decomposition_tol", "rays", c.rays.decomposition_tol);
    maybe(r, "delta_cells", "rays", c.rays.delta_cells);
  }
  if (j.contains("selection")) {
    const json& s = j.at("selection");
    const std::string ws = "selection";
    check_keys(s, {"extra_eps", "include_min_eps", "coupling_delta_cells", "omega_cells", "c",
                   "guard_cells"},
               ws);
    maybe(s, "extra_eps", ws, c.selection.extra_eps);
    maybe(s, "include_min_eps", ws, c.selection.include_min_eps);
    maybe(s, "coupling_delta_cells", ws, c.selection.coupling_delta_cells);
    maybe(s, "omega_cells", ws, c.selection.omega_cells);
    maybe(s, "guard_cells", ws, c.selection.guard_cells);
    if (s.contains("c")) {
      const json& cv = s.at("c");
      if (cv.is_string()) {
        if (cv.get<std::string>() != "estimate") {
          throw ConfigError("selection.c: expected a number or \"estimate\"");
        }
        c.selection.estimate_c = true;
      } else {
        c.selection.estimate_c = false;
        c.selection.c_value = get<double>(s, "c", ws);
      }
    }
  }
  if (j.contains("concentration")) {
    const json& s = j.at("concentration");
    check_keys(s, {"theta"}, "concentration");
    maybe(s, "theta", "concentration", c.theta);
  }
  if (j.contains("duality_suite")) {
    const json& s = j.at("duality_suite");
    const std::string ws = "duality_suite";
    check_keys(s, {"instances", "max_points", "max_dim", "eps"}, ws);
    maybe(s, "instances", ws, c.duality_suite.instances);
    maybe(s, "max_points", ws, c.duality_suite.max_points);
    maybe(s, "max_dim", ws, c.duality_suite.max_dim);
    maybe(s, "eps", ws, c.duality_suite.eps);
  }
  if (j.contains("discrete_oracle")) {
    const json& s = j.at("discrete_oracle");
    check_keys(s, {"eps"}, "discrete_oracle");
    maybe(s, "eps", "discrete_oracle", c.discrete_oracle.eps);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig& c) {
  auto decreasing = [](const std::vector<double>& v, const std::string& what) {
    if (v.empty()) throw ConfigError(what + ": empty schedule");
    checked_positive(v, what);
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (!(v[k] < v[k - 1])) throw ConfigError(what + ": schedule must be strictly decreasing");
    }
  };
  decreasing(c.eps_schedule, "eps_schedule");
  decreasing(c.duality_suite.eps, "duality_suite.eps");
  decreasing(c.discrete_oracle.eps, "discrete_oracle.eps");
  if (c.grid.empty()) throw ConfigError("grid: empty");
  if (c.grid.size() != 1 && static_cast<int>(c.grid.size()) != c.scenario.dim) {
    throw ConfigError("grid: give one count or one per axis");
  }
  for (int g : c.grid) {
    if (g < 2) throw ConfigError("grid: counts must be at least 2 per axis");
  }
  if (!(c.sinkhorn.tol > 0.0) || c.sinkhorn.max_iter < 1) {
    throw ConfigError("sinkhorn: tol and max_iter must be positive");
  }
  checked_positive(c.rays.delta_cells, "rays.delta_cells");
  checked_positive(c.selection.omega_cells, "selection.omega_cells");
  checked_positive(c.selection.extra_eps, "selection.extra_eps");
  if (!(c.selection.coupling_delta_cells > 0.0)) {
    throw ConfigError("selection.coupling_delta_cells must be positive");
  }
  if (!(c.theta > 0.0)) throw ConfigError("concentration.theta must be positive");
  if (c.duality_suite.instances < 0 || c.duality_suite.max_points < 2 ||
      c.duality_suite.max_dim < 1) {
    throw ConfigError("duality_suite: invalid sizes");
  }

  const double h = c.cell_width();
  const double floor_eps = 4.0 * h * h;
  if (c.eps_schedule.back() < floor_eps) {
    std::ostringstream os;
    os << "eps_schedule: " << c.eps_schedule.back()
       << " is below the resolution guard; minimum admissible eps is " << floor_eps;
    throw ConfigError(os.str());
  }
}

json canonical_json(const ExperimentConfig& c) {
  // nlohmann's default object type keeps keys sorted.
  json j;
  j["scenario"] = c.scenario_json;
  j["grid"] = c.grid;
  j["eps_schedule"] = c.eps_schedule;
  j["seed"] = c.seed;
  j["sinkhorn"] = {{"tol", c.sinkhorn.tol}, {"max_iter", c.sinkhorn.max_iter}};
  j["rays"] = {{"ray_tol", c.rays.ray_tol},
               {"transverse_tol_cells", c.rays.transverse_tol_cells},
               {"decomposition_tol", c.rays.decomposition_tol},
               {"delta_cells", c.rays.delta_cells}};
  json sel = {{"extra_eps", c.selection.extra_eps},
              {"include_min_eps", c.selection.include_min_eps},
              {"coupling_delta_cells", c.selection.coupling_delta_cells},
              {"omega_cells", c.selection.omega_cells},
              {"guard_cells", c.selection.guard_cells}};
  if (c.selection.estimate_c) {
    sel["c"] = "estimate";
  } else {
    sel["c"] = c.selection.c_value;
  }
  j["selection"] = sel;
  j["concentration"] = {{"theta", c.theta}};
  j["duality_suite"] = {{"instances", c.duality_suite.instances},
                        {"max_points", c.duality_suite.max_points},
                        {"max_dim", c.duality_suite.max_dim},
                        {"eps", c.duality_suite.eps}};
  j["discrete_oracle"] = {{"eps", c.discrete_oracle.eps}};
  return j;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string config_hash(const ExperimentConfig& config) {
  return hex64(fnv1a(canonical_json(config).dump()));
}

std::string instance_hash(const ExperimentConfig& config) {
  const json j = {{"scenario", config.scenario_json}, {"grid", config.grid}};
  return hex64(fnv1a(j.dump()));
}

}  // namespace entsel
