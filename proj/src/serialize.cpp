#include "entsel/serialize.hpp"

#include <vector>

#include "entsel/report.hpp"

namespace entsel {

using nlohmann::json;

namespace {

json numbers(const Vector& v) {
  json out = json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back(round12(v[k]));
  return out;
}

json numbers(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(round12(x));
  return out;
}

}  // namespace

json to_json(const TransportRay& ray) {
  return {{"upper", numbers(ray.upper)},
          {"lower", numbers(ray.lower)},
          {"direction", numbers(ray.direction)},
          {"length", round12(ray.length())},
          {"transverse_tol", round12(ray.transverse_tol)},
          {"source_indices", ray.source_indices},
          {"target_indices", ray.target_indices}};
}

json to_json(const RayDecomposition& rays) {
  json list = json::array();
  for (const auto& r : rays.rays) list.push_back(to_json(r));
  return {{"rays", std::move(list)},
          {"unassigned_source_mass", round12(rays.unassigned_source_mass)},
          {"unassigned_target_mass", round12(rays.unassigned_target_mass)},
          {"unassigned_mass", round12(rays.unassigned_mass)}};
}

json to_json(const SchrodingerSolution& sol) {
  json plan = json::array();
  for (Index i = 0; i < sol.plan.rows(); ++i) plan.push_back(numbers(Vector(sol.plan.row(i))));
  return {{"dim", sol.dim},
          {"c", round12(sol.c)},
          {"source_params", numbers(sol.source_params)},
          {"target_params", numbers(sol.target_params)},
          {"source_weights", numbers(sol.source_weights)},
          {"target_weights", numbers(sol.target_weights)},
          {"f", numbers(sol.ff)},
          {"g", numbers(sol.gg)},
          {"plan", std::move(plan)},
          {"residual", round12(sol.residual)},
          {"iterations", sol.iterations},
          {"converged", sol.converged}};
}

}  // namespace entsel
