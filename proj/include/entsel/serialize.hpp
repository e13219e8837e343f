// JSON documents for ray decompositions and Schrodinger solutions.
#pragma once

#include <json.hpp>

#include "entsel/rays.hpp"
#include "entsel/selection.hpp"

namespace entsel {

nlohmann::json to_json(const TransportRay& ray);
nlohmann::json to_json(const RayDecomposition& rays);
nlohmann::json to_json(const SchrodingerSolution& sol);

}  // namespace entsel
