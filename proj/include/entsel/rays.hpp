// Transport rays extracted from an exact Kantorovich solution, and the
// measures / couplings restricted to thin cylinders around a ray.
#pragma once

#include <vector>

#include "entsel/exact_ot.hpp"
#include "entsel/instances.hpp"

namespace entsel {

/// Oriented segment from its upper end a (source side) to its lower end b
/// (target side) with u(a) - u(b) = |a - b|.
struct TransportRay {
  Vector upper;      // a
  Vector lower;      // b
  Vector direction;  // (a - b) / |a - b|
  std::vector<Index> source_indices;
  std::vector<Index> target_indices;
  double transverse_tol = 0.0;

  double length() const { return (upper - lower).norm(); }
};

struct RayDecomposition {
  std::vector<TransportRay> rays;
  double unassigned_source_mass = 0.0;
  double unassigned_target_mass = 0.0;
  // mu + nu mass left without a ray.
  double unassigned_mass = 0.0;

  bool covers(double tol = 1e-3) const { return unassigned_mass <= tol; }
};

struct RayOptions {
  double ray_tol = 1e-6;         // rate-function test for collinearity with u
  double transverse_tol = 0.0;   // distance to the segment; 0 picks cell_width / 4
  double support_threshold = 0;  // plan entries above this seed rays
};

/// Seeds are the support pairs of the exact plan. Seeds on a shared
/// supporting line with overlapping extent merge into one ray; the ends are
/// the support points extremizing u on that line. Each support point passing
/// the transverse and rate-function tests joins exactly one ray (nearest
/// line, lowest index on ties).
RayDecomposition extract_rays(const KantorovichSolution& sol, const LipschitzPotential& u,
                              const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const RayOptions& options = {});

struct RayProjection {
  double t = 0.0;           // arc length from the lower end, clamped to [0, length]
  double transverse = 0.0;  // distance to the on-segment foot point
};

RayProjection project_to_ray(const TransportRay& ray, const Vector& z);

enum class RaySide { source, target };

/// Normalized slice masses of one marginal along a ray, at the finest delta
/// of the schedule. Bins are centred on the arc-length parameters of the
/// ray's assigned points on that side.
struct RestrictedMeasure {
  TransportRay ray;
  RaySide side = RaySide::source;
  std::vector<double> params;  // ascending
  Vector weights;
  double delta = 0.0;             // finest delta used
  double convergence_l1 = 0.0;    // max L1 change between consecutive deltas
  double cylinder_mass = 0.0;     // raw mass mu(B_delta(S_R)) at the finest delta
};

RestrictedMeasure restrict_measure(const DiscreteMeasure& measure, const TransportRay& ray,
                                   RaySide side, const std::vector<double>& delta_schedule);

struct RestrictedCoupling {
  TransportRay ray;
  std::vector<double> source_params;
  std::vector<double> target_params;
  Matrix plan;                 // normalized to total mass 1
  double normalization = 0.0;  // raw mass pi(B_delta x B_delta)
  double delta = 0.0;
};

RestrictedCoupling restrict_coupling(const Coupling& pi, const TransportRay& ray, double delta,
                                     const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Bin edges shared by restrict_measure and restrict_coupling.
class RayBins {
 public:
  RayBins(const DiscreteMeasure& measure, const TransportRay& ray, RaySide side);

  const std::vector<double>& params() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t bin_of(double t) const;

 private:
  std::vector<double> params_;
  std::vector<double> edges_;
};

/// Ray with the line closest to the centre of the source domain (lowest
/// index on ties).
std::size_t central_ray(const RayDecomposition& rays, const Box& source_domain);

}  // namespace entsel
