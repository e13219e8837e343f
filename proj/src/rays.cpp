#include "entsel/rays.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace entsel {

namespace {

struct SeedGroup {
  Vector origin;
  Vector dir;  // unit, source -> target
  double tmin = 0.0;
  double tmax = 0.0;
  std::vector<Index> sources;
  std::vector<Index> targets;
};

double line_distance(const Vector& z, const Vector& origin, const Vector& dir) {
  const Vector d = z - origin;
  return (d - d.dot(dir) * dir).norm();
}

void push_unique(std::vector<Index>& v, Index k) {
  if (std::find(v.begin(), v.end(), k) == v.end()) v.push_back(k);
}

}  // namespace

RayProjection project_to_ray(const TransportRay& ray, const Vector& z) {
  const double len = ray.length();
  RayProjection p;
  p.t = std::clamp((z - ray.lower).dot(ray.direction), 0.0, len);
  p.transverse = (z - (ray.lower + p.t * ray.direction)).norm();
  return p;
}

RayDecomposition extract_rays(const KantorovichSolution& sol, const LipschitzPotential& u,
                              const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const RayOptions& options) {
  const Matrix& plan = sol.coupling.plan;
  const Index n = mu.size();
  const Index m = nu.size();
  if (plan.rows() != n || plan.cols() != m) throw Error("extract_rays: plan/measure size mismatch");
  const double tol = options.transverse_tol > 0.0
                         ? options.transverse_tol
                         : 0.25 * std::max(mu.cell_width, nu.cell_width);
  const Vector& us = u.u_source();
  const Vector& ut = u.u_target();
  auto rate = [&](Index i, Index j) {
    return (mu.points.row(i) - nu.points.row(j)).norm() - us[i] + ut[j];
  };

  // Seed groups: support pairs sharing a line and overlapping in extent.
  std::vector<SeedGroup> groups;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (!(plan(i, j) > options.support_threshold)) continue;
      const Vector x = mu.points.row(i).transpose();
      const Vector y = nu.points.row(j).transpose();
      const double len = (y - x).norm();
      if (len == 0.0) throw Error("extract_rays: coincident source and target support points");
      const Vector d = (y - x) / len;
      bool merged = false;
      for (auto& g : groups) {
        if (d.dot(g.dir) <= 0.0) continue;
        if (line_distance(x, g.origin, g.dir) > tol || line_distance(y, g.origin, g.dir) > tol) {
          continue;
        }
        const double tx = (x - g.origin).dot(g.dir);
        const double ty = (y - g.origin).dot(g.dir);
        if (std::max(tx, ty) < g.tmin - tol || std::min(tx, ty) > g.tmax + tol) continue;
        g.tmin = std::min({g.tmin, tx, ty});
        g.tmax = std::max({g.tmax, tx, ty});
        push_unique(g.sources, i);
        push_unique(g.targets, j);
        merged = true;
        break;
      }
      if (!merged) {
        SeedGroup g;
        g.origin = x;
        g.dir = d;
        g.tmin = 0.0;
        g.tmax = len;
        g.sources = {i};
        g.targets = {j};
        groups.push_back(std::move(g));
      }
    }
  }
  if (groups.empty()) throw Error("extract_rays: the transport plan has no support");

  RayDecomposition out;
  std::vector<Index> upper_idx;
  std::vector<Index> lower_idx;
  for (const auto& g : groups) {
    // Provisional ends from the seeds, then extension along the line to any
    // support point that still passes the rate test.
    Index a = g.sources.front();
    for (Index i : g.sources) {
      if (us[i] > us[a] || (us[i] == us[a] && i < a)) a = i;
    }
    Index b = g.targets.front();
    for (Index j : g.targets) {
      if (ut[j] < ut[b] || (ut[j] == ut[b] && j < b)) b = j;
    }
    const Index a0 = a;
    const Index b0 = b;
    for (Index i = 0; i < n; ++i) {
      if (us[i] <= us[a]) continue;
      if (line_distance(mu.points.row(i).transpose(), g.origin, g.dir) > tol) continue;
      if (rate(i, b0) <= options.ray_tol) a = i;
    }
    for (Index j = 0; j < m; ++j) {
      if (ut[j] >= ut[b]) continue;
      if (line_distance(nu.points.row(j).transpose(), g.origin, g.dir) > tol) continue;
      if (rate(a0, j) <= options.ray_tol) b = j;
    }
    TransportRay ray;
    ray.upper = mu.points.row(a).transpose();
    ray.lower = nu.points.row(b).transpose();
    const double len = (ray.upper - ray.lower).norm();
    if (len == 0.0) throw Error("extract_rays: degenerate ray");
    ray.direction = (ray.upper - ray.lower) / len;
    ray.transverse_tol = tol;
    out.rays.push_back(std::move(ray));
    upper_idx.push_back(a);
    lower_idx.push_back(b);
  }

  // Assignment: nearest admissible ray, lowest index on ties.
  const std::size_t R = out.rays.size();
  for (Index i = 0; i < n; ++i) {
    const Vector z = mu.points.row(i).transpose();
    std::size_t best = R;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < R; ++r) {
      const double d = project_to_ray(out.rays[r], z).transverse;
      if (d > tol || !(d < best_d)) continue;
      if (rate(i, lower_idx[r]) > options.ray_tol) continue;
      best = r;
      best_d = d;
    }
    if (best == R) {
      out.unassigned_source_mass += mu.weights[i];
    } else {
      out.rays[best].source_indices.push_back(i);
    }
  }
  for (Index j = 0; j < m; ++j) {
    const Vector z = nu.points.row(j).transpose();
    std::size_t best = R;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < R; ++r) {
      const double d = project_to_ray(out.rays[r], z).transverse;
      if (d > tol || !(d < best_d)) continue;
      if (rate(upper_idx[r], j) > options.ray_tol) continue;
      best = r;
      best_d = d;
    }
    if (best == R) {
      out.unassigned_target_mass += nu.weights[j];
    } else {
      out.rays[best].target_indices.push_back(j);
    }
  }
  out.unassigned_mass = out.unassigned_source_mass + out.unassigned_target_mass;
  return out;
}

RayBins::RayBins(const DiscreteMeasure& measure, const TransportRay& ray, RaySide side) {
  const auto& idx = side == RaySide::source ? ray.source_indices : ray.target_indices;
  if (idx.empty()) throw Error("RayBins: ray has no assigned points on this side");
  std::vector<double> t;
  t.reserve(idx.size());
  for (Index k : idx) t.push_back(project_to_ray(ray, measure.points.row(k).transpose()).t);
  std::sort(t.begin(), t.end());
  const double merge = 1e-9 * std::max(1.0, ray.length());
  for (double v : t) {
    if (params_.empty() || v - params_.back() > merge) params_.push_back(v);
  }
  for (std::size_t k = 1; k < params_.size(); ++k) {
    edges_.push_back(0.5 * (params_[k - 1] + params_[k]));
  }
}

std::size_t RayBins::bin_of(double t) const {
  return static_cast<std::size_t>(std::upper_bound(edges_.begin(), edges_.end(), t) -
                                  edges_.begin());
}

RestrictedMeasure restrict_measure(const DiscreteMeasure& measure, const TransportRay& ray,
                                   RaySide side, const std::vector<double>& delta_schedule) {
  if (delta_schedule.empty()) throw ConfigError("restrict_measure: empty delta schedule");
  std::vector<double> deltas = delta_schedule;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  if (deltas.back() < 0.5 * measure.cell_width || deltas.back() < ray.transverse_tol) {
    std::ostringstream os;
    os << "restrict_measure: delta " << deltas.back()
       << " is below half a cell or the ray's transverse tolerance";
    throw ConfigError(os.str());
  }

  const RayBins bins(measure, ray, side);
  std::vector<RayProjection> proj(static_cast<std::size_t>(measure.size()));
  for (Index k = 0; k < measure.size(); ++k) {
    proj[static_cast<std::size_t>(k)] = project_to_ray(ray, measure.points.row(k).transpose());
  }

  RestrictedMeasure out;
  out.ray = ray;
  out.side = side;
  out.params = bins.params();
  Vector previous;
  for (double delta : deltas) {
    Vector w = Vector::Zero(static_cast<Index>(bins.size()));
    for (Index k = 0; k < measure.size(); ++k) {
      const auto& p = proj[static_cast<std::size_t>(k)];
      if (p.transverse <= delta) w[static_cast<Index>(bins.bin_of(p.t))] += measure.weights[k];
    }
    const double mass = w.sum();
    if (!(mass > 0.0)) throw Error("restrict_measure: cylinder carries no mass");
    out.cylinder_mass = mass;
    w /= mass;
    if (previous.size() > 0) {
      out.convergence_l1 = std::max(out.convergence_l1, (w - previous).cwiseAbs().sum());
    }
    previous = w;
    out.delta = delta;
  }
  out.weights = previous;
  return out;
}

RestrictedCoupling restrict_coupling(const Coupling& pi, const TransportRay& ray, double delta,
                                     const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const double cell = std::max(mu.cell_width, nu.cell_width);
  if (!(delta >= 0.5 * cell)) {
    throw ConfigError("restrict_coupling: delta " + std::to_string(delta) +
                      " is below half a cell (" + std::to_string(0.5 * cell) + ")");
  }
  const RayBins sb(mu, ray, RaySide::source);
  const RayBins tb(nu, ray, RaySide::target);
  std::vector<Index> srow;
  std::vector<Index> sbin;
  for (Index i = 0; i < mu.size(); ++i) {
    const auto p = project_to_ray(ray, mu.points.row(i).transpose());
    if (p.transverse <= delta) {
      srow.push_back(i);
      sbin.push_back(static_cast<Index>(sb.bin_of(p.t)));
    }
  }
  std::vector<Index> tcol;
  std::vector<Index> tbin;
  for (Index j = 0; j < nu.size(); ++j) {
    const auto p = project_to_ray(ray, nu.points.row(j).transpose());
    if (p.transverse <= delta) {
      tcol.push_back(j);
      tbin.push_back(static_cast<Index>(tb.bin_of(p.t)));
    }
  }

  RestrictedCoupling out;
  out.ray = ray;
  out.delta = delta;
  out.source_params = sb.params();
  out.target_params = tb.params();
  out.plan = Matrix::Zero(static_cast<Index>(sb.size()), static_cast<Index>(tb.size()));
  for (std::size_t q = 0; q < tcol.size(); ++q) {
    for (std::size_t p = 0; p < srow.size(); ++p) {
      out.plan(sbin[p], tbin[q]) += pi.plan(srow[p], tcol[q]);
    }
  }
  out.normalization = out.plan.sum();
  if (!(out.normalization > 0.0)) throw Error("restrict_coupling: cylinder carries no mass");
  out.plan /= out.normalization;
  return out;
}

std::size_t central_ray(const RayDecomposition& rays, const Box& source_domain) {
  if (rays.rays.empty()) throw Error("central_ray: no rays");
  const int d = source_domain.dim();
  Vector centre(d);
  for (int k = 0; k < d; ++k) centre[k] = 0.5 * (source_domain.low[k] + source_domain.high[k]);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rays.rays.size(); ++r) {
    const auto& ray = rays.rays[r];
    if (ray.lower.size() != d) throw Error("central_ray: dimension mismatch");
    const double dist = line_distance(centre, ray.lower, ray.direction);
    if (dist < best_d - 1e-12) {
      best = r;
      best_d = dist;
    }
  }
  return best;
}

}  // namespace entsel
