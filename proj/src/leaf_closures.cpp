#include "simlab/leaf_closures.hpp"

#include <algorithm>
#include <cmath>

namespace simlab {

DensityReport density_from_projections(const std::vector<double>& projections, int orbit_points) {
  if (projections.size() < 2)
    throw Error(Errc::domain_error, "need at least two projections");
  DensityReport rep;
  rep.projections = projections;
  for (size_t i = 0; i < projections.size(); ++i)
    for (size_t j = i + 1; j < projections.size(); ++j)
      rep.pairwise_ratios.push_back(projections[i] / projections[j]);

  double tmin = 1e300;
  size_t imin = 0;
  for (size_t i = 0; i < projections.size(); ++i) {
    if (std::abs(projections[i]) < 1e-12)
      throw Error(Errc::degenerate_projection,
                  "lattice generator " + std::to_string(i) + " projects below 1e-12");
    if (std::abs(projections[i]) < tmin) {
      tmin = std::abs(projections[i]);
      imin = i;
    }
  }
  rep.min_abs_projection = tmin;

  // translation orbit of the remaining generators on the circle R / tmin Z
  std::vector<double> gens;
  for (size_t i = 0; i < projections.size(); ++i)
    if (i != imin) gens.push_back(std::abs(projections[i]));

  const int N = orbit_points;
  std::vector<double> pts;
  pts.reserve(N);
  if (gens.size() == 1) {
    double x = 0.0;
    for (int k = 0; k < N; ++k) {
      pts.push_back(x);
      x += gens[0];
      x = std::fmod(x, tmin);
    }
  } else {
    const int side = static_cast<int>(std::ceil(std::pow(static_cast<double>(N), 1.0 / gens.size())));
    std::vector<int> c(gens.size(), 0);
    while (static_cast<int>(pts.size()) < N) {
      double x = 0.0;
      for (size_t g = 0; g < gens.size(); ++g) x += c[g] * gens[g];
      pts.push_back(std::fmod(x, tmin));
      size_t g = 0;
      while (g < gens.size()) {
        if (++c[g] < side) break;
        c[g] = 0;
        ++g;
      }
      if (g == gens.size()) break;
    }
  }
  rep.orbit_points = static_cast<int>(pts.size());
  std::sort(pts.begin(), pts.end());
  double max_gap = tmin - pts.back() + pts.front();
  for (size_t i = 0; i + 1 < pts.size(); ++i) max_gap = std::max(max_gap, pts[i + 1] - pts[i]);
  rep.max_gap_normalized = max_gap / tmin;
  rep.gap_threshold = 10.0 / rep.orbit_points;
  rep.dense = rep.max_gap_normalized < rep.gap_threshold;
  return rep;
}

DensityReport unstable_projections(const SpectralSplit& split, int orbit_points) {
  const int q = split.q();
  Mat E(q + 1, q + 1);
  E.leftCols(q) = split.stable_basis;
  E.col(q) = split.unstable_basis;
  Mat Einv = E.inverse();
  std::vector<double> taus;
  for (int m = 0; m <= q; ++m) taus.push_back(Einv(q, m));
  return density_from_projections(taus, orbit_points);
}

ClosureReport closure_analyze(const MetricField& field, const Vec& base, int orbit_points) {
  if (field.kind() != FieldKind::mapping_torus)
    throw Error(Errc::domain_error, "closure analysis applies to mapping tori");
  field.require_in_chart(base);

  const auto& split = field.split();
  const int q = split.q();
  const int d = field.dim();
  const double lambda = split.lambda;

  ClosureReport rep;
  rep.base = base;
  rep.q = q;

  // reduce the slice level into the fundamental window (lambda, 1]
  double z = base(d - 1);
  while (z > 1.0) z *= lambda;
  while (z <= lambda) z /= lambda;
  rep.z_level = z;

  // The closure is the (q+1)-torus slice at this level; its induced metric in
  // adapted coordinates is the constant diag(I_q, phi(z)).
  rep.d = q + 1;
  rep.bounds_ok = (q < rep.d) && (rep.d < q + 2);

  Vec p0 = base;
  p0(d - 1) = z;
  Mat g0 = field.metric_at(p0).topLeftCorner(q + 1, q + 1);
  rep.slice_metric = g0;

  // constancy of the induced metric over the slice
  double residual = 0.0;
  Rng rng(0xC105EDull);
  for (int s = 0; s < 64; ++s) {
    Vec p = p0;
    for (int i = 0; i < q + 1; ++i) p(i) = rng.uniform(-2.0, 2.0);
    Mat g = field.metric_at(p).topLeftCorner(q + 1, q + 1);
    residual = std::max(residual, (g - g0).cwiseAbs().maxCoeff());
  }
  rep.metric_constancy_residual = residual;
  rep.flat = residual < 1e-12;

  rep.density = unstable_projections(split, orbit_points);
  rep.covering_radius_stat = rep.density.max_gap_normalized;
  return rep;
}

double slice_similarity_residual(const MetricField& field, double z0) {
  if (field.kind() != FieldKind::mapping_torus)
    throw Error(Errc::domain_error, "slice similarity applies to mapping tori");
  const auto& split = field.split();
  const int q = split.q();
  const int d = field.dim();
  const double lambda = split.lambda;

  const DeckElement& phi = *field.deck().phi;
  Mat D = phi.linear.topLeftCorner(q + 1, q + 1);

  Vec p0 = Vec::Zero(d);
  p0(d - 1) = z0;
  Vec p1 = Vec::Zero(d);
  p1(d - 1) = lambda * z0;
  Mat g0 = field.metric_at(p0).topLeftCorner(q + 1, q + 1);
  Mat g1 = field.metric_at(p1).topLeftCorner(q + 1, q + 1);
  return (D.transpose() * g1 * D - lambda * lambda * g0).cwiseAbs().maxCoeff();
}

}  // namespace simlab
