// simlab - leaf closures of the stable foliation: torus slices, flat induced
// metrics, and density of the unstable lattice projections.

#pragma once

#include <vector>

#include "simlab/metric_field.hpp"

namespace simlab {

struct DensityReport {
  std::vector<double> projections;      // unstable coordinates of the lattice generators
  std::vector<double> pairwise_ratios;  // projections[i] / projections[j], i < j
  double min_abs_projection = 0.0;
  int orbit_points = 0;
  double max_gap_normalized = 0.0;  // largest orbit gap / circle length
  double gap_threshold = 0.0;       // 10 / N
  bool dense = false;
};

// Projects the standard lattice generators onto the unstable line along the
// stable subspace and simulates the translation orbit on the circle of length
// |smallest projection|. Throws DegenerateProjection when a generator
// projects below 1e-12.
DensityReport unstable_projections(const SpectralSplit& split, int orbit_points = 100000);

// Density report for explicitly given projections (fixture support).
DensityReport density_from_projections(const std::vector<double>& projections, int orbit_points);

struct ClosureReport {
  Vec base;
  int q = 0;
  int d = 0;  // closure dimension
  double z_level = 0.0;            // slice level reduced to the fundamental window
  Mat slice_metric;                // induced metric, constant over the slice
  double metric_constancy_residual = 0.0;
  bool flat = false;
  bool bounds_ok = false;          // q < d < q + 2
  double covering_radius_stat = 0.0;
  DensityReport density;
};

ClosureReport closure_analyze(const MetricField& field, const Vec& base, int orbit_points = 100000);

// Residual of the similarity relating the slice at z0 to the slice at
// lambda z0: (D phi)^T g(lambda z0) (D phi) - lambda^2 g(z0) on the slice.
double slice_similarity_residual(const MetricField& field, double z0);

}  // namespace simlab
