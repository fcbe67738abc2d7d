// simlab - geodesic integration, lifetimes and parallel transport.

#pragma once

#include <vector>

#include "simlab/metric_field.hpp"
#include "simlab/ode.hpp"

namespace simlab {

struct IntegratorOptions {
  OdeOptions ode;
  double t_max = 10.0;
  double boundary_cutoff = 1e-4;  // lower chart cutoff on z (or t)
  int max_samples = 4096;         // recorded trajectory samples (thinned)
};

enum class Termination { max_time, boundary_escape, step_underflow };

// A lifetime is either a finite hitting time of the lower boundary or a
// censored value: "alive at `value`", never reported as finite.
struct LifetimeValue {
  bool finite = false;
  double value = 0.0;
};

struct GeodesicSample {
  double t;
  Vec x;
  Vec v;
};

struct GeodesicRecord {
  std::vector<GeodesicSample> samples;
  Termination termination = Termination::max_time;
  LifetimeValue lifetime;
  double energy_drift = 0.0;  // relative drift of g(v,v)
};

GeodesicRecord integrate_geodesic(const MetricField& field, const Vec& x0, const Vec& v0,
                                  const IntegratorOptions& opts = {});

// Lifetime of the half-geodesic tangent to v0 (normalized to unit g-length).
LifetimeValue lifetime(const MetricField& field, const Vec& x0, const Vec& v0,
                       const IntegratorOptions& opts = {});

struct MuEstimate {
  double value = 0.0;  // sup of the finite sampled lifetimes (0 if none)
  int censored = 0;
  int finite_count = 0;
  std::vector<std::pair<int, LifetimeValue>> table;  // direction index -> lifetime
  std::vector<Vec> directions;                       // frame coordinates, unit
};

// Samples unit directions at x: coordinate axes, a deterministic set of mixed
// Euclidean/boundary angles, then low-discrepancy filler up to n_samples.
MuEstimate mu_estimate(const MetricField& field, const Vec& x, int n_samples,
                       const IntegratorOptions& opts = {}, std::uint64_t seed = 1);

struct PiecewisePath {
  std::vector<Vec> vertices;  // straight coordinate segments between vertices
};

// Closed rectangle in the (i,j) coordinate plane, attached to base by a
// straight tail when the center differs from base.
PiecewisePath rectangle_loop(const Vec& base, const Vec& center, int i, int j, double side_i,
                             double side_j);

struct FrameRecord {
  std::vector<double> times;    // cumulative parameter
  std::vector<Vec> points;
  std::vector<Mat> frames;      // transported frame columns at each point
  double gram_drift = 0.0;      // max deviation of the g-Gram matrix
};

FrameRecord parallel_transport(const MetricField& field, const PiecewisePath& path,
                               const Mat& frame0, const IntegratorOptions& opts = {});

}  // namespace simlab
