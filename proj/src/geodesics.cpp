#include "simlab/geodesics.hpp"

#include <algorithm>
#include <cmath>

namespace simlab {

namespace {

// Dormand-Prince RK5(4)7M tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0}};
constexpr double kC[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr double kB5[7] = {35.0 / 384.0,     0.0,  500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0, 0.0};
constexpr double kB4[7] = {5179.0 / 57600.0, 0.0,           7571.0 / 16695.0, 393.0 / 640.0,
                           -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};

}  // namespace

StepOutcome integrate_adaptive(
    const OdeRhs& rhs, double t0, const Vec& y0, double t_end, const OdeOptions& opts,
    const std::function<bool(double, const Vec&, double, const Vec&)>& on_step,
    double* t_reached, Vec* y_reached) {
  const int n = static_cast<int>(y0.size());
  double t = t0;
  Vec y = y0;
  double h = std::min(opts.h_init, std::max(opts.h_min, t_end - t0));
  Vec k[7];
  k[0] = rhs(t, y);
  StepOutcome outcome = StepOutcome::ok;

  for (long step = 0; step < opts.max_steps; ++step) {
    if (t >= t_end) break;
    h = std::min({h, opts.h_max, t_end - t});
    if (h < opts.h_min) {
      outcome = StepOutcome::step_underflow;
      break;
    }

    for (int s = 1; s < 7; ++s) {
      Vec ys = y;
      for (int m = 0; m < s; ++m)
        if (kA[s][m] != 0.0) ys += h * kA[s][m] * k[m];
      k[s] = rhs(t + kC[s] * h, ys);
    }
    Vec y5 = y, err = Vec::Zero(n);
    for (int s = 0; s < 7; ++s) {
      if (kB5[s] != 0.0) y5 += h * kB5[s] * k[s];
      const double d = kB5[s] - kB4[s];
      if (d != 0.0) err += h * d * k[s];
    }

    double err_norm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
      err_norm = std::max(err_norm, std::abs(err(i)) / sc);
    }

    if (err_norm <= 1.0) {
      const double t_new = t + h;
      if (!on_step(t, y, t_new, y5)) {
        t = t_new;
        y = y5;
        break;
      }
      t = t_new;
      y = y5;
      k[0] = k[6];  // FSAL
    }
    const double fac = 0.9 * std::pow(std::max(err_norm, 1e-12), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
    if (step + 1 == opts.max_steps) outcome = StepOutcome::max_steps;
  }

  if (t_reached) *t_reached = t;
  if (y_reached) *y_reached = y;
  return outcome;
}

Vec integrate_to(const OdeRhs& rhs, double t0, const Vec& y0, double t_end,
                 const OdeOptions& opts) {
  Vec out;
  integrate_adaptive(rhs, t0, y0, t_end, opts,
                     [](double, const Vec&, double, const Vec&) { return true; }, nullptr, &out);
  return out;
}

namespace {

// Trial stages of an adaptive step may overshoot the chart; evaluating the
// connection at a clamped point keeps them finite without affecting the
// dynamics above the boundary cutoff (integration stops there).
Vec chart_clamped(const MetricField& field, Vec x) {
  if (field.has_boundary()) {
    const int ci = field.dim() - 1;
    x(ci) = std::max(x(ci), 1e-6);
    if (field.kind() == FieldKind::cone_sphere) x(0) = std::clamp(x(0), 1e-9, M_PI - 1e-9);
  }
  return x;
}

OdeRhs geodesic_rhs(const MetricField& field) {
  const int d = field.dim();
  return [&field, d](double, const Vec& y) {
    Vec x = chart_clamped(field, y.head(d));
    Vec v = y.tail(d);
    Christoffel G = field.christoffel_at(x);
    Vec dy(2 * d);
    dy.head(d) = v;
    for (int kk = 0; kk < d; ++kk) dy(d + kk) = -v.dot(G[kk] * v);
    return dy;
  };
}

double energy(const MetricField& field, const Vec& x, const Vec& v) {
  return v.dot(field.metric_at(x) * v);
}

// Bisection refinement of the crossing time of coordinate `ci` through
// `level` within one accepted step, re-integrating from the step start.
void refine_crossing(const OdeRhs& rhs, const OdeOptions& ode, int ci, double level, double t0,
                     const Vec& y0, double t1, double* t_hit, Vec* y_hit) {
  double lo = t0, hi = t1;
  Vec y_lo = y0;
  for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    OdeOptions sub = ode;
    sub.h_init = std::max((mid - lo) * 0.5, 1e-13);
    Vec y_mid = integrate_to(rhs, lo, y_lo, mid, sub);
    if (y_mid(ci) > level) {
      lo = mid;
      y_lo = y_mid;
    } else {
      hi = mid;
    }
  }
  *t_hit = lo;
  *y_hit = y_lo;
}

}  // namespace

GeodesicRecord integrate_geodesic(const MetricField& field, const Vec& x0, const Vec& v0,
                                  const IntegratorOptions& opts) {
  field.require_in_chart(x0);
  if (v0.norm() == 0.0) throw Error(Errc::domain_error, "geodesic needs a nonzero velocity");
  const int d = field.dim();
  const int ci = d - 1;  // boundary coordinate (z or t)
  const bool bounded = field.has_boundary();

  GeodesicRecord rec;
  Vec y0(2 * d);
  y0 << x0, v0;
  const double e0 = energy(field, x0, v0);

  auto rhs = geodesic_rhs(field);

  // Crossing levels for escape-time extrapolation: bisect the hitting times of
  // 2*cutoff and cutoff, estimate the escape time linearly from each, then
  // Richardson-combine. A start already below 2*cutoff falls back to the
  // single-level estimate.
  const double zc = opts.boundary_cutoff;
  const double level[2] = {2.0 * zc, zc};
  double cross_t[2] = {0, 0};
  Vec cross_y[2];
  int next_level = bounded && x0(ci) <= level[0] ? 1 : 0;
  const int first_level = next_level;

  double max_drift = 0.0;
  rec.samples.push_back({0.0, x0, v0});

  auto on_step = [&](double t_prev, const Vec& y_prev, double t_new, const Vec& y_new) {
    Vec x = y_new.head(d), v = y_new.tail(d);
    double e = energy(field, chart_clamped(field, x), v);
    max_drift = std::max(max_drift, std::abs(e - e0) / e0);
    if (static_cast<int>(rec.samples.size()) < opts.max_samples)
      rec.samples.push_back({t_new, x, v});

    if (bounded) {
      while (next_level < 2 && y_new(ci) <= level[next_level]) {
        refine_crossing(rhs, opts.ode, ci, level[next_level], t_prev, y_prev, t_new,
                        &cross_t[next_level], &cross_y[next_level]);
        ++next_level;
      }
      if (next_level == 2) return false;
      if (y_new(ci) >= field.boundary_max()) return false;  // censored upper exit
    }
    return true;
  };

  double t_final = 0.0;
  Vec y_final;
  StepOutcome so =
      integrate_adaptive(rhs, 0.0, y0, opts.t_max, opts.ode, on_step, &t_final, &y_final);

  rec.energy_drift = max_drift;
  Vec x_final = y_final.head(d), v_final = y_final.tail(d);
  if (rec.samples.empty() || rec.samples.back().t < t_final)
    rec.samples.push_back({t_final, x_final, v_final});

  if (bounded && next_level == 2) {
    rec.termination = Termination::boundary_escape;
    auto linear_estimate = [&](int li) {
      const double s = -cross_y[li](d + ci);
      return s > 0 ? cross_t[li] + level[li] / s : cross_t[li];
    };
    double est = linear_estimate(1);
    if (first_level == 0) {
      const double L0 = linear_estimate(0);
      est = (4.0 * est - L0) / 3.0;
    }
    rec.lifetime = {true, est};
  } else if (so == StepOutcome::step_underflow) {
    rec.termination = Termination::step_underflow;
    rec.lifetime = {false, t_final};
  } else {
    rec.termination = Termination::max_time;
    rec.lifetime = {false, t_final};
  }
  return rec;
}

LifetimeValue lifetime(const MetricField& field, const Vec& x0, const Vec& v0,
                       const IntegratorOptions& opts) {
  double e = energy(field, x0, v0);
  Vec v = v0 / std::sqrt(e);
  return integrate_geodesic(field, x0, v, opts).lifetime;
}

MuEstimate mu_estimate(const MetricField& field, const Vec& x, int n_samples,
                       const IntegratorOptions& opts, std::uint64_t seed) {
  if (n_samples < 1) throw Error(Errc::domain_error, "mu_estimate needs n_samples >= 1");
  field.require_in_chart(x);
  const int d = field.dim();
  Mat F = field.orthonormal_frame(x);

  std::vector<Vec> dirs;
  for (int i = 0; i < d; ++i) {
    dirs.push_back(Vec::Unit(d, i));
    dirs.push_back(-Vec::Unit(d, i));
  }
  if (d >= 2) {
    // mixed angles against the boundary direction, tangent component along e1
    for (double t : {M_PI / 2, M_PI / 4, M_PI / 6, M_PI / 12, M_PI / 18}) {
      Vec v = Vec::Zero(d);
      v(0) = std::cos(t);
      v(d - 1) = -std::sin(t);
      dirs.push_back(v);
    }
  }
  Rng rng(seed);
  while (static_cast<int>(dirs.size()) < n_samples) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
    double nn = v.norm();
    if (nn < 1e-12) continue;
    dirs.push_back(v / nn);
  }
  dirs.resize(n_samples);

  MuEstimate est;
  est.directions = dirs;
  for (int i = 0; i < n_samples; ++i) {
    Vec v = F * dirs[i];  // unit in g by construction
    LifetimeValue lt = integrate_geodesic(field, x, v, opts).lifetime;
    est.table.emplace_back(i, lt);
    if (lt.finite) {
      ++est.finite_count;
      est.value = std::max(est.value, lt.value);
    } else {
      ++est.censored;
    }
  }
  return est;
}

PiecewisePath rectangle_loop(const Vec& base, const Vec& center, int i, int j, double side_i,
                             double side_j) {
  Vec c0 = center, c1 = center, c2 = center, c3 = center;
  c0(i) -= side_i / 2;
  c0(j) -= side_j / 2;
  c1(i) += side_i / 2;
  c1(j) -= side_j / 2;
  c2(i) += side_i / 2;
  c2(j) += side_j / 2;
  c3(i) -= side_i / 2;
  c3(j) += side_j / 2;
  PiecewisePath p;
  if ((base - c0).norm() > 0.0) p.vertices.push_back(base);
  p.vertices.insert(p.vertices.end(), {c0, c1, c2, c3, c0});
  if ((base - c0).norm() > 0.0) p.vertices.push_back(base);
  return p;
}

FrameRecord parallel_transport(const MetricField& field, const PiecewisePath& path,
                               const Mat& frame0, const IntegratorOptions& opts) {
  if (path.vertices.size() < 2) throw Error(Errc::domain_error, "path needs at least 2 vertices");
  const int d = field.dim();
  const int m = static_cast<int>(frame0.cols());

  FrameRecord rec;
  Mat frame = frame0;
  double t_acc = 0.0;
  Mat g0 = field.metric_at(path.vertices.front());
  Mat gram0 = frame0.transpose() * g0 * frame0;
  rec.times.push_back(0.0);
  rec.points.push_back(path.vertices.front());
  rec.frames.push_back(frame0);

  for (size_t s = 0; s + 1 < path.vertices.size(); ++s) {
    const Vec a = path.vertices[s];
    const Vec b = path.vertices[s + 1];
    const Vec dx = b - a;
    if (dx.norm() == 0.0) continue;
    auto rhs = [&](double t, const Vec& y) {
      Vec p = chart_clamped(field, a + t * dx);
      Christoffel G = field.christoffel_at(p);
      Vec dy(d * m);
      for (int c = 0; c < m; ++c) {
        Vec v = y.segment(c * d, d);
        for (int kk = 0; kk < d; ++kk) dy(c * d + kk) = -dx.dot(G[kk] * v);
      }
      return dy;
    };
    Vec y0(d * m);
    for (int c = 0; c < m; ++c) y0.segment(c * d, d) = frame.col(c);
    Vec y1 = integrate_to(rhs, 0.0, y0, 1.0, opts.ode);
    for (int c = 0; c < m; ++c) frame.col(c) = y1.segment(c * d, d);
    t_acc += 1.0;
    rec.times.push_back(t_acc);
    rec.points.push_back(b);
    rec.frames.push_back(frame);
    Mat gram = frame.transpose() * field.metric_at(b) * frame;
    rec.gram_drift = std::max(rec.gram_drift, (gram - gram0).cwiseAbs().maxCoeff());
  }
  return rec;
}

}  // namespace simlab
