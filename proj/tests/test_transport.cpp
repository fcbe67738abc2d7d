#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "simlab/geodesics.hpp"
#include "simlab/presets.hpp"

using namespace simlab;

namespace {

Vec point3(double x, double y, double z) {
  Vec p(3);
  p << x, y, z;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("transport");

TEST_CASE("vertical line toward the boundary is a geodesic with lifetime z0") {
  MetricField mn = make_preset("mn-q1");
  Vec x0 = point3(0, 0, 1);
  Vec v0 = point3(0, 0, -1);
  GeodesicRecord rec = integrate_geodesic(mn, x0, v0);
  CHECK(rec.termination == Termination::boundary_escape);
  REQUIRE(rec.lifetime.finite);
  CHECK(rec.lifetime.value == doctest::Approx(1.0).epsilon(1e-6));
  // the trajectory is the straight line z(t) = 1 - t
  for (const auto& s : rec.samples) {
    CHECK(std::abs(s.x(0)) < 1e-12);
    CHECK(std::abs(s.x(1)) < 1e-12);
    CHECK(s.x(2) == doctest::Approx(1.0 - s.t).epsilon(1e-9));
  }
  CHECK(rec.energy_drift < 1e-8);
}

TEST_CASE("upward vertical geodesic is censored at the horizon") {
  MetricField mn = make_preset("mn-q1");
  IntegratorOptions opts;
  opts.t_max = 10.0;
  GeodesicRecord rec = integrate_geodesic(mn, point3(0, 0, 1), point3(0, 0, 1), opts);
  CHECK(rec.termination == Termination::max_time);
  CHECK(!rec.lifetime.finite);
  CHECK(rec.lifetime.value >= 10.0 - 1e-9);
}

TEST_CASE("flat torus geodesics run straight forever") {
  MetricField flat = MetricField::flat_torus(3);
  IntegratorOptions opts;
  opts.t_max = 5.0;
  Vec v0 = point3(0.6, 0.8, 0.0);
  GeodesicRecord rec = integrate_geodesic(flat, point3(0, 0, 0), v0, opts);
  CHECK(rec.termination == Termination::max_time);
  CHECK(!rec.lifetime.finite);
  const auto& last = rec.samples.back();
  CHECK((last.x - last.t * v0).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("lifetime of the vertical direction from z0 = 0.5") {
  MetricField mn = make_preset("mn-q1");
  LifetimeValue lt = lifetime(mn, point3(0, 0, 0.5), point3(0, 0, -1));
  REQUIRE(lt.finite);
  CHECK(lt.value == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("product splitting: mixed directions scale the lifetime by 1/sin") {
  MetricField mn = make_preset("mn-q1");
  Vec x0 = point3(0, 0, 1);
  for (double t : {M_PI / 2, M_PI / 4, M_PI / 6, M_PI / 12}) {
    Vec v = point3(std::cos(t), 0, -std::sin(t));  // unit: metric is identity at z=1
    LifetimeValue lt = lifetime(mn, x0, v, {});
    REQUIRE(lt.finite);
    CHECK(lt.value * std::sin(t) == doctest::Approx(1.0).epsilon(1e-4));
  }
  // t = pi/6 gives lifetime 2, the classical product computation
  LifetimeValue lt = lifetime(mn, x0, point3(std::cos(M_PI / 6), 0, -std::sin(M_PI / 6)), {});
  REQUIRE(lt.finite);
  CHECK(lt.value == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("gluing map rescales finite lifetimes by its ratio") {
  MetricField mn = make_preset("mn-q1");
  const auto& deck = *mn.deck().phi;
  const double lam = mn.split().lambda;

  Vec x0 = point3(0.2, 0.1, 1.0);
  std::vector<Vec> dirs = {point3(0, 0, -1), point3(std::cos(M_PI / 6), 0, -std::sin(M_PI / 6)),
                           point3(std::cos(M_PI / 4), 0, -std::sin(M_PI / 4))};
  for (const Vec& v : dirs) {
    LifetimeValue a = lifetime(mn, x0, v, {});
    REQUIRE(a.finite);
    // push the initial condition through the gluing map; velocities transform
    // by the differential
    Vec x1 = deck.apply(x0);
    Vec v1 = deck.linear * v;
    LifetimeValue b = lifetime(mn, x1, v1, {});
    REQUIRE(b.finite);
    CHECK(b.value == doctest::Approx(lam * a.value).epsilon(1e-6));
  }
}

TEST_CASE("reversibility: integrate out and back") {
  MetricField mn = make_preset("mn-q1");
  Vec x0 = point3(0.1, -0.2, 1.3);
  Vec v0 = point3(0.4, 0.5, -0.3);
  double e = v0.dot(mn.metric_at(x0) * v0);
  v0 /= std::sqrt(e);

  IntegratorOptions opts;
  opts.t_max = 0.8;
  GeodesicRecord fwd = integrate_geodesic(mn, x0, v0, opts);
  REQUIRE(fwd.termination == Termination::max_time);
  const auto& end = fwd.samples.back();
  GeodesicRecord back = integrate_geodesic(mn, end.x, Vec(-end.v), opts);
  const auto& ret = back.samples.back();
  CHECK((ret.x - x0).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((ret.v + v0).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("energy conservation across integrations") {
  MetricField mn = make_preset("mn-q1");
  Rng rng(5);
  IntegratorOptions opts;
  opts.t_max = 2.0;
  for (int i = 0; i < 10; ++i) {
    Vec x0 = point3(rng.uniform(-1, 1), rng.uniform(-1, 1), std::exp(rng.uniform(-0.5, 0.5)));
    Vec v0 = point3(rng.normal(), rng.normal(), rng.normal());
    v0 /= std::sqrt(v0.dot(mn.metric_at(x0) * v0));
    GeodesicRecord rec = integrate_geodesic(mn, x0, v0, opts);
    CHECK(rec.energy_drift < 1e-8);
  }
}

TEST_CASE("mu estimate: flat torus has no finite lifetimes") {
  MetricField flat = MetricField::flat_torus(3);
  IntegratorOptions opts;
  opts.t_max = 3.0;
  MuEstimate est = mu_estimate(flat, point3(0, 0, 0), 16, opts, 1);
  CHECK(est.value == 0.0);
  CHECK(est.finite_count == 0);
  CHECK(est.censored == 16);
}

TEST_CASE("mu estimate includes the steep mixed angles") {
  MetricField mn = make_preset("mn-q1");
  IntegratorOptions opts;
  opts.t_max = 8.0;
  MuEstimate est = mu_estimate(mn, point3(0, 0, 1), 24, opts, 1);
  CHECK(est.finite_count > 0);
  CHECK(est.censored > 0);
  CHECK(est.value >= 1.0 / std::sin(M_PI / 18) - 1e-3);  // ~5.759
}

TEST_CASE("mu estimates at glued base points scale by the ratio") {
  MetricField mn = make_preset("mn-q1");
  const auto& deck = *mn.deck().phi;
  const double lam = mn.split().lambda;
  IntegratorOptions opts;
  opts.t_max = 12.0;
  Vec x0 = point3(0.1, 0.3, 1.0);
  MuEstimate a = mu_estimate(mn, x0, 20, opts, 1);
  MuEstimate b = mu_estimate(mn, deck.apply(x0), 20, opts, 1);
  REQUIRE(a.finite_count > 0);
  REQUIRE(b.finite_count > 0);
  CHECK(b.value == doctest::Approx(lam * a.value).epsilon(1e-4));
}

TEST_CASE("parallel transport: identity on flat loops and product directions") {
  MetricField flat = MetricField::flat_torus(3);
  Vec base = point3(0, 0, 0);
  Mat F = flat.orthonormal_frame(base);
  PiecewisePath loop = rectangle_loop(base, base, 0, 1, 0.4, 0.4);
  FrameRecord rec = parallel_transport(flat, loop, F);
  CHECK((rec.frames.back() - F).cwiseAbs().maxCoeff() < 1e-10);

  MetricField mn = make_preset("mn-q1");
  Vec b2 = point3(0, 0, 1);
  Mat F2 = mn.orthonormal_frame(b2);
  PiecewisePath seg;
  seg.vertices = {b2, point3(0.7, 0, 1)};  // straight run along a torus direction
  FrameRecord rec2 = parallel_transport(mn, seg, F2);
  CHECK((rec2.frames.back() - F2).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(rec2.gram_drift < 1e-8);
}

TEST_CASE("small rectangles rotate the frame by curvature times area") {
  MetricField mn = make_preset("mn-q1");
  Vec base = point3(0, 0, 1);
  Mat F = mn.orthonormal_frame(base);

  auto angle_for = [&](double a) {
    PiecewisePath loop = rectangle_loop(base, base, 1, 2, a, a);
    FrameRecord rec = parallel_transport(mn, loop, F);
    Mat H = F.transpose() * mn.metric_at(base) * rec.frames.back();
    Eigen::Matrix2d R = H.block<2, 2>(1, 1);
    return oracles::rotation_angle(R);
  };

  for (double a : {0.1, 0.05}) {
    // oracle: the g-area integral of K over the rectangle
    const double expected = oracles::integrate2d(
        [&](double, double z) {
          Vec p = point3(0, 0, z);
          return mn.sectional(p, 1, 2) * std::sqrt(mn.phi().eval(z));
        },
        -a / 2, a / 2, 1 - a / 2, 1 + a / 2);
    const double got = angle_for(a);
    CHECK(std::abs(std::abs(got) - std::abs(expected)) < 0.05 * std::abs(expected));
  }
}

TEST_CASE("transported frames keep their Gram matrix") {
  MetricField s2 = make_cone({ConeBase::Kind::sphere, 2.0});
  Vec base(3);
  base << 1.3, 0.7, 1.0;
  Mat F = s2.orthonormal_frame(base);
  PiecewisePath loop = rectangle_loop(base, base, 0, 1, 0.3, 0.3);
  FrameRecord rec = parallel_transport(s2, loop, F);
  CHECK(rec.gram_drift < 1e-8);
}

TEST_CASE("domain errors") {
  MetricField mn = make_preset("mn-q1");
  CHECK_THROWS_AS(integrate_geodesic(mn, point3(0, 0, -1), point3(0, 0, 1)), Error);
  CHECK_THROWS_AS(integrate_geodesic(mn, point3(0, 0, 1), point3(0, 0, 0)), Error);
}

TEST_SUITE_END();
