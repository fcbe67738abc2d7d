#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "simlab/holonomy.hpp"
#include "simlab/presets.hpp"

using namespace simlab;

namespace {

Vec point3(double x, double y, double z) {
  Vec p(3);
  p << x, y, z;
  return p;
}

Mat rot2_embedded(int d, int i, int j, double angle) {
  Mat R = Mat::Identity(d, d);
  R(i, i) = std::cos(angle);
  R(j, j) = std::cos(angle);
  R(i, j) = -std::sin(angle);
  R(j, i) = std::sin(angle);
  return R;
}

Mat random_orthogonal(int d, Rng& rng) {
  Mat A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(A);
  Mat Q = qr.householderQ();
  return Q;
}

}  // namespace

TEST_SUITE_BEGIN("holonomy");

TEST_CASE("flat torus loops transport to the identity") {
  MetricField flat = MetricField::flat_torus(3);
  Vec base = point3(0.2, 0.3, 0.4);
  double defect = 0.0;
  Mat H = loop_holonomy(flat, base, {base, 0, 1, 0.4, 0.4}, {}, &defect);
  CHECK((H - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(defect < 1e-10);
}

TEST_CASE("product directions give identity holonomy") {
  MetricField mn = make_preset("mn-q1");
  Vec base = point3(0, 0, 1);
  Mat H = loop_holonomy(mn, base, {base, 0, 2, 0.2, 0.2}, {});
  CHECK((H - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
  Mat H2 = loop_holonomy(mn, base, {base, 0, 1, 0.2, 0.2}, {});
  CHECK((H2 - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("curved-plane rectangles rotate by about curvature times area") {
  MetricField mn = make_preset("mn-q1");
  Vec base = point3(0, 0, 1);
  const double a = 0.1;
  Mat H = loop_holonomy(mn, base, {base, 1, 2, a, a}, {});
  // block structure: the first coordinate is untouched
  CHECK(std::abs(H(0, 0) - 1.0) < 1e-9);
  CHECK(H.row(0).tail(2).cwiseAbs().maxCoeff() < 1e-8);
  Eigen::Matrix2d R = H.block<2, 2>(1, 1);
  const double angle = oracles::rotation_angle(R);
  const double expected = oracles::integrate2d(
      [&](double, double z) {
        return mn.sectional(point3(0, 0, z), 1, 2) * std::sqrt(mn.phi().eval(z));
      },
      -a / 2, a / 2, 1 - a / 2, 1 + a / 2);
  CHECK(std::abs(std::abs(angle) - std::abs(expected)) < 0.03 * std::abs(expected));
}

TEST_CASE("holonomy samples are orthogonal and reproducible") {
  MetricField mn = make_preset("mn-q1");
  Vec base = point3(0.05, 0, 0.7);
  HolonomySample s1 = sample_holonomy(mn, base, 30, {0.2, 0.1}, 99);
  HolonomySample s2 = sample_holonomy(mn, base, 30, {0.2, 0.1}, 99);
  REQUIRE(s1.matrices.size() == s2.matrices.size());
  for (size_t i = 0; i < s1.matrices.size(); ++i) {
    CHECK((s1.matrices[i] - s2.matrices[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s1.residuals[i] < 1e-6);
  }
  REQUIRE(s1.loops.size() >= 12);
}

TEST_CASE("invariant split: identity family is one fixed block") {
  std::vector<Mat> mats{Mat::Identity(4, 4)};
  auto res = invariant_split(mats);
  REQUIRE(res.blocks.size() == 1);
  CHECK(res.blocks[0].fixed);
  CHECK(res.blocks[0].dim() == 4);
}

TEST_CASE("invariant split: plane rotations leave their axis") {
  std::vector<Mat> mats;
  for (double t : {0.3, 0.7, 1.1}) mats.push_back(rot2_embedded(3, 0, 1, t));
  auto res = invariant_split(mats);
  REQUIRE(res.blocks.size() == 2);
  CHECK(res.blocks[0].fixed);
  CHECK(res.blocks[0].dim() == 1);
  CHECK(!res.blocks[1].fixed);
  CHECK(res.blocks[1].dim() == 2);
  Mat axis(3, 1);
  axis << 0, 0, 1;
  CHECK(principal_angle(res.blocks[0].basis, axis) < 1e-10);
}

TEST_CASE("invariant split recovers planted blocks across 100 seeds") {
  struct Plan {
    std::vector<int> dims;
    bool first_fixed;
  };
  const std::vector<Plan> plans = {{{1, 2}, true}, {{2, 2}, false}, {{1, 3}, true}};
  for (const auto& plan : plans) {
    int d = 0;
    for (int dim : plan.dims) d += dim;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Rng rng(seed * 7919 + d);
      Mat Q = random_orthogonal(d, rng);
      std::vector<Mat> mats;
      for (int rep = 0; rep < 4; ++rep) {
        Mat H = Mat::Identity(d, d);
        int off = 0;
        for (size_t b = 0; b < plan.dims.size(); ++b) {
          const int dim = plan.dims[b];
          const bool fixed = plan.first_fixed && b == 0;
          if (!fixed && dim >= 2) {
            // rotation in the leading pair of the block, then a second
            // generator in the trailing pair for dim 3
            double ang = rng.uniform(0.3, 1.2) + 0.31 * b;
            H.block(off, off, dim, dim) *= rot2_embedded(dim, 0, 1, ang);
            if (dim >= 3 && rep % 2 == 1)
              H.block(off, off, dim, dim) *= rot2_embedded(dim, dim - 2, dim - 1,
                                                           rng.uniform(0.3, 1.2));
          }
          off += dim;
        }
        mats.push_back(Q * H * Q.transpose());
      }
      auto res = invariant_split(mats);
      REQUIRE(res.blocks.size() == plan.dims.size());
      // match recovered blocks to planted column groups by dimension
      int off = 0;
      std::vector<Mat> planted;
      for (int dim : plan.dims) {
        planted.push_back(Q.middleCols(off, dim));
        off += dim;
      }
      for (const auto& blk : res.blocks) {
        double best = 1e9;
        for (const auto& P : planted)
          if (P.cols() == blk.dim()) best = std::min(best, principal_angle(blk.basis, P));
        CHECK(best < 1e-6);
      }
    }
  }
}

TEST_CASE("invariant split is idempotent on its blocks") {
  std::vector<Mat> mats;
  Rng rng(31);
  Mat Q = random_orthogonal(4, rng);
  for (double t : {0.4, 0.9}) {
    Mat H = Mat::Identity(4, 4);
    H.block<2, 2>(0, 0) = rot2_embedded(2, 0, 1, t);
    H.block<2, 2>(2, 2) = rot2_embedded(2, 0, 1, 2.1 * t + 0.2);
    mats.push_back(Q * H * Q.transpose());
  }
  auto res = invariant_split(mats);
  REQUIRE(res.blocks.size() == 2);
  for (const auto& blk : res.blocks) {
    std::vector<Mat> sub;
    for (const auto& H : mats) sub.push_back(blk.basis.transpose() * H * blk.basis);
    auto again = invariant_split(sub);
    REQUIRE(again.blocks.size() == 1);
    CHECK(again.blocks[0].dim() == blk.dim());
  }
}

TEST_CASE("invariant split commutes with conjugation") {
  std::vector<Mat> mats;
  for (double t : {0.5, 1.3}) mats.push_back(rot2_embedded(3, 1, 2, t));
  Rng rng(17);
  Mat Q = random_orthogonal(3, rng);
  std::vector<Mat> conj;
  for (const auto& H : mats) conj.push_back(Q * H * Q.transpose());
  auto a = invariant_split(mats);
  auto b = invariant_split(conj);
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (size_t i = 0; i < a.blocks.size(); ++i)
    CHECK(principal_angle(Mat(Q * a.blocks[i].basis), b.blocks[i].basis) < 1e-8);
}

TEST_CASE("gray-zone singular values refuse a verdict") {
  // rotation by ~4e-5: the stacked residual lands inside [tol, 10 tol]
  std::vector<Mat> mats{rot2_embedded(3, 0, 1, 4e-5)};
  CHECK_THROWS_AS(invariant_split(mats, 1e-5), Error);
  try {
    invariant_split(mats, 1e-5);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::tolerance_ambiguity);
  }
}

TEST_CASE("classification of the four reference spaces") {
  SUBCASE("flat torus") {
    Trichotomy t = classify(MetricField::flat_torus(3));
    CHECK(t.verdict == Verdict::flat);
    CHECK(t.flat_dim == 3);
  }
  SUBCASE("mapping torus splits as euclidean times a curved plane") {
    Trichotomy t = classify(make_preset("mn-q1"));
    CHECK(t.verdict == Verdict::euclidean_times_irreducible);
    CHECK(t.flat_dim == 1);
    CHECK(t.irreducible_dim == 2);
    CHECK(t.finite_lifetime_found);
  }
  SUBCASE("cone over the round sphere of radius 2") {
    Trichotomy t = classify(make_cone({ConeBase::Kind::sphere, 2.0}));
    CHECK(t.verdict == Verdict::irreducible);
    CHECK(t.irreducible_dim == 3);
  }
  SUBCASE("cone over the unit sphere") {
    Trichotomy t = classify(make_cone({ConeBase::Kind::sphere, 1.0}));
    CHECK(t.verdict == Verdict::flat);
  }
}

TEST_CASE("verdict is stable under loop-scale refinement") {
  MetricField mn = make_preset("mn-q1");
  for (double s : {0.1, 0.05, 0.025}) {
    ClassifyOptions opts;
    opts.scales = {s};
    Trichotomy t = classify(mn, opts);
    CHECK(t.verdict == Verdict::euclidean_times_irreducible);
    CHECK(t.flat_dim == 1);
    CHECK(t.irreducible_dim == 2);
  }
}

TEST_SUITE_END();
