#include "simlab/holonomy.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace simlab {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::flat: return "Flat";
    case Verdict::irreducible: return "Irreducible";
    case Verdict::euclidean_times_irreducible: return "EuclideanTimesIrreducible";
    case Verdict::unclassified: return "Unclassified";
  }
  return "Unclassified";
}

Mat loop_holonomy(const MetricField& field, const Vec& base, const LoopSpec& loop,
                  const IntegratorOptions& opts, double* ortho_defect) {
  field.require_in_chart(base);
  Mat F0 = field.orthonormal_frame(base);
  PiecewisePath path =
      rectangle_loop(base, loop.center, loop.plane_i, loop.plane_j, loop.side_i, loop.side_j);
  FrameRecord rec = parallel_transport(field, path, F0, opts);
  Mat g0 = field.metric_at(base);
  Mat H = F0.transpose() * g0 * rec.frames.back();
  if (ortho_defect) {
    *ortho_defect = (H.transpose() * H - Mat::Identity(H.rows(), H.cols())).cwiseAbs().maxCoeff();
  }
  return H;
}

HolonomySample sample_holonomy(const MetricField& field, const Vec& base, int n_loops,
                               const std::vector<double>& scales, std::uint64_t seed,
                               const IntegratorOptions& opts) {
  if (n_loops < 1) throw Error(Errc::domain_error, "sample_holonomy needs n_loops >= 1");
  const int d = field.dim();

  HolonomySample sample;
  sample.base = base;
  sample.seed = seed;

  // Rectangles in every coordinate plane: centered at base, then shifted by a
  // half side inside the plane and along each remaining coordinate. Shifted
  // loops see the curvature at displaced points, which is what separates a
  // genuinely irreducible holonomy group from one rotation axis.
  for (double s : scales) {
    for (int i = 0; i < d && static_cast<int>(sample.loops.size()) < n_loops; ++i) {
      for (int j = i + 1; j < d && static_cast<int>(sample.loops.size()) < n_loops; ++j) {
        std::vector<Vec> centers;
        centers.push_back(base);
        Vec ci = base;
        ci(i) += 0.5 * s;
        centers.push_back(ci);
        Vec cj = base;
        cj(j) += 0.5 * s;
        centers.push_back(cj);
        for (int k = 0; k < d; ++k) {
          if (k == i || k == j) continue;
          Vec ck = base;
          ck(k) += 0.6 * s;
          centers.push_back(ck);
        }
        for (const Vec& c : centers) {
          if (static_cast<int>(sample.loops.size()) >= n_loops) break;
          sample.loops.push_back({c, i, j, s, s});
        }
      }
    }
  }

  for (const auto& loop : sample.loops) {
    double defect = 0.0;
    sample.matrices.push_back(loop_holonomy(field, base, loop, opts, &defect));
    sample.residuals.push_back(defect);
  }

  // pairwise products of distinct transports, canonical order
  const size_t base_count = sample.matrices.size();
  for (size_t a = 0; a < base_count && sample.matrices.size() < static_cast<size_t>(n_loops); ++a)
    for (size_t b = 0; b < a && sample.matrices.size() < static_cast<size_t>(n_loops); ++b) {
      sample.matrices.push_back(sample.matrices[a] * sample.matrices[b]);
      sample.residuals.push_back(std::max(sample.residuals[a], sample.residuals[b]));
    }
  return sample;
}

double principal_angle(const Mat& A, const Mat& B) {
  Eigen::HouseholderQR<Mat> qa(A), qb(B);
  Mat Qa = qa.householderQ() * Mat::Identity(A.rows(), A.cols());
  Mat Qb = qb.householderQ() * Mat::Identity(B.rows(), B.cols());
  if (Qa.cols() > Qb.cols()) std::swap(Qa, Qb);
  // sine of the largest angle: accurate near zero, unlike the cosine route
  Mat resid = Qa - Qb * (Qb.transpose() * Qa);
  Eigen::JacobiSVD<Mat> svd(resid);
  double s = std::clamp(svd.singularValues()(0), 0.0, 1.0);
  return std::asin(s);
}

namespace {

// Null space of the stacked (H - I); singular values in [tol, 10 tol] are a
// refusal, not a verdict.
std::pair<Mat, Mat> fixed_and_moving(const std::vector<Mat>& mats, double tol,
                                     std::vector<double>* singulars) {
  const int d = static_cast<int>(mats.front().rows());
  Mat stacked(static_cast<int>(mats.size()) * d, d);
  for (size_t m = 0; m < mats.size(); ++m)
    stacked.middleRows(static_cast<int>(m) * d, d) = mats[m] - Mat::Identity(d, d);
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
  Vec sv = svd.singularValues();
  if (singulars) singulars->assign(sv.data(), sv.data() + sv.size());
  int fixed_dim = 0;
  for (int i = d - 1; i >= 0; --i) {
    if (sv(i) < tol)
      ++fixed_dim;
    else if (sv(i) <= 10.0 * tol)
      throw Error(Errc::tolerance_ambiguity,
                  "fixed-subspace singular value " + std::to_string(sv(i)) +
                      " falls inside the gray zone");
    else
      break;
  }
  Mat V = svd.matrixV();
  return {V.rightCols(fixed_dim), V.leftCols(d - fixed_dim)};
}

// Symmetric commutant of the given matrices: S = S^T with S H = H S for all H.
std::vector<Mat> symmetric_commutant(const std::vector<Mat>& mats, double tol) {
  const int d = static_cast<int>(mats.front().rows());
  std::vector<std::pair<int, int>> idx;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) idx.emplace_back(i, j);
  const int m = static_cast<int>(idx.size());

  Mat sys(static_cast<int>(mats.size()) * d * d, m);
  for (int a = 0; a < m; ++a) {
    Mat E = Mat::Zero(d, d);
    auto [i, j] = idx[a];
    E(i, j) = E(j, i) = (i == j) ? 1.0 : M_SQRT1_2;
    int row = 0;
    for (const auto& H : mats) {
      Mat C = E * H - H * E;
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) sys(row++, a) = C(r, c);
    }
  }
  Eigen::JacobiSVD<Mat> svd(sys, Eigen::ComputeFullV);
  Vec sv = svd.singularValues();
  const double scale = std::max(sv(0), 1.0);
  int null_dim = 0;
  for (int i = m - 1; i >= 0; --i) {
    if (sv(i) < tol * scale)
      ++null_dim;
    else if (sv(i) <= 10.0 * tol * scale)
      throw Error(Errc::tolerance_ambiguity,
                  "commutant singular value " + std::to_string(sv(i)) +
                      " falls inside the gray zone");
    else
      break;
  }
  std::vector<Mat> out;
  for (int k = 0; k < null_dim; ++k) {
    Vec w = svd.matrixV().col(m - 1 - k);
    Mat S = Mat::Zero(d, d);
    for (int a = 0; a < m; ++a) {
      auto [i, j] = idx[a];
      double v = (i == j) ? w(a) : w(a) * M_SQRT1_2;
      S(i, j) += v;
      if (i != j) S(j, i) += v;
    }
    out.push_back(S);
  }
  return out;
}

void decompose_irreducible(const std::vector<Mat>& mats, const Mat& ambient_basis, double tol,
                           Rng& rng, std::vector<Mat>* out) {
  const int d = static_cast<int>(mats.front().rows());
  if (d == 1) {
    out->push_back(ambient_basis);
    return;
  }
  auto comm = symmetric_commutant(mats, tol);
  if (comm.size() <= 1) {
    out->push_back(ambient_basis);
    return;
  }
  Mat C = Mat::Zero(d, d);
  for (const auto& S : comm) C += rng.uniform(0.5, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0) * S;
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> eig(C);
  Vec ev = eig.eigenvalues();
  const double spread = std::max(ev(d - 1) - ev(0), 1e-300);

  // cluster eigenvalues, then recurse into each eigenspace
  std::vector<std::pair<int, int>> clusters;
  int start = 0;
  for (int i = 1; i <= d; ++i) {
    if (i == d || ev(i) - ev(i - 1) > std::max(1e-4 * spread, 1e-10)) {
      clusters.emplace_back(start, i - start);
      start = i;
    }
  }
  if (clusters.size() <= 1) {
    out->push_back(ambient_basis);
    return;
  }
  for (auto [lo, len] : clusters) {
    Mat Q = eig.eigenvectors().middleCols(lo, len);
    std::vector<Mat> sub;
    for (const auto& H : mats) sub.push_back(Q.transpose() * H * Q);
    decompose_irreducible(sub, Mat(ambient_basis * Q), tol, rng, out);
  }
}

}  // namespace

InvariantSplitResult invariant_split(const std::vector<Mat>& matrices, double tol,
                                     std::uint64_t seed) {
  if (matrices.empty()) throw Error(Errc::domain_error, "invariant_split needs matrices");
  const int d = static_cast<int>(matrices.front().rows());

  InvariantSplitResult res;
  auto [fixed, moving] = fixed_and_moving(matrices, tol, &res.fixed_test_singulars);

  if (fixed.cols() > 0) {
    InvariantBlock blk;
    blk.basis = fixed;
    blk.fixed = true;
    res.blocks.push_back(std::move(blk));
  }
  if (moving.cols() > 0) {
    std::vector<Mat> projected;
    for (const auto& H : matrices) projected.push_back(moving.transpose() * H * moving);
    Rng rng(seed);
    std::vector<Mat> bases;
    decompose_irreducible(projected, moving, tol, rng, &bases);
    std::sort(bases.begin(), bases.end(), [](const Mat& a, const Mat& b) {
      if (a.cols() != b.cols()) return a.cols() < b.cols();
      for (int i = 0; i < a.rows(); ++i) {
        double x = std::round(a(i, 0) * 1e8), y = std::round(b(i, 0) * 1e8);
        if (x != y) return x < y;
      }
      return false;
    });
    for (auto& B : bases) {
      InvariantBlock blk;
      blk.basis = std::move(B);
      blk.fixed = false;
      res.blocks.push_back(std::move(blk));
    }
  }
  (void)d;
  return res;
}

std::vector<Vec> default_base_points(const MetricField& field) {
  std::vector<Vec> pts;
  switch (field.kind()) {
    case FieldKind::mapping_torus: {
      const int d = field.dim();
      const double lam = field.split().lambda;
      for (double f : {0.30, 0.55, 0.85}) {
        Vec p = Vec::Zero(d);
        p(0) = 0.05;
        p(d - 1) = lam + f * (1.0 - lam);
        pts.push_back(p);
      }
      break;
    }
    case FieldKind::cone_circle:
      for (auto [a, t] : {std::pair{0.3, 0.9}, {1.5, 1.2}, {2.5, 0.8}}) {
        Vec p(2);
        p << a, t;
        pts.push_back(p);
      }
      break;
    case FieldKind::cone_sphere:
      for (auto [th, ps, t] : {std::tuple{1.2, 0.4, 0.9}, {1.5, 1.0, 1.1}, {1.05, 2.0, 1.3}}) {
        Vec p(3);
        p << th, ps, t;
        pts.push_back(p);
      }
      break;
    case FieldKind::flat_torus: {
      const int d = field.dim();
      for (double s : {0.1, 0.4, 0.7}) {
        Vec p = Vec::Constant(d, s);
        pts.push_back(p);
      }
      break;
    }
  }
  return pts;
}

namespace {

double block_curvature_indicator(const MetricField& field, const Vec& base, const Mat& basis) {
  // largest orthonormal-frame Riemann component with all slots in the block
  Mat g = field.metric_at(base);
  Mat F = field.orthonormal_frame(base);
  RiemannTensor R = field.riemann_at(base);
  const int d = field.dim();
  Mat dirs = F * basis;  // block directions in coordinates
  const int m = static_cast<int>(dirs.cols());
  double best = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int e = 0; e < m; ++e) {
          double v = 0.0;
          for (int l = 0; l < d; ++l)
            for (int i = 0; i < d; ++i)
              for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                  double gl = 0.0;
                  for (int mm = 0; mm < d; ++mm) gl += g(mm, l) * dirs(mm, e);
                  v += gl * R(l, i, j, k) * dirs(i, a) * dirs(j, b) * dirs(k, c);
                }
          best = std::max(best, std::abs(v));
        }
  return best;
}

Vec curvature_probe_direction(const MetricField& field) {
  // unit direction toward the lower boundary, used for the incompleteness probe
  const int d = field.dim();
  Vec v = Vec::Zero(d);
  v(d - 1) = -1.0;
  return v;
}

}  // namespace

Trichotomy classify(const MetricField& field, ClassifyOptions opts) {
  if (opts.base_points.empty()) opts.base_points = default_base_points(field);

  Trichotomy out;
  out.null_tol = opts.null_tol;
  out.ortho_tol = opts.ortho_tol;
  out.curvature_tol = opts.curvature_tol;

  const int d = field.dim();
  bool first = true;
  Verdict agreed = Verdict::unclassified;
  int agreed_flat = 0, agreed_irr = 0;
  bool all_agree = true;

  for (const Vec& base : opts.base_points) {
    HolonomySample sample =
        sample_holonomy(field, base, opts.n_loops, opts.scales, opts.seed, opts.integrator);
    double ortho = 0.0;
    for (double r : sample.residuals) ortho = std::max(ortho, r);
    out.max_ortho_defect = std::max(out.max_ortho_defect, ortho);

    // curvature sampled at the base and at the loop centers
    double curv = field.curvature_norm(base);
    for (const auto& loop : sample.loops)
      curv = std::max(curv, field.curvature_norm(loop.center));
    out.max_curvature = std::max(out.max_curvature, curv);

    bool identity_holonomy = true;
    for (const auto& H : sample.matrices)
      identity_holonomy =
          identity_holonomy &&
          (H - Mat::Identity(d, d)).cwiseAbs().maxCoeff() < 10.0 * opts.null_tol;

    Verdict verdict;
    int flat_dim = 0, irr_dim = 0;
    std::vector<BlockEvidence> blocks;

    if (identity_holonomy && curv < opts.curvature_tol) {
      verdict = Verdict::flat;
      flat_dim = d;
      BlockEvidence ev;
      ev.dim = d;
      ev.fixed = true;
      ev.basis = Mat::Identity(d, d);
      ev.curvature_indicator = curv;
      blocks.push_back(std::move(ev));
    } else {
      InvariantSplitResult split = invariant_split(sample.matrices, opts.null_tol, opts.seed);
      for (const auto& blk : split.blocks) {
        BlockEvidence ev;
        ev.dim = blk.dim();
        ev.fixed = blk.fixed;
        ev.basis = blk.basis;
        ev.curvature_indicator = block_curvature_indicator(field, base, blk.basis);
        blocks.push_back(std::move(ev));
      }
      const BlockEvidence* fixed_blk = nullptr;
      std::vector<const BlockEvidence*> irr;
      for (const auto& b : blocks)
        if (b.fixed)
          fixed_blk = &b;
        else
          irr.push_back(&b);

      if (!fixed_blk && irr.size() == 1 && irr[0]->dim == d) {
        verdict = Verdict::irreducible;
        irr_dim = d;
      } else if (fixed_blk && irr.size() == 1 &&
                 irr[0]->curvature_indicator >= opts.curvature_tol) {
        verdict = Verdict::euclidean_times_irreducible;
        flat_dim = fixed_blk->dim;
        irr_dim = irr[0]->dim;
      } else {
        verdict = Verdict::unclassified;
      }
    }

    out.base_point_verdicts.push_back(verdict_name(verdict));
    if (first) {
      agreed = verdict;
      agreed_flat = flat_dim;
      agreed_irr = irr_dim;
      out.blocks = blocks;
      first = false;
    } else if (verdict != agreed || flat_dim != agreed_flat || irr_dim != agreed_irr) {
      all_agree = false;
    }
  }

  out.verdict = all_agree ? agreed : Verdict::unclassified;
  out.flat_dim = agreed_flat;
  out.irreducible_dim = agreed_irr;

  // incompleteness annotation: probe the boundary direction for a finite
  // lifetime when the verdict has a non-flat factor
  if (out.verdict == Verdict::irreducible ||
      out.verdict == Verdict::euclidean_times_irreducible) {
    IntegratorOptions io = opts.integrator;
    io.t_max = 20.0;
    LifetimeValue lt = lifetime(field, opts.base_points.front(),
                                curvature_probe_direction(field), io);
    if (lt.finite) {
      out.finite_lifetime_found = true;
      out.example_finite_lifetime = lt.value;
    }
  }
  return out;
}

}  // namespace simlab
