// simlab - numerical holonomy sampling, invariant-subspace splitting and the
// flat / irreducible / euclidean-times-irreducible classification.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simlab/geodesics.hpp"
#include "simlab/metric_field.hpp"

namespace simlab {

struct LoopSpec {
  Vec center;
  int plane_i = 0;
  int plane_j = 1;
  double side_i = 0.1;
  double side_j = 0.1;
};

// Parallel transport of the canonical g-orthonormal frame around the loop,
// expressed in that frame. Loops whose center differs from base are attached
// by a straight tail.
Mat loop_holonomy(const MetricField& field, const Vec& base, const LoopSpec& loop,
                  const IntegratorOptions& opts = {}, double* ortho_defect = nullptr);

struct HolonomySample {
  Vec base;
  std::vector<LoopSpec> loops;
  std::vector<Mat> matrices;
  std::vector<double> residuals;  // orthogonality defects
  std::uint64_t seed = 0;
};

// Deterministic loop family: rectangles in every coordinate plane at every
// scale, at the base and at offset centers, followed by pairwise products of
// the collected matrices, truncated to n_loops entries.
HolonomySample sample_holonomy(const MetricField& field, const Vec& base, int n_loops,
                               const std::vector<double>& scales, std::uint64_t seed,
                               const IntegratorOptions& opts = {});

struct InvariantBlock {
  Mat basis;  // orthonormal columns
  bool fixed = false;
  int dim() const { return static_cast<int>(basis.cols()); }
};

struct InvariantSplitResult {
  std::vector<InvariantBlock> blocks;  // fixed block first, then by dimension
  std::vector<double> fixed_test_singulars;
};

// Splits R^d into the common fixed subspace and irreducible invariant blocks
// of the given near-orthogonal matrices. The fixed subspace is the null space
// of the stacked (H - I); the rest is split recursively through symmetric
// elements of the commutant. Throws ToleranceAmbiguity when a null-space
// decision falls in the gray zone [tol, 10 tol].
InvariantSplitResult invariant_split(const std::vector<Mat>& matrices, double tol = 1e-5,
                                     std::uint64_t seed = 7);

// Largest principal angle between the column spans (dimensions may differ).
double principal_angle(const Mat& A, const Mat& B);

enum class Verdict { flat, irreducible, euclidean_times_irreducible, unclassified };

const char* verdict_name(Verdict v);

struct BlockEvidence {
  int dim = 0;
  bool fixed = false;
  Mat basis;
  double curvature_indicator = 0.0;
};

struct Trichotomy {
  Verdict verdict = Verdict::unclassified;
  int flat_dim = 0;
  int irreducible_dim = 0;
  std::vector<BlockEvidence> blocks;  // from the first base point
  double max_ortho_defect = 0.0;
  double max_curvature = 0.0;
  double null_tol = 0.0;
  double ortho_tol = 0.0;
  double curvature_tol = 0.0;
  std::vector<std::string> base_point_verdicts;
  // incompleteness annotation: finite lifetimes found in non-flat directions
  bool finite_lifetime_found = false;
  double example_finite_lifetime = 0.0;
};

struct ClassifyOptions {
  std::vector<Vec> base_points;        // defaults chosen per field kind
  std::vector<double> scales{0.2, 0.1};
  int n_loops = 48;
  double ortho_tol = 1e-6;
  double null_tol = 1e-5;
  double curvature_tol = 1e-7;
  std::uint64_t seed = 1;
  IntegratorOptions integrator;
};

std::vector<Vec> default_base_points(const MetricField& field);

Trichotomy classify(const MetricField& field, ClassifyOptions opts = {});

}  // namespace simlab
