// simlab - holonomy pseudogroup of the stable foliation on a transversal.
//
// The transversal is the (y, z) half-plane with metric phi(z) dy^2 + dz^2.
// Charts are boxes: a tiling of the fundamental window replicated at gluing
// levels k (images of the base tiling under powers of the gluing map), so a
// single transition can carry ratio lambda^{+-1} and words of length L reach
// lambda^{+-L}. Ratios are tracked as exact integer powers of lambda.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "simlab/metric_field.hpp"

namespace simlab {

using Vec2 = Eigen::Vector2d;

struct TransversalBox {
  double y_lo = 0, y_hi = 0, z_lo = 0, z_hi = 0;
  double phi_min = 1.0;  // min of phi over the z-range, cached

  bool contains(const Vec2& p, double slack = 0.0) const {
    return p.x() >= y_lo - slack && p.x() <= y_hi + slack && p.y() >= z_lo - slack &&
           p.y() <= z_hi + slack;
  }
  bool empty() const { return y_lo >= y_hi || z_lo >= z_hi; }
};

struct TransversalChart {
  TransversalBox box;
  int level = 0;
  int base_id = 0;
};

// Affine pseudogroup element (y, z) -> (y_scale * y + y_offset, lambda^k z),
// restricted to `domain` (a sub-box of chart `from`) and mapping into `to`.
struct Transition {
  int from = 0;
  int to = 0;
  int k = 0;  // ratio = lambda^k
  double y_scale = 1.0;
  double y_offset = 0.0;
  TransversalBox domain;
};

class ChartCover {
 public:
  double lambda = 1.0;
  double mu = 1.0;  // signed unstable multiplier; |mu| = lambda^{-q}
  int q = 1;
  PhiProfile phi;
  bool flat = false;  // flat covers: phi == 1, single level, ratios all 1

  std::vector<TransversalChart> charts;
  std::vector<Transition> transitions;
  std::vector<std::vector<int>> outgoing;  // transition indices per chart
  std::vector<double> taus;                // unstable projections of the lattice generators
  double epsilon0 = 0.0;
  double chart_size = 0.0;
  int depth = 0;

  double ratio_of(const Transition& t) const { return std::pow(lambda, t.k); }
  Vec2 apply(const Transition& t, const Vec2& p) const {
    return {t.y_scale * p.x() + t.y_offset, std::pow(lambda, t.k) * p.y()};
  }

  double phi_at(double z) const { return flat ? 1.0 : phi.eval(z); }
  // |K| of the transversal metric; identically zero on flat covers.
  double curvature_weight(double z) const;

  // Certified lower bound for the g-distance from p to the box boundary.
  double margin_lb(const Vec2& p, const TransversalBox& b) const;
  // Straight-segment g-length (an upper bound for the distance).
  double segment_length(const Vec2& a, const Vec2& b) const;
  // Cheap certified upper bound for the straight-segment length.
  double segment_length_ub(const Vec2& a, const Vec2& b) const;

  int best_chart(const Vec2& p) const;  // max margin, lowest index on ties
  Vec2 chart_center(int id) const;
};

ChartCover build_cover(const MetricField& field, double chart_size, int depth = 6);

struct GermWord {
  int start_chart = 0;
  Vec2 base;  // anchor point in the start chart
  std::vector<int> transition_ids;
  int total_power = 0;

  int length() const { return static_cast<int>(transition_ids.size()); }
};

struct ComposeReport {
  int ratio_power = 0;
  double ratio = 1.0;
  double guaranteed_radius = 0.0;  // epsilon0 / max prefix ratio
  int min_prefix_power = 0;        // over the intermediate prefixes (first = 0)
  int samples_checked = 0;
  int violations = 0;
};

// Verifies the margin conditions of `word` at its anchor, computes the
// guaranteed domain-ball radius, and drives sampled points of that ball
// through every step checking domain membership. Throws MarginViolation
// when a margin condition fails.
ComposeReport compose_tracked(const ChartCover& cover, const GermWord& word,
                              int n_ball_samples = 200, std::uint64_t seed = 11);

// Vertical path: the transversal coordinates stay constant along leaf
// segments and re-express through deck identifications at crossings.
struct VerticalPath {
  Vec2 start;
  struct Crossing {
    int phi_power = 0;     // apply the gluing map this many times (+-1)
    int translation = -1;  // lattice generator index, or -1
    int sign = 1;
  };
  std::vector<Crossing> crossings;
  std::vector<Vec2> drifts;  // optional per-crossing transversal drift
};

GermWord germ_from_path(const ChartCover& cover, const VerticalPath& path, double tol = 1e-9,
                        bool prefer_first_chart = false);

// Action of a word on a transversal point (composite affine map).
Vec2 apply_word(const ChartCover& cover, const GermWord& word, const Vec2& p);

// Max deviation from 1 of the pullback ratio of `t` with respect to the
// curvature-weighted metric |K| g, over sample points and directions.
// Points with |K| below curvature_tol raise CurvatureVanishes.
double invariant_metric_ratio(const ChartCover& cover, const Transition& t,
                              const std::vector<Vec2>& points, double curvature_tol = 1e-12);

struct WordEnumeration {
  std::vector<GermWord> words;  // deduplicated germ representatives
  int anchors = 0;
};

// Breadth-first enumeration of margin-valid words anchored at the level-0
// chart centers, deduplicated by (end chart, image point, ratio power).
WordEnumeration enumerate_words(const ChartCover& cover, int max_length,
                                std::size_t max_states = 2'000'000);

struct EquicontinuityReport {
  int word_length = 0;
  double m_bound = 0.0;
  int min_power = 0;  // most expanding word (ratio lambda^min_power)
  int max_power = 0;  // most contracting word
  double raw_ratio_min = 1.0;
  double raw_ratio_max = 1.0;
  bool raw_equicontinuous = true;
  double weighted_max_deviation = 0.0;
  bool weighted_equicontinuous = true;
  std::map<int, std::map<int, int>> power_histogram;  // length -> power -> count
  std::size_t words_enumerated = 0;
  double epsilon0 = 0.0;
};

EquicontinuityReport equicontinuity_report(const ChartCover& cover, int word_length, double m);

}  // namespace simlab
