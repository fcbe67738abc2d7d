#include <doctest.h>

#include <cmath>
#include <set>

#include "simlab/presets.hpp"
#include "simlab/pseudogroup.hpp"

using namespace simlab;

TEST_SUITE_BEGIN("pseudogroup");

namespace {

ChartCover& mn_cover() {
  static ChartCover cover = build_cover(make_preset("mn-q1"), 0.25, 6);
  return cover;
}

}  // namespace

TEST_CASE("cover construction: ratios are powers of lambda, epsilon0 positive") {
  const ChartCover& cover = mn_cover();
  CHECK(cover.epsilon0 > 0.0);
  CHECK(cover.charts.size() > 100);
  std::set<int> powers;
  for (const auto& t : cover.transitions) powers.insert(t.k);
  CHECK(powers == std::set<int>{-1, 0, 1});
  for (const auto& t : cover.transitions) {
    CHECK(std::abs(t.y_scale - std::pow(cover.mu, t.k)) < 1e-12);
    CHECK(!t.domain.empty());
  }
}

TEST_CASE("flat cover has ratio 1 everywhere") {
  ChartCover cover = build_cover(MetricField::flat_torus(3), 0.4, 0);
  CHECK(cover.flat);
  for (const auto& t : cover.transitions) CHECK(t.k == 0);
  CHECK(cover.epsilon0 > 0.0);
}

TEST_CASE("chart_size too large is a ConfigError") {
  CHECK_THROWS_AS(build_cover(make_preset("mn-q1"), 50.0), Error);
}

TEST_CASE("every sampled point admits a chart with margin above epsilon0") {
  const ChartCover& cover = mn_cover();
  const double lam = cover.lambda;
  Rng rng(2024);
  int failures = 0;
  for (int i = 0; i < 10000; ++i) {
    // sample the fundamental region of the transversal
    double y = rng.uniform(-0.2, 1.4);
    double z = rng.uniform(lam, 1.0);
    double best = 0.0;
    for (const auto& c : cover.charts)
      best = std::max(best, cover.margin_lb({y, z}, c.box));
    if (best <= cover.epsilon0) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("identity word: radius epsilon0, ratio 1") {
  const ChartCover& cover = mn_cover();
  GermWord w;
  w.start_chart = cover.best_chart({0.5, 0.7});
  w.base = {0.5, 0.7};
  ComposeReport rep = compose_tracked(cover, w);
  CHECK(rep.ratio_power == 0);
  CHECK(rep.ratio == 1.0);
  CHECK(rep.guaranteed_radius == doctest::Approx(cover.epsilon0));
  CHECK(rep.violations == 0);
}

namespace {

// Build a pure gluing-power word from a chart center, following the exact
// box-onto-box transitions.
GermWord descend_word(const ChartCover& cover, int steps, int direction) {
  GermWord w;
  Vec2 p{0.5, 0.7};
  int chart = cover.best_chart(p);
  w.start_chart = chart;
  w.base = p;
  for (int s = 0; s < steps; ++s) {
    int found = -1;
    for (int tid : cover.outgoing[chart]) {
      const Transition& t = cover.transitions[tid];
      if (t.k != direction) continue;
      if (!t.domain.contains(p, -1e-12)) continue;
      // prefer the aligned image chart (same base tile, adjacent level)
      if (cover.charts[t.to].base_id == cover.charts[chart].base_id &&
          cover.charts[t.to].level == cover.charts[chart].level + direction) {
        found = tid;
        break;
      }
      if (found < 0) found = tid;
    }
    REQUIRE(found >= 0);
    const Transition& t = cover.transitions[found];
    p = cover.apply(t, p);
    chart = t.to;
    w.transition_ids.push_back(found);
    w.total_power += t.k;
  }
  return w;
}

}  // namespace

TEST_CASE("contracting words keep the full epsilon0 radius") {
  const ChartCover& cover = mn_cover();
  for (int k : {1, 2, 3}) {
    GermWord w = descend_word(cover, k, +1);
    ComposeReport rep = compose_tracked(cover, w);
    CHECK(rep.ratio_power == k);
    CHECK(rep.ratio == doctest::Approx(std::pow(cover.lambda, k)));
    // prefix ratios are 1, lambda, ...: max is 1
    CHECK(rep.guaranteed_radius == doctest::Approx(cover.epsilon0));
    CHECK(rep.violations == 0);
    CHECK(rep.samples_checked > 150);
  }
}

TEST_CASE("an expanding step shrinks the guaranteed radius by lambda") {
  const ChartCover& cover = mn_cover();
  GermWord w = descend_word(cover, 2, -1);
  ComposeReport rep = compose_tracked(cover, w);
  CHECK(rep.ratio_power == -2);
  // prefixes have powers 0, -1: max ratio lambda^{-1}
  CHECK(rep.guaranteed_radius == doctest::Approx(cover.epsilon0 * cover.lambda));
  CHECK(rep.violations == 0);
}

TEST_CASE("margin violations are reported with the offending step") {
  const ChartCover& cover = mn_cover();
  // anchor glued to a chart corner: the first margin condition fails
  GermWord w = descend_word(cover, 1, +1);
  const auto& box = cover.charts[w.start_chart].box;
  w.base = {box.y_hi - 1e-9, box.z_hi - 1e-9};
  CHECK_THROWS_AS(compose_tracked(cover, w), Error);
  try {
    compose_tracked(cover, w);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::margin_violation);
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}

TEST_CASE("germ from a constant path is the identity") {
  const ChartCover& cover = mn_cover();
  VerticalPath path;
  path.start = {0.4, 0.8};
  GermWord w = germ_from_path(cover, path);
  CHECK(w.length() == 0);
  CHECK(w.total_power == 0);
}

TEST_CASE("germ across one gluing crossing has ratio lambda") {
  const ChartCover& cover = mn_cover();
  VerticalPath path;
  path.start = {0.4, 0.8};
  path.crossings.push_back({+1, -1, 1});
  GermWord w = germ_from_path(cover, path);
  CHECK(w.length() == 1);
  CHECK(w.total_power == 1);
  Vec2 im = apply_word(cover, w, path.start);
  CHECK(im.y() == doctest::Approx(cover.lambda * 0.8));
  CHECK(im.x() == doctest::Approx(cover.mu * 0.4));
}

TEST_CASE("germ action does not depend on the chart subdivision policy") {
  const ChartCover& cover = mn_cover();
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    VerticalPath path;
    path.start = {rng.uniform(0.05, 0.45), rng.uniform(0.55, 0.95)};
    path.crossings.push_back({0, trial % 2, 1});
    path.crossings.push_back({+1, -1, 1});
    path.crossings.push_back({0, (trial + 1) % 2, -1});
    GermWord a = germ_from_path(cover, path, 1e-9, false);
    GermWord b = germ_from_path(cover, path, 1e-9, true);
    for (const Vec2& probe :
         {path.start, Vec2(path.start + Vec2(0.01, 0.0)), Vec2(path.start + Vec2(0.0, 0.01))}) {
      Vec2 ia = apply_word(cover, a, probe);
      Vec2 ib = apply_word(cover, b, probe);
      CHECK((ia - ib).norm() < 1e-10);
    }
  }
}

TEST_CASE("drifting transversal projection raises NotVertical") {
  const ChartCover& cover = mn_cover();
  VerticalPath path;
  path.start = {0.4, 0.8};
  path.crossings.push_back({+1, -1, 1});
  path.drifts.push_back({1e-3, 0.0});
  CHECK_THROWS_AS(germ_from_path(cover, path), Error);
}

TEST_CASE("ratio bookkeeping is exactly multiplicative") {
  const ChartCover& cover = mn_cover();
  GermWord a = descend_word(cover, 2, +1);
  GermWord b = descend_word(cover, 3, +1);
  CHECK(a.total_power + b.total_power == 5);
  CHECK(std::pow(cover.lambda, a.total_power) * std::pow(cover.lambda, b.total_power) ==
        doctest::Approx(std::pow(cover.lambda, 5)).epsilon(1e-15));
}

TEST_CASE("translations are isometries of the weighted metric") {
  const ChartCover& cover = mn_cover();
  std::vector<Vec2> pts = {{0.3, 0.8}, {0.6, 0.6}, {0.2, 0.95}};
  for (const auto& t : cover.transitions) {
    if (t.k != 0 || t.y_offset == 0.0) continue;
    bool inside = true;
    for (const auto& p : pts) inside = inside && t.domain.contains(p);
    if (!inside) continue;
    CHECK(invariant_metric_ratio(cover, t, pts) < 1e-10);
    break;
  }
}

TEST_CASE("gluing steps are isometries of the weighted metric") {
  const ChartCover& cover = mn_cover();
  int tested = 0;
  for (const auto& t : cover.transitions) {
    if (t.k != 1) continue;
    Vec2 mid{0.5 * (t.domain.y_lo + t.domain.y_hi), 0.5 * (t.domain.z_lo + t.domain.z_hi)};
    CHECK(invariant_metric_ratio(cover, t, {mid}) < 1e-6);
    if (++tested > 20) break;
  }
  CHECK(tested > 0);
}

TEST_CASE("a perturbed map is far from a weighted isometry") {
  const ChartCover& cover = mn_cover();
  for (const auto& t : cover.transitions) {
    if (t.k != 1) continue;
    Transition bad = t;
    bad.y_scale *= 1.05;
    Vec2 mid{0.5 * (t.domain.y_lo + t.domain.y_hi), 0.5 * (t.domain.z_lo + t.domain.z_hi)};
    CHECK(invariant_metric_ratio(cover, bad, {mid}) > 1e-2);
    break;
  }
}

TEST_CASE("weighted metric degenerates on the flat cover") {
  ChartCover cover = build_cover(MetricField::flat_torus(3), 0.4, 0);
  REQUIRE(!cover.transitions.empty());
  CHECK_THROWS_AS(invariant_metric_ratio(cover, cover.transitions.front(), {{0.5, 1.0}}),
                  Error);
}

TEST_CASE("domain lemma holds for every margin-valid word up to length 4") {
  ChartCover cover = build_cover(make_preset("mn-q1"), 0.35, 4);
  WordEnumeration en = enumerate_words(cover, 4);
  REQUIRE(en.words.size() > 500);
  size_t violations = 0;
  for (const auto& w : en.words) {
    ComposeReport rep = compose_tracked(cover, w, 60);
    violations += rep.violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("equicontinuity: raw ratios blow up, weighted ratios stay put") {
  ChartCover cover = build_cover(make_preset("mn-q1"), 0.35, 5);
  EquicontinuityReport rep = equicontinuity_report(cover, 5, 2.0);
  CHECK(rep.min_power == -5);
  CHECK(rep.max_power == 5);
  CHECK(rep.raw_ratio_max == doctest::Approx(std::pow(cover.lambda, -5)));
  CHECK(!rep.raw_equicontinuous);
  CHECK(rep.weighted_max_deviation < 1e-6);
  CHECK(rep.weighted_equicontinuous);
}

TEST_CASE("flat cover is equicontinuous with m close to 1") {
  ChartCover cover = build_cover(MetricField::flat_torus(3), 0.4, 0);
  EquicontinuityReport rep = equicontinuity_report(cover, 3, 1.0001);
  CHECK(rep.min_power == 0);
  CHECK(rep.max_power == 0);
  CHECK(rep.raw_equicontinuous);
}

TEST_SUITE_END();
