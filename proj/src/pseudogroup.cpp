#include "simlab/pseudogroup.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>

namespace simlab {

namespace {

double phi_min_over(const PhiProfile& phi, bool flat, double z_lo, double z_hi) {
  if (flat) return 1.0;
  if (phi.fourier.empty()) return phi.eval(z_lo);  // monotone in z
  double m = phi.eval(z_lo);
  for (int i = 1; i <= 32; ++i) {
    double z = z_lo + (z_hi - z_lo) * i / 32.0;
    m = std::min(m, phi.eval(z));
  }
  return 0.999 * m;
}

struct DeckGen {
  int k = 0;
  double y_scale = 1.0;
  double y_offset = 0.0;
};

TransversalBox map_box(const DeckGen& g, const TransversalBox& b, double lambda) {
  const double zf = std::pow(lambda, g.k);
  double ya = g.y_scale * b.y_lo + g.y_offset;
  double yb = g.y_scale * b.y_hi + g.y_offset;
  TransversalBox out;
  out.y_lo = std::min(ya, yb);
  out.y_hi = std::max(ya, yb);
  out.z_lo = zf * b.z_lo;
  out.z_hi = zf * b.z_hi;
  return out;
}

TransversalBox intersect(const TransversalBox& a, const TransversalBox& b) {
  TransversalBox out;
  out.y_lo = std::max(a.y_lo, b.y_lo);
  out.y_hi = std::min(a.y_hi, b.y_hi);
  out.z_lo = std::max(a.z_lo, b.z_lo);
  out.z_hi = std::min(a.z_hi, b.z_hi);
  return out;
}

}  // namespace

double ChartCover::curvature_weight(double z) const {
  if (flat) return 0.0;
  const double p0 = phi.eval(z), p1 = phi.eval(z, 1), p2 = phi.eval(z, 2);
  return std::abs(-p2 / (2.0 * p0) + p1 * p1 / (4.0 * p0 * p0));
}

double ChartCover::margin_lb(const Vec2& p, const TransversalBox& b) const {
  const double zm = std::min(p.y() - b.z_lo, b.z_hi - p.y());
  const double ym = std::sqrt(b.phi_min) * std::min(p.x() - b.y_lo, b.y_hi - p.x());
  return std::min(zm, ym);
}

double ChartCover::segment_length(const Vec2& a, const Vec2& b) const {
  const double dy = b.x() - a.x(), dz = b.y() - a.y();
  if (flat) return std::hypot(dy, dz);
  // composite Simpson, 32 intervals
  double sum = 0.0;
  auto f = [&](double s) {
    double z = a.y() + s * dz;
    return std::sqrt(phi.eval(z) * dy * dy + dz * dz);
  };
  const int n = 32;
  for (int i = 0; i < n; ++i) {
    double s0 = static_cast<double>(i) / n, s1 = static_cast<double>(i + 1) / n;
    sum += (f(s0) + 4.0 * f(0.5 * (s0 + s1)) + f(s1)) * (s1 - s0) / 6.0;
  }
  return sum;
}

double ChartCover::segment_length_ub(const Vec2& a, const Vec2& b) const {
  const double dy = b.x() - a.x(), dz = b.y() - a.y();
  if (flat) return std::hypot(dy, dz);
  // phi(z) = z^{2q+2} exp(P(log z)) <= max(z)^{2q+2} exp(sum |P coeffs|)
  double phi_max;
  if (phi.fourier.empty()) {
    phi_max = std::max(phi.eval(a.y()), phi.eval(b.y()));  // monotone
  } else {
    double psum = 0.0;
    for (auto [c, s] : phi.fourier) psum += std::abs(c) + std::abs(s);
    phi_max = std::pow(std::max(a.y(), b.y()), 2 * phi.q + 2) * std::exp(psum);
  }
  return std::sqrt(phi_max * dy * dy + dz * dz);
}

int ChartCover::best_chart(const Vec2& p) const {
  int best = -1;
  double bm = 0.0;
  for (size_t i = 0; i < charts.size(); ++i) {
    double m = margin_lb(p, charts[i].box);
    if (m > bm) {
      bm = m;
      best = static_cast<int>(i);
    }
  }
  return best;
}

Vec2 ChartCover::chart_center(int id) const {
  const auto& b = charts[id].box;
  return {0.5 * (b.y_lo + b.y_hi), 0.5 * (b.z_lo + b.z_hi)};
}

ChartCover build_cover(const MetricField& field, double chart_size, int depth) {
  if (chart_size <= 0) throw Error(Errc::config_error, "chart_size must be positive");
  ChartCover cover;
  cover.chart_size = chart_size;

  double y_win_lo = 0, y_win_hi = 0, z_win_lo = 0, z_win_hi = 0;
  double y_fund_lo = 0, y_fund_hi = 0, z_fund_lo = 0, z_fund_hi = 0;

  if (field.kind() == FieldKind::mapping_torus) {
    const auto& split = field.split();
    const int q = split.q();
    cover.lambda = split.lambda;
    cover.mu = split.mu;
    cover.q = q;
    cover.phi = field.phi();
    cover.depth = depth;

    Mat E(q + 1, q + 1);
    E.leftCols(q) = split.stable_basis;
    E.col(q) = split.unstable_basis;
    Mat Einv = E.inverse();
    for (int m = 0; m <= q; ++m) cover.taus.push_back(Einv(q, m));

    // unstable extent of the fundamental cube, with margin
    double lo = 0, hi = 0;
    for (double t : cover.taus) {
      if (t < 0)
        lo += t;
      else
        hi += t;
    }
    const double pad = 0.15 * (hi - lo);
    y_fund_lo = lo;
    y_fund_hi = hi;
    z_fund_lo = cover.lambda;
    z_fund_hi = 1.0;
    y_win_lo = lo - pad;
    y_win_hi = hi + pad;
    z_win_lo = 0.95 * cover.lambda;
    z_win_hi = 1.05;
  } else if (field.kind() == FieldKind::flat_torus) {
    if (field.dim() < 2)
      throw Error(Errc::config_error, "flat cover needs dimension >= 2");
    cover.flat = true;
    cover.lambda = 1.0;
    cover.mu = 1.0;
    cover.q = field.dim() - 2;
    cover.depth = 0;
    depth = 0;
    cover.taus = {1.0, 1.0};  // unit translations of the transversal pair
    y_fund_lo = 0.0;
    y_fund_hi = 1.0;
    z_fund_lo = 0.5;
    z_fund_hi = 1.5;
    y_win_lo = -0.05;
    y_win_hi = 1.05;
    z_win_lo = 0.45;
    z_win_hi = 1.55;  // keep z positive for uniformity
  } else {
    throw Error(Errc::domain_error, "chart covers are built for mapping tori and flat tori");
  }

  const double h = chart_size;
  const int ny = std::max(2, static_cast<int>(std::ceil(2.0 * (y_win_hi - y_win_lo) / h)) );
  const int nz = std::max(2, static_cast<int>(std::ceil(2.0 * (z_win_hi - z_win_lo) / h)) );
  if ((y_win_hi - y_win_lo) < h || (z_win_hi - z_win_lo) < h)
    throw Error(Errc::config_error, "chart_size too large for the fundamental window");

  std::vector<TransversalBox> base_boxes;
  for (int iy = 0; iy < ny; ++iy)
    for (int iz = 0; iz < nz; ++iz) {
      TransversalBox b;
      const double sy = (y_win_hi - y_win_lo - h) / (ny - 1);
      const double sz = (z_win_hi - z_win_lo - h) / (nz - 1);
      b.y_lo = y_win_lo + iy * sy;
      b.y_hi = b.y_lo + h;
      b.z_lo = z_win_lo + iz * sz;
      b.z_hi = b.z_lo + h;
      base_boxes.push_back(b);
    }

  for (int level = -depth; level <= depth; ++level) {
    const double zf = std::pow(cover.lambda, level);
    const double yf = std::pow(cover.mu, level);
    for (size_t i = 0; i < base_boxes.size(); ++i) {
      TransversalChart c;
      double ya = yf * base_boxes[i].y_lo, yb = yf * base_boxes[i].y_hi;
      c.box.y_lo = std::min(ya, yb);
      c.box.y_hi = std::max(ya, yb);
      c.box.z_lo = zf * base_boxes[i].z_lo;
      c.box.z_hi = zf * base_boxes[i].z_hi;
      c.box.phi_min = phi_min_over(cover.phi, cover.flat, c.box.z_lo, c.box.z_hi);
      c.level = level;
      c.base_id = static_cast<int>(i);
      cover.charts.push_back(c);
    }
  }

  // deck generators acting on the transversal
  std::vector<DeckGen> gens;
  gens.push_back({0, 1.0, 0.0});
  for (double t : cover.taus) {
    gens.push_back({0, 1.0, t});
    gens.push_back({0, 1.0, -t});
  }
  if (!cover.flat) {
    gens.push_back({1, cover.mu, 0.0});
    gens.push_back({-1, 1.0 / cover.mu, 0.0});
  }

  std::set<std::tuple<int, int, int, long long, long long>> seen;
  for (size_t a = 0; a < cover.charts.size(); ++a) {
    for (const auto& g : gens) {
      TransversalBox image = map_box(g, cover.charts[a].box, cover.lambda);
      for (size_t b = 0; b < cover.charts.size(); ++b) {
        const TransversalBox& target = cover.charts[b].box;
        // overlap thresholds scale with the smaller box in each coordinate
        const double need_y =
            0.05 * std::min(image.y_hi - image.y_lo, target.y_hi - target.y_lo);
        const double need_z =
            0.05 * std::min(image.z_hi - image.z_lo, target.z_hi - target.z_lo);
        TransversalBox overlap = intersect(image, target);
        if (overlap.y_hi - overlap.y_lo < need_y || overlap.z_hi - overlap.z_lo < need_z)
          continue;
        if (a == b && g.k == 0 && g.y_offset == 0.0) continue;  // trivial self map
        auto key = std::make_tuple(static_cast<int>(a), static_cast<int>(b), g.k,
                                   std::llround(g.y_scale * 1e12),
                                   std::llround(g.y_offset * 1e12));
        if (!seen.insert(key).second) continue;
        Transition t;
        t.from = static_cast<int>(a);
        t.to = static_cast<int>(b);
        t.k = g.k;
        t.y_scale = g.y_scale;
        t.y_offset = g.y_offset;
        // domain: preimage of the overlap
        DeckGen inv{-g.k, 1.0 / g.y_scale, -g.y_offset / g.y_scale};
        t.domain = intersect(map_box(inv, overlap, cover.lambda), cover.charts[a].box);
        t.domain.phi_min = phi_min_over(cover.phi, cover.flat, t.domain.z_lo, t.domain.z_hi);
        cover.transitions.push_back(t);
      }
    }
  }

  cover.outgoing.assign(cover.charts.size(), {});
  for (size_t i = 0; i < cover.transitions.size(); ++i)
    cover.outgoing[cover.transitions[i].from].push_back(static_cast<int>(i));

  // epsilon0: calibrated so that margin conditions remain satisfiable at the
  // deepest level; every point of the manifold then has a chart with a margin
  // comfortably above it. The covering margin is measured over the unpadded
  // fundamental region, which the window strictly contains.
  double m0 = 1e300;
  const int grid = 48;
  for (int iy = 0; iy <= grid; ++iy)
    for (int iz = 0; iz <= grid; ++iz) {
      Vec2 p(y_fund_lo + (y_fund_hi - y_fund_lo) * iy / grid,
             z_fund_lo + (z_fund_hi - z_fund_lo) * iz / grid);
      double best = 0.0;
      for (size_t i = 0; i < base_boxes.size(); ++i) {
        TransversalBox b = base_boxes[i];
        b.phi_min = phi_min_over(cover.phi, cover.flat, b.z_lo, b.z_hi);
        best = std::max(best, cover.margin_lb(p, b));
      }
      m0 = std::min(m0, best);
    }
  cover.epsilon0 = 0.45 * std::pow(cover.lambda, depth) * m0;
  return cover;
}

namespace {

// Margin conditions for extending a word whose current image is p in chart c
// by transition t: the image must sit deeper than epsilon0 in its chart and
// the ball B_g(p, epsilon0) must fit inside the transition domain.
bool extension_valid(const ChartCover& cover, const Vec2& p, int chart, const Transition& t,
                     std::string* why = nullptr) {
  if (t.from != chart) {
    if (why) *why = "transition does not start in the current chart";
    return false;
  }
  if (cover.margin_lb(p, cover.charts[chart].box) <= cover.epsilon0) {
    if (why) *why = "image margin in its chart not above epsilon0";
    return false;
  }
  if (cover.margin_lb(p, t.domain) < cover.epsilon0) {
    if (why) *why = "epsilon0-ball around the image does not fit in the step domain";
    return false;
  }
  return true;
}

}  // namespace

ComposeReport compose_tracked(const ChartCover& cover, const GermWord& word, int n_ball_samples,
                              std::uint64_t seed) {
  ComposeReport rep;
  Vec2 p = word.base;
  int chart = word.start_chart;
  if (!cover.charts[chart].box.contains(p))
    throw Error(Errc::margin_violation, "anchor point is not in its start chart");

  int power = 0;
  int min_prefix = 0;
  std::vector<const Transition*> steps;
  for (size_t l = 0; l < word.transition_ids.size(); ++l) {
    const Transition& t = cover.transitions[word.transition_ids[l]];
    std::string why;
    if (!extension_valid(cover, p, chart, t, &why))
      throw Error(Errc::margin_violation, "step " + std::to_string(l + 1) + ": " + why);
    min_prefix = std::min(min_prefix, power);  // prefix ratio before this step
    p = cover.apply(t, p);
    chart = t.to;
    power += t.k;
    steps.push_back(&t);
  }
  rep.ratio_power = power;
  rep.ratio = std::pow(cover.lambda, power);
  rep.min_prefix_power = min_prefix;
  // max prefix ratio = lambda^{min prefix power}
  rep.guaranteed_radius = cover.epsilon0 * std::pow(cover.lambda, -min_prefix);

  // drive sampled points of the guaranteed ball through every step
  Rng rng(seed);
  const Vec2 x0 = word.base;
  const double rho = rep.guaranteed_radius;
  int checked = 0, violations = 0;
  for (int s = 0; s < n_ball_samples; ++s) {
    const double ang = 2.0 * M_PI * rng.uniform();
    const double rr = rho * std::sqrt(rng.uniform());
    // metric-normalized coordinate offset, then certify with a length bound
    Vec2 cand = x0 + Vec2(rr * std::cos(ang) / std::sqrt(cover.phi_at(x0.y())),
                          rr * std::sin(ang));
    for (int shrink = 0; shrink < 40; ++shrink) {
      if (cand.y() > 0 && cover.segment_length_ub(x0, cand) <= rho * (1.0 - 1e-9)) break;
      cand = x0 + 0.8 * (cand - x0);
    }
    if (cand.y() <= 0 || cover.segment_length_ub(x0, cand) > rho) continue;
    ++checked;
    Vec2 w = cand;
    bool ok = true;
    for (const Transition* t : steps) {
      if (!t->domain.contains(w, 1e-12)) {
        ok = false;
        break;
      }
      w = cover.apply(*t, w);
    }
    if (!ok) ++violations;
  }
  rep.samples_checked = checked;
  rep.violations = violations;
  return rep;
}

Vec2 apply_word(const ChartCover& cover, const GermWord& word, const Vec2& p) {
  Vec2 w = p;
  for (int id : word.transition_ids) w = cover.apply(cover.transitions[id], w);
  return w;
}

GermWord germ_from_path(const ChartCover& cover, const VerticalPath& path, double tol,
                        bool prefer_first_chart) {
  GermWord word;
  word.base = path.start;
  int chart = cover.best_chart(path.start);
  if (chart < 0) throw Error(Errc::domain_error, "path start is outside the cover");
  word.start_chart = chart;

  Vec2 p = path.start;
  for (size_t ci = 0; ci < path.crossings.size(); ++ci) {
    if (ci < path.drifts.size() && path.drifts[ci].norm() > tol)
      throw Error(Errc::not_vertical,
                  "transversal projection drifts by " + std::to_string(path.drifts[ci].norm()));
    const auto& cr = path.crossings[ci];
    DeckGen g;
    if (cr.phi_power != 0) {
      g.k = cr.phi_power;
      g.y_scale = std::pow(cover.mu, cr.phi_power);
    }
    if (cr.translation >= 0) {
      if (cr.translation >= static_cast<int>(cover.taus.size()))
        throw Error(Errc::domain_error, "unknown lattice generator");
      g.y_offset += cr.sign * cover.taus[cr.translation] * g.y_scale;
    }
    // locate a matching transition out of the current chart
    int best_t = -1;
    double best_margin = -1.0;
    for (int tid : cover.outgoing[chart]) {
      const Transition& t = cover.transitions[tid];
      if (t.k != g.k) continue;
      if (std::abs(t.y_scale - g.y_scale) > 1e-12) continue;
      if (std::abs(t.y_offset - g.y_offset) > 1e-9) continue;
      if (!t.domain.contains(p, -1e-12)) continue;
      double m = cover.margin_lb(cover.apply(t, p), cover.charts[t.to].box);
      if (prefer_first_chart) {
        if (best_t < 0) {
          best_t = tid;
          best_margin = m;
        }
      } else if (m > best_margin) {
        best_t = tid;
        best_margin = m;
      }
    }
    if (best_t < 0)
      throw Error(Errc::domain_error,
                  "no cover transition realizes crossing " + std::to_string(ci));
    const Transition& t = cover.transitions[best_t];
    p = cover.apply(t, p);
    chart = t.to;
    word.transition_ids.push_back(best_t);
    word.total_power += t.k;
  }
  return word;
}

double invariant_metric_ratio(const ChartCover& cover, const Transition& t,
                              const std::vector<Vec2>& points, double curvature_tol) {
  double worst = 0.0;
  const double zf = std::pow(cover.lambda, t.k);
  for (const Vec2& p : points) {
    Vec2 im = cover.apply(t, p);
    const double w0 = cover.curvature_weight(p.y());
    const double w1 = cover.curvature_weight(im.y());
    if (w0 < curvature_tol || w1 < curvature_tol)
      throw Error(Errc::curvature_vanishes,
                  "curvature weight below tolerance at a sample point");
    const double g0y = cover.phi_at(p.y()), g1y = cover.phi_at(im.y());
    // pullback ratio of |K| g along the two coordinate directions
    const double ry =
        std::sqrt(w1 * g1y * t.y_scale * t.y_scale / (w0 * g0y));
    const double rz = std::sqrt(w1 * zf * zf / w0);
    worst = std::max({worst, std::abs(ry - 1.0), std::abs(rz - 1.0)});
  }
  return worst;
}

namespace {

struct BfsState {
  int chart;
  Vec2 p;
  int power;
  int parent;      // index into the state array, -1 for anchors
  int via;         // transition id used to reach this state
  int anchor;      // anchor chart id
  int depth;
};

}  // namespace

WordEnumeration enumerate_words(const ChartCover& cover, int max_length, std::size_t max_states) {
  if (max_length < 1) throw Error(Errc::domain_error, "word length must be >= 1");
  WordEnumeration out;

  std::vector<BfsState> states;
  std::set<std::tuple<int, int, long long, long long, int>> seen;  // anchor, chart, y, z, power
  std::deque<int> queue;

  auto key_of = [](int anchor, int chart, const Vec2& p, int power) {
    return std::make_tuple(anchor, chart, std::llround(p.x() * 1e9), std::llround(p.y() * 1e9),
                           power);
  };

  for (size_t c = 0; c < cover.charts.size(); ++c) {
    if (cover.charts[c].level != 0) continue;
    Vec2 anchor = cover.chart_center(static_cast<int>(c));
    BfsState s{static_cast<int>(c), anchor, 0, -1, -1, static_cast<int>(c), 0};
    if (!seen.insert(key_of(s.anchor, s.chart, s.p, 0)).second) continue;
    states.push_back(s);
    queue.push_back(static_cast<int>(states.size()) - 1);
    ++out.anchors;
  }

  auto reconstruct = [&](int idx) {
    GermWord w;
    std::vector<int> rev;
    int cur = idx;
    while (states[cur].parent >= 0) {
      rev.push_back(states[cur].via);
      cur = states[cur].parent;
    }
    w.start_chart = states[cur].chart;
    w.base = states[cur].p;
    w.transition_ids.assign(rev.rbegin(), rev.rend());
    w.total_power = states[idx].power;
    return w;
  };

  while (!queue.empty()) {
    int si = queue.front();
    queue.pop_front();
    BfsState s = states[si];
    if (s.depth >= max_length) continue;
    for (int tid : cover.outgoing[s.chart]) {
      const Transition& t = cover.transitions[tid];
      if (!extension_valid(cover, s.p, s.chart, t)) continue;
      Vec2 im = cover.apply(t, s.p);
      int power = s.power + t.k;
      auto key = key_of(s.anchor, t.to, im, power);
      if (!seen.insert(key).second) continue;
      if (states.size() >= max_states)
        throw Error(Errc::config_error, "word enumeration exceeded the state budget");
      BfsState ns{t.to, im, power, si, tid, s.anchor, s.depth + 1};
      states.push_back(ns);
      int ni = static_cast<int>(states.size()) - 1;
      queue.push_back(ni);
      out.words.push_back(reconstruct(ni));
    }
  }
  return out;
}

EquicontinuityReport equicontinuity_report(const ChartCover& cover, int word_length, double m) {
  if (m <= 1.0) throw Error(Errc::domain_error, "equicontinuity bound m must exceed 1");
  EquicontinuityReport rep;
  rep.word_length = word_length;
  rep.m_bound = m;
  rep.epsilon0 = cover.epsilon0;

  WordEnumeration en = enumerate_words(cover, word_length);
  rep.words_enumerated = en.words.size();

  for (const auto& w : en.words) {
    rep.min_power = std::min(rep.min_power, w.total_power);
    rep.max_power = std::max(rep.max_power, w.total_power);
    rep.power_histogram[w.length()][w.total_power] += 1;
    if (!cover.flat) {
      const Vec2 im = apply_word(cover, w, w.base);
      const double w0 = cover.curvature_weight(w.base.y());
      const double w1 = cover.curvature_weight(im.y());
      if (w0 > 1e-12 && w1 > 1e-12) {
        const double ratio_h = std::pow(cover.lambda, w.total_power) * std::sqrt(w1 / w0);
        rep.weighted_max_deviation =
            std::max(rep.weighted_max_deviation, std::abs(ratio_h - 1.0));
      }
    }
  }
  rep.raw_ratio_max = std::pow(cover.lambda, rep.min_power);
  rep.raw_ratio_min = std::pow(cover.lambda, rep.max_power);
  rep.raw_equicontinuous = rep.raw_ratio_max <= m && rep.raw_ratio_min >= 1.0 / m;
  rep.weighted_equicontinuous =
      1.0 + rep.weighted_max_deviation <= m && 1.0 - rep.weighted_max_deviation >= 1.0 / m;
  return rep;
}

}  // namespace simlab
