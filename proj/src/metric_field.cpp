#include "simlab/metric_field.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace simlab {

double PhiProfile::eval(double z, int order) const {
  if (z <= 0.0) throw Error(Errc::domain_error, "phi is only defined for z > 0");
  const double m = 2.0 * q + 2.0;
  const double T = -std::log(lambda);  // period of P in s = log z
  const double s = std::log(z);

  double P = 0.0, P1 = 0.0, P2 = 0.0;
  for (size_t k = 0; k < fourier.size(); ++k) {
    const double w = 2.0 * M_PI * (k + 1) / T;
    const double c = fourier[k].first, d = fourier[k].second;
    const double cs = std::cos(w * s), sn = std::sin(w * s);
    P += c * cs + d * sn;
    P1 += w * (-c * sn + d * cs);
    P2 += -w * w * (c * cs + d * sn);
  }
  const double phi = std::exp(m * s + P);
  if (order == 0) return phi;
  const double u1 = m + P1;
  if (order == 1) return phi * u1 / z;
  if (order == 2) return phi * (u1 * u1 + P2 - u1) / (z * z);
  throw Error(Errc::domain_error, "phi derivative order must be 0, 1 or 2");
}

MetricField MetricField::mapping_torus(SpectralSplit split, PhiProfile phi) {
  MetricField f;
  f.kind_ = FieldKind::mapping_torus;
  const int q = split.q();
  f.dim_ = q + 2;
  f.boundary_min_ = 1e-4;
  f.boundary_max_ = 1e4;
  phi.q = q;
  phi.lambda = split.lambda;

  // Deck data in adapted coordinates. The basis change E = [stable | unstable]
  // maps adapted coordinates to the torus chart, so lattice translations become
  // the columns of E^{-1} and the gluing map becomes block diagonal.
  Mat E(q + 1, q + 1);
  E.leftCols(q) = split.stable_basis;
  E.col(q) = split.unstable_basis;
  Mat Einv = E.inverse();

  DeckGroup deck;
  for (int m = 0; m <= q; ++m) {
    DeckElement t;
    t.linear = Mat::Identity(q + 2, q + 2);
    t.offset = Vec::Zero(q + 2);
    t.offset.head(q + 1) = Einv.col(m);
    t.ratio = 1.0;
    deck.translations.push_back(std::move(t));
  }
  {
    // The stable block of E^{-1} A E is lambda * O with O b-orthogonal; the
    // unstable coordinate scales by mu and z by lambda.
    Mat Aad = Einv * split.matrix.real() * E;
    DeckElement d;
    d.linear = Mat::Zero(q + 2, q + 2);
    d.linear.topLeftCorner(q + 1, q + 1) = Aad;
    d.linear(q + 1, q + 1) = split.lambda;
    d.offset = Vec::Zero(q + 2);
    d.ratio = split.lambda;
    d.phi_power = 1;
    deck.phi = std::move(d);
  }
  f.deck_ = std::move(deck);
  f.split_ = std::move(split);
  f.phi_ = std::move(phi);
  return f;
}

MetricField MetricField::cone(ConeBase base) {
  if (base.radius <= 0.0) throw Error(Errc::domain_error, "cone base radius must be positive");
  MetricField f;
  f.kind_ = base.kind == ConeBase::Kind::circle ? FieldKind::cone_circle : FieldKind::cone_sphere;
  f.dim_ = base.kind == ConeBase::Kind::circle ? 2 : 3;
  f.radius_ = base.radius;
  f.boundary_min_ = 1e-4;
  f.boundary_max_ = 1e4;
  return f;
}

MetricField MetricField::flat_torus(int dim) {
  if (dim < 1) throw Error(Errc::domain_error, "flat torus dimension must be >= 1");
  MetricField f;
  f.kind_ = FieldKind::flat_torus;
  f.dim_ = dim;
  DeckGroup deck;
  for (int m = 0; m < dim; ++m) {
    DeckElement t;
    t.linear = Mat::Identity(dim, dim);
    t.offset = Vec::Unit(dim, m);
    t.ratio = 1.0;
    deck.translations.push_back(std::move(t));
  }
  f.deck_ = std::move(deck);
  return f;
}

MetricField make_cone(ConeBase base) { return MetricField::cone(base); }

const SpectralSplit& MetricField::split() const {
  if (!split_) throw Error(Errc::domain_error, "field has no spectral split");
  return *split_;
}

const PhiProfile& MetricField::phi() const {
  if (!phi_) throw Error(Errc::domain_error, "field has no warp profile");
  return *phi_;
}

const DeckGroup& MetricField::deck() const {
  if (kind_ == FieldKind::cone_circle || kind_ == FieldKind::cone_sphere)
    throw Error(Errc::domain_error, "cone fixtures carry no deck data");
  return deck_;
}

bool MetricField::in_chart(const Vec& p) const {
  if (p.size() != dim_) return false;
  if (!has_boundary()) return true;
  const double w = p(dim_ - 1);
  if (w <= 0.0) return false;
  if (kind_ == FieldKind::cone_sphere) {
    const double th = p(0);
    if (th <= 0.0 || th >= M_PI) return false;
  }
  return true;
}

void MetricField::require_in_chart(const Vec& p) const {
  if (!in_chart(p)) throw Error(Errc::domain_error, "point outside chart domain");
}

Mat MetricField::metric_at(const Vec& p) const {
  require_in_chart(p);
  Mat g = Mat::Identity(dim_, dim_);
  switch (kind_) {
    case FieldKind::mapping_torus:
      g(dim_ - 2, dim_ - 2) = phi_->eval(p(dim_ - 1));
      break;
    case FieldKind::cone_circle: {
      const double t = p(1);
      g(0, 0) = radius_ * radius_ * t * t;
      break;
    }
    case FieldKind::cone_sphere: {
      const double th = p(0), t = p(2);
      const double rt2 = radius_ * radius_ * t * t;
      g(0, 0) = rt2;
      g(1, 1) = rt2 * std::sin(th) * std::sin(th);
      break;
    }
    case FieldKind::flat_torus:
      break;
  }
  return g;
}

Christoffel MetricField::christoffel_at(const Vec& p) const {
  require_in_chart(p);
  Christoffel G(dim_, Mat::Zero(dim_, dim_));
  switch (kind_) {
    case FieldKind::mapping_torus: {
      const int y = dim_ - 2, z = dim_ - 1;
      const double phi = phi_->eval(p(z)), dphi = phi_->eval(p(z), 1);
      G[y](y, z) = G[y](z, y) = dphi / (2.0 * phi);
      G[z](y, y) = -dphi / 2.0;
      break;
    }
    case FieldKind::cone_circle: {
      const double t = p(1);
      G[0](0, 1) = G[0](1, 0) = 1.0 / t;
      G[1](0, 0) = -radius_ * radius_ * t;
      break;
    }
    case FieldKind::cone_sphere: {
      const double th = p(0), t = p(2);
      const double r2 = radius_ * radius_;
      G[0](0, 2) = G[0](2, 0) = 1.0 / t;
      G[0](1, 1) = -std::sin(th) * std::cos(th);
      G[1](1, 2) = G[1](2, 1) = 1.0 / t;
      G[1](0, 1) = G[1](1, 0) = std::cos(th) / std::sin(th);
      G[2](0, 0) = -r2 * t;
      G[2](1, 1) = -r2 * t * std::sin(th) * std::sin(th);
      break;
    }
    case FieldKind::flat_torus:
      break;
  }
  return G;
}

Christoffel MetricField::christoffel_fd(const Vec& p, double step) const {
  require_in_chart(p);
  const int d = dim_;
  std::vector<Mat> dg(d);
  for (int i = 0; i < d; ++i) {
    Vec pp = p, pm = p;
    pp(i) += step;
    pm(i) -= step;
    dg[i] = (metric_at(pp) - metric_at(pm)) / (2.0 * step);
  }
  Mat ginv = metric_at(p).inverse();
  Christoffel G(d, Mat::Zero(d, d));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        G[k](i, j) = 0.5 * s;
      }
  return G;
}

std::vector<Christoffel> MetricField::christoffel_derivatives(const Vec& p) const {
  const int d = dim_;
  std::vector<Christoffel> dG(d, Christoffel(d, Mat::Zero(d, d)));
  switch (kind_) {
    case FieldKind::mapping_torus: {
      const int y = d - 2, z = d - 1;
      const double phi = phi_->eval(p(z)), d1 = phi_->eval(p(z), 1), d2 = phi_->eval(p(z), 2);
      const double dw = (d2 * phi - d1 * d1) / (2.0 * phi * phi);
      dG[z][y](y, z) = dG[z][y](z, y) = dw;
      dG[z][z](y, y) = -d2 / 2.0;
      break;
    }
    case FieldKind::cone_circle: {
      const double t = p(1);
      dG[1][0](0, 1) = dG[1][0](1, 0) = -1.0 / (t * t);
      dG[1][1](0, 0) = -radius_ * radius_;
      break;
    }
    case FieldKind::cone_sphere: {
      const double th = p(0), t = p(2);
      const double r2 = radius_ * radius_;
      dG[2][0](0, 2) = dG[2][0](2, 0) = -1.0 / (t * t);
      dG[0][0](1, 1) = -std::cos(2.0 * th);
      dG[2][1](1, 2) = dG[2][1](2, 1) = -1.0 / (t * t);
      dG[0][1](0, 1) = dG[0][1](1, 0) = -1.0 / (std::sin(th) * std::sin(th));
      dG[2][2](0, 0) = -r2;
      dG[0][2](1, 1) = -r2 * t * std::sin(2.0 * th);
      dG[2][2](1, 1) = -r2 * std::sin(th) * std::sin(th);
      break;
    }
    case FieldKind::flat_torus:
      break;
  }
  return dG;
}

RiemannTensor MetricField::assemble_riemann(const Christoffel& G,
                                            const std::vector<Christoffel>& dG) const {
  const int d = dim_;
  RiemannTensor R;
  R.dim = d;
  R.a.assign(static_cast<size_t>(d) * d * d * d, 0.0);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double v = dG[i][l](j, k) - dG[j][l](i, k);
          for (int m = 0; m < d; ++m) v += G[l](i, m) * G[m](j, k) - G[l](j, m) * G[m](i, k);
          R(l, i, j, k) = v;
        }
  return R;
}

RiemannTensor MetricField::riemann_at(const Vec& p) const {
  return assemble_riemann(christoffel_at(p), christoffel_derivatives(p));
}

RiemannTensor MetricField::riemann_fd(const Vec& p, double step) const {
  require_in_chart(p);
  const int d = dim_;
  Christoffel G = christoffel_fd(p);
  std::vector<Christoffel> dG(d);
  for (int i = 0; i < d; ++i) {
    Vec pp = p, pm = p;
    pp(i) += step;
    pm(i) -= step;
    Christoffel Gp = christoffel_fd(pp), Gm = christoffel_fd(pm);
    Christoffel der(d);
    for (int k = 0; k < d; ++k) der[k] = (Gp[k] - Gm[k]) / (2.0 * step);
    dG[i] = std::move(der);
  }
  return assemble_riemann(G, dG);
}

double MetricField::sectional(const Vec& p, int i, int j) const {
  Mat g = metric_at(p);
  RiemannTensor R = riemann_at(p);
  double num = 0.0;
  for (int l = 0; l < dim_; ++l) num += g(l, i) * R(l, i, j, j);
  double den = g(i, i) * g(j, j) - g(i, j) * g(i, j);
  return num / den;
}

Mat MetricField::orthonormal_frame(const Vec& p) const {
  Mat g = metric_at(p);
  Eigen::LLT<Mat> llt(g);
  Mat L = llt.matrixL();
  return L.transpose().inverse();
}

namespace {

// Contract slot `slot` of a 4-index array with the columns of F.
std::vector<double> contract_slot(const std::vector<double>& T, int d, int slot, const Mat& F) {
  std::vector<double> out(T.size(), 0.0);
  int stride[4] = {d * d * d, d * d, d, 1};
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          int idx[4] = {a, b, c, e};
          double v = 0.0;
          for (int m = 0; m < d; ++m) {
            int src[4] = {a, b, c, e};
            src[slot] = m;
            v += F(m, idx[slot]) * T[src[0] * stride[0] + src[1] * stride[1] + src[2] * stride[2] + src[3]];
          }
          out[a * stride[0] + b * stride[1] + c * stride[2] + e] = v;
        }
  return out;
}

}  // namespace

double MetricField::curvature_norm(const Vec& p) const {
  Mat g = metric_at(p);
  Mat F = orthonormal_frame(p);
  RiemannTensor R = riemann_at(p);
  const int d = dim_;
  // lower the first index, then express every slot in the orthonormal frame
  std::vector<double> low(R.a.size(), 0.0);
  for (int m = 0; m < d; ++m)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double v = 0.0;
          for (int l = 0; l < d; ++l) v += g(m, l) * R(l, i, j, k);
          low[((m * d + i) * d + j) * d + k] = v;
        }
  for (int slot = 0; slot < 4; ++slot) low = contract_slot(low, d, slot, F);
  double best = 0.0;
  for (double v : low) best = std::max(best, std::abs(v));
  return best;
}

double deck_pullback_residual(const MetricField& field, const DeckElement& elem, const Vec& p) {
  field.require_in_chart(p);
  Vec image = elem.apply(p);
  field.require_in_chart(image);
  Mat lhs = elem.linear.transpose() * field.metric_at(image) * elem.linear;
  Mat rhs = elem.ratio * elem.ratio * field.metric_at(p);
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace simlab
