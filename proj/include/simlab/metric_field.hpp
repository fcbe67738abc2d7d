// simlab - metric families on chart domains.
//
// Three families are supported:
//   * mapping torus of a stable-similarity toral automorphism, adapted
//     coordinates (x_1..x_q, y, z) with metric diag(I_q, phi(z), 1), z > 0;
//   * metric cone over a circle or round sphere, coordinates (angles..., t)
//     with metric t^2 g_base + dt^2, t > 0;
//   * flat torus, identity metric.

#pragma once

#include <optional>
#include <vector>

#include "simlab/common.hpp"
#include "simlab/lattice.hpp"

namespace simlab {

// Self-similar warp phi(z) = z^{2q+2} * exp(P(log z)) with P periodic of
// period |log lambda|, so phi(lambda z) = lambda^{2q+2} phi(z) holds exactly.
struct PhiProfile {
  int q = 1;
  double lambda = 0.5;
  std::vector<std::pair<double, double>> fourier;  // (cos_k, sin_k), k = 1,2,...

  // order 0, 1 or 2; z must be positive.
  double eval(double z, int order = 0) const;
};

enum class FieldKind { mapping_torus, cone_circle, cone_sphere, flat_torus };

struct DeckElement {
  Mat linear;
  Vec offset;
  double ratio = 1.0;  // similarity ratio of the pullback
  int phi_power = 0;

  Vec apply(const Vec& p) const { return linear * p + offset; }
};

struct DeckGroup {
  std::vector<DeckElement> translations;  // lattice generators, ratio 1
  std::optional<DeckElement> phi;         // (x_s, y, z) -> (lambda O x_s, mu y, lambda z)
};

// Christoffel symbols Gamma^k_{ij}, stored as G[k](i,j).
using Christoffel = std::vector<Mat>;

// Riemann components R(l,i,j,k) with R(e_i,e_j)e_k = sum_l R(l,i,j,k) e_l.
struct RiemannTensor {
  int dim = 0;
  std::vector<double> a;

  double& operator()(int l, int i, int j, int k) {
    return a[((l * dim + i) * dim + j) * dim + k];
  }
  double operator()(int l, int i, int j, int k) const {
    return a[((l * dim + i) * dim + j) * dim + k];
  }
};

struct ConeBase {
  enum class Kind { circle, sphere } kind;
  double radius;
};

class MetricField {
 public:
  static MetricField mapping_torus(SpectralSplit split, PhiProfile phi);
  static MetricField cone(ConeBase base);
  static MetricField flat_torus(int dim);

  FieldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const SpectralSplit& split() const;
  const PhiProfile& phi() const;
  double cone_radius() const { return radius_; }

  // chart bounds on the last coordinate (z or t); other coordinates are free
  double boundary_min() const { return boundary_min_; }
  double boundary_max() const { return boundary_max_; }
  bool has_boundary() const { return kind_ != FieldKind::flat_torus; }
  bool in_chart(const Vec& p) const;
  void require_in_chart(const Vec& p) const;

  Mat metric_at(const Vec& p) const;
  Christoffel christoffel_at(const Vec& p) const;
  Christoffel christoffel_fd(const Vec& p, double step = 1e-5) const;

  RiemannTensor riemann_at(const Vec& p) const;                      // closed-form derivatives
  RiemannTensor riemann_fd(const Vec& p, double step = 1e-4) const;  // FD over christoffel_fd
  double sectional(const Vec& p, int i, int j) const;

  // g-orthonormal frame at p (columns), from the Cholesky factor of g.
  Mat orthonormal_frame(const Vec& p) const;

  // Largest |component| of the Riemann tensor in an orthonormal frame.
  double curvature_norm(const Vec& p) const;

  const DeckGroup& deck() const;

 private:
  MetricField() = default;

  FieldKind kind_ = FieldKind::flat_torus;
  int dim_ = 0;
  double radius_ = 1.0;
  double boundary_min_ = 0.0;
  double boundary_max_ = 0.0;
  std::optional<SpectralSplit> split_;
  std::optional<PhiProfile> phi_;
  DeckGroup deck_;

  // per-direction derivatives of the Christoffel symbols, dG[i][k](j,l)
  std::vector<Christoffel> christoffel_derivatives(const Vec& p) const;
  RiemannTensor assemble_riemann(const Christoffel& G, const std::vector<Christoffel>& dG) const;
};

MetricField make_cone(ConeBase base);

// sup-norm of (Ddeck)^T g(deck(p)) (Ddeck) - ratio^2 g(p).
double deck_pullback_residual(const MetricField& field, const DeckElement& elem, const Vec& p);

}  // namespace simlab
