// Test-only oracles, independent of the library's computation paths.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Durand-Kerner root finder on ascending real coefficients.
inline std::vector<std::complex<double>> roots(const std::vector<double>& ascending) {
  const int n = static_cast<int>(ascending.size()) - 1;
  std::vector<std::complex<double>> z(n);
  std::complex<double> seed(0.4, 0.9);
  std::complex<double> acc(1.0, 0.0);
  for (int i = 0; i < n; ++i) {
    acc *= seed;
    z[i] = acc;
  }
  auto eval = [&](std::complex<double> x) {
    std::complex<double> p = ascending[n];
    for (int k = n - 1; k >= 0; --k) p = p * x + ascending[k];
    return p / ascending[n];
  };
  for (int it = 0; it < 500; ++it) {
    double moved = 0.0;
    for (int i = 0; i < n; ++i) {
      std::complex<double> num = eval(z[i]);
      std::complex<double> den(1.0, 0.0);
      for (int j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      std::complex<double> step = num / den;
      z[i] -= step;
      moved = std::max(moved, std::abs(step));
    }
    if (moved < 1e-15) break;
  }
  return z;
}

// Composite 2D Simpson quadrature over a rectangle.
template <typename F>
double integrate2d(F f, double x0, double x1, double y0, double y1, int n = 64) {
  auto w = [n](int i) { return i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double sum = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      double x = x0 + (x1 - x0) * i / n;
      double y = y0 + (y1 - y0) * j / n;
      sum += w(i) * w(j) * f(x, y);
    }
  return sum * (x1 - x0) * (y1 - y0) / (9.0 * n * n);
}

// Rotation angle of a 2x2 orthogonal block.
inline double rotation_angle(const Eigen::Matrix2d& R) { return std::atan2(R(1, 0), R(0, 0)); }

}  // namespace oracles
