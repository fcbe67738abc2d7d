// simlab - integer toral automorphisms with a stable similarity splitting.
//
// A unimodular A in GL_{q+1}(Z) qualifies when its spectrum consists of one
// real eigenvalue mu with |mu| > 1 and q eigenvalues of a common modulus
// lambda < 1 such that the restriction of A to the stable subspace is
// lambda times a b-orthogonal map for some positive definite form b.

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simlab/common.hpp"

namespace simlab {

using IntMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct IntegerMatrix {
  IntMat entries;

  int n() const { return static_cast<int>(entries.rows()); }
  std::int64_t det() const;  // fraction-free Bareiss, exact
  bool unimodular() const {
    auto d = det();
    return d == 1 || d == -1;
  }
  Mat real() const { return entries.cast<double>(); }
};

IntegerMatrix make_integer_matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

// Companion matrix of z^n + c[n-1] z^{n-1} + ... + c[1] z + c[0].
IntegerMatrix companion_matrix(const std::vector<std::int64_t>& monic_tail);

// Exact coefficients of det(zI - A), ascending order, monic.
std::vector<std::int64_t> characteristic_polynomial(const IntegerMatrix& A);

// Roots of a real polynomial in ascending coefficient order; companion
// eigenvalues polished by complex Newton steps.
std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& ascending);

struct SpectralSplit {
  IntegerMatrix matrix;
  double lambda = 0.0;   // common stable modulus, in (0,1)
  double mu = 0.0;       // real unstable eigenvalue (signed), |mu| > 1
  Mat stable_basis;      // (q+1) x q, orthonormal columns spanning E^s
  Vec unstable_basis;    // unit vector spanning E^u
  Mat b;                 // q x q SPD similarity form in the stable_basis frame

  int q() const { return static_cast<int>(stable_basis.cols()); }
  Mat stable_restriction() const { return stable_basis.transpose() * matrix.real() * stable_basis; }
};

enum class SplitStatus { ok, rejected_spectrum, ill_conditioned };

struct SplitResult {
  SplitStatus status = SplitStatus::rejected_spectrum;
  std::optional<SpectralSplit> split;
  std::string detail;
  std::vector<double> moduli;  // observed root moduli, sorted ascending

  bool ok() const { return status == SplitStatus::ok; }
};

SplitResult spectral_split(const IntegerMatrix& A, double tol = 1e-9);

struct SimilarityForm {
  bool ok = false;
  Mat b;               // det-normalized SPD solution of As^T b As = lambda^2 b
  std::string detail;  // NotSimilarity reason when !ok
};

SimilarityForm similarity_form(const Mat& stable_restriction, double lambda, double tol = 1e-9);

struct CertifyReport {
  double subspace_residual = 0.0;       // max(||A S - S As||, ||A u - mu u||)
  double similarity_residual = 0.0;     // ||As^T b As - lambda^2 b|| / ||b||
  double unimodularity_residual = 0.0;  // | |mu| lambda^q - 1 |
  double b_min_eigenvalue = 0.0;
  double tol = 0.0;
  bool subspace_ok = false;
  bool similarity_ok = false;
  bool unimodularity_ok = false;
  bool b_positive = false;
  bool pass = false;
};

CertifyReport certify(const SpectralSplit& split, double tol);

// Enumerates companion matrices of monic integer polynomials of degree q+1
// with constant term +-1 and middle coefficients bounded by coeff_bound;
// for q = 1 additionally every unimodular 2x2 with bounded entries. Returns
// the certified splits in a canonical (enumeration) order.
std::vector<SpectralSplit> search_anosov(int q, std::int64_t coeff_bound, int threads = 1);

}  // namespace simlab
