#include "simlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

#include <Eigen/Eigenvalues>

namespace simlab {

namespace {

constexpr double kImagTol = 1e-9;

}  // namespace

std::int64_t IntegerMatrix::det() const {
  // Bareiss elimination; divisions are exact.
  const int m = n();
  if (m == 0) return 1;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> a = entries;
  std::int64_t sign = 1;
  std::int64_t prev = 1;
  for (int k = 0; k + 1 < m; ++k) {
    if (a(k, k) == 0) {
      int p = -1;
      for (int r = k + 1; r < m; ++r)
        if (a(r, k) != 0) {
          p = r;
          break;
        }
      if (p < 0) return 0;
      a.row(k).swap(a.row(p));
      sign = -sign;
    }
    for (int i = k + 1; i < m; ++i)
      for (int j = k + 1; j < m; ++j)
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    prev = a(k, k);
  }
  return sign * a(m - 1, m - 1);
}

IntegerMatrix make_integer_matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  const int n = static_cast<int>(rows.size());
  IntegerMatrix A;
  A.entries.resize(n, n);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (auto v : row) A.entries(i, j++) = v;
    ++i;
  }
  return A;
}

IntegerMatrix companion_matrix(const std::vector<std::int64_t>& monic_tail) {
  const int n = static_cast<int>(monic_tail.size());
  IntegerMatrix A;
  A.entries = IntMat::Zero(n, n);
  for (int i = 1; i < n; ++i) A.entries(i, i - 1) = 1;
  for (int i = 0; i < n; ++i) A.entries(i, n - 1) = -monic_tail[i];
  return A;
}

std::vector<std::int64_t> characteristic_polynomial(const IntegerMatrix& A) {
  // Faddeev-LeVerrier; all intermediate divisions are exact.
  const int n = A.n();
  std::vector<std::int64_t> c(n + 1, 0);
  c[n] = 1;
  IntMat M = A.entries;
  c[n - 1] = -M.trace();
  for (int k = 2; k <= n; ++k) {
    IntMat shifted = M;
    for (int i = 0; i < n; ++i) shifted(i, i) += c[n - k + 1];
    M = A.entries * shifted;
    c[n - k] = -M.trace() / k;
  }
  return c;
}

std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& ascending) {
  const int deg = static_cast<int>(ascending.size()) - 1;
  std::vector<std::complex<double>> roots;
  if (deg <= 0) return roots;

  const double lead = ascending[deg];
  Mat comp = Mat::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -ascending[i] / lead;

  Eigen::EigenSolver<Mat> es(comp);
  auto horner = [&](std::complex<double> z, std::complex<double>* dp) {
    std::complex<double> p = ascending[deg], d = 0.0;
    for (int k = deg - 1; k >= 0; --k) {
      d = d * z + p;
      p = p * z + ascending[k];
    }
    if (dp) *dp = d;
    return p;
  };
  for (int i = 0; i < deg; ++i) {
    std::complex<double> z(es.eigenvalues()(i).real(), es.eigenvalues()(i).imag());
    for (int it = 0; it < 12; ++it) {
      std::complex<double> d;
      std::complex<double> p = horner(z, &d);
      if (std::abs(d) < 1e-300) break;
      std::complex<double> step = p / d;
      z -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    roots.push_back(z);
  }
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

namespace {

// Real monic polynomial with the given roots (conjugate pairs matched up).
std::vector<double> real_polynomial_from_roots(std::vector<std::complex<double>> roots) {
  std::vector<double> p{1.0};
  auto mul = [&](const std::vector<double>& f) {
    std::vector<double> out(p.size() + f.size() - 1, 0.0);
    for (size_t i = 0; i < p.size(); ++i)
      for (size_t j = 0; j < f.size(); ++j) out[i + j] += p[i] * f[j];
    p = out;
  };
  while (!roots.empty()) {
    auto r = roots.back();
    roots.pop_back();
    if (std::abs(r.imag()) < kImagTol * std::max(1.0, std::abs(r))) {
      mul({-r.real(), 1.0});
    } else {
      auto conj = std::conj(r);
      auto best = roots.end();
      double bd = 1e300;
      for (auto it = roots.begin(); it != roots.end(); ++it) {
        double d = std::abs(*it - conj);
        if (d < bd) {
          bd = d;
          best = it;
        }
      }
      if (best != roots.end()) roots.erase(best);
      mul({std::norm(r), -2.0 * r.real(), 1.0});
    }
  }
  // ascending order: p currently ascending by construction
  return p;
}

Mat evaluate_polynomial(const std::vector<double>& ascending, const Mat& A) {
  const int n = static_cast<int>(A.rows());
  Mat P = Mat::Zero(n, n);
  for (int k = static_cast<int>(ascending.size()) - 1; k >= 0; --k) {
    P = P * A;
    P.diagonal().array() += ascending[k];
  }
  return P;
}

// Orthonormal basis of the numerical kernel of P (the k smallest right
// singular vectors).
Mat kernel_basis(const Mat& P, int k) {
  Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(k);
}

std::vector<Mat> sym_basis(int q) {
  std::vector<Mat> basis;
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) {
      Mat E = Mat::Zero(q, q);
      if (i == j) {
        E(i, i) = 1.0;
      } else {
        E(i, j) = E(j, i) = M_SQRT1_2;
      }
      basis.push_back(E);
    }
  return basis;
}

}  // namespace

SimilarityForm similarity_form(const Mat& As, double lambda, double tol) {
  SimilarityForm out;
  const int q = static_cast<int>(As.rows());
  if (q == 1) {
    if (std::abs(std::abs(As(0, 0)) - lambda) > std::max(tol, 1e-9) * std::max(1.0, lambda)) {
      out.detail = "1x1 restriction modulus disagrees with lambda";
      return out;
    }
    out.ok = true;
    out.b = Mat::Ones(1, 1);
    return out;
  }

  // Fixed points of b -> lambda^{-2} As^T b As on symmetric matrices.
  auto basis = sym_basis(q);
  const int m = static_cast<int>(basis.size());
  Mat K(m, m);
  const double il2 = 1.0 / (lambda * lambda);
  for (int a = 0; a < m; ++a) {
    Mat T = il2 * As.transpose() * basis[a] * As;
    for (int c = 0; c < m; ++c) {
      // coefficients in the orthonormal sym basis
      K(c, a) = (T.array() * basis[c].array()).sum();
    }
  }
  Mat KmI = K - Mat::Identity(m, m);
  Eigen::JacobiSVD<Mat> svd(KmI, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  int null_dim = 0;
  for (int i = m - 1; i >= 0; --i) {
    if (sv(i) <= 1e-8 * std::max(1.0, smax))
      ++null_dim;
    else
      break;
  }
  if (null_dim == 0) {
    out.detail = "no fixed symmetric form (restriction not conjugate to lambda * orthogonal)";
    return out;
  }
  Mat N = svd.matrixV().rightCols(null_dim);

  auto candidate = [&](const Vec& w) {
    Mat B = Mat::Zero(q, q);
    for (int i = 0; i < null_dim; ++i) {
      Vec col = N.col(i);
      for (int a = 0; a < m; ++a) B += w(i) * col(a) * basis[a];
    }
    return Mat(0.5 * (B + B.transpose()));
  };

  std::vector<Vec> weights;
  for (int i = 0; i < null_dim; ++i) {
    Vec w = Vec::Zero(null_dim);
    w(i) = 1.0;
    weights.push_back(w);
    weights.push_back(-w);
  }
  weights.push_back(Vec::Ones(null_dim));
  weights.push_back(-Vec::Ones(null_dim));
  Rng rng(0x51AB5EEDull);
  for (int t = 0; t < 32; ++t) {
    Vec w(null_dim);
    for (int i = 0; i < null_dim; ++i) w(i) = rng.uniform(-1.0, 1.0);
    weights.push_back(w);
  }

  for (const auto& w : weights) {
    Mat B = candidate(w);
    if (B.trace() < 0) B = -B;
    Eigen::SelfAdjointEigenSolver<Mat> eig(B);
    double mn = eig.eigenvalues().minCoeff();
    double mx = eig.eigenvalues().maxCoeff();
    if (mn <= 1e-10 * std::max(1.0, std::abs(mx))) continue;
    double det = B.determinant();
    B /= std::pow(det, 1.0 / q);
    double res = (As.transpose() * B * As - lambda * lambda * B).cwiseAbs().maxCoeff() /
                 B.cwiseAbs().maxCoeff();
    if (res <= std::max(tol, 1e-9)) {
      out.ok = true;
      out.b = B;
      return out;
    }
  }
  out.detail = "fixed forms exist but none is positive definite";
  return out;
}

SplitResult spectral_split(const IntegerMatrix& A, double tol) {
  if (tol <= 0) throw Error(Errc::domain_error, "spectral_split: tol must be positive");
  if (!A.unimodular()) throw Error(Errc::domain_error, "spectral_split: matrix is not unimodular");

  SplitResult res;
  const int n = A.n();
  const int q = n - 1;

  auto cp = characteristic_polynomial(A);
  std::vector<double> cpd(cp.begin(), cp.end());
  auto roots = polynomial_roots(cpd);

  for (const auto& r : roots) res.moduli.push_back(std::abs(r));
  std::sort(res.moduli.begin(), res.moduli.end());

  // Root pattern: exactly one root of modulus > 1, and it must be real.
  int unstable_count = 0;
  std::complex<double> mu_root;
  std::vector<std::complex<double>> stable_roots;
  for (const auto& r : roots) {
    if (std::abs(r) > 1.0 + kImagTol) {
      ++unstable_count;
      mu_root = r;
    } else {
      stable_roots.push_back(r);
    }
  }
  if (unstable_count != 1) {
    res.detail = "expected exactly one root of modulus > 1, found " + std::to_string(unstable_count);
    return res;
  }
  if (std::abs(mu_root.imag()) > kImagTol * std::max(1.0, std::abs(mu_root))) {
    res.detail = "unstable root is not real";
    return res;
  }
  for (const auto& r : stable_roots) {
    if (std::abs(std::abs(r) - 1.0) <= kImagTol) {
      res.detail = "root on the unit circle";
      return res;
    }
  }
  double lambda = 0.0;
  {
    double logsum = 0.0;
    for (const auto& r : stable_roots) logsum += std::log(std::abs(r));
    lambda = std::exp(logsum / q);
  }
  for (const auto& r : stable_roots) {
    if (std::abs(std::abs(r) - lambda) > std::max(tol, 1e-9) * lambda) {
      res.detail = "stable moduli are not all equal";
      return res;
    }
  }

  const Mat Ad = A.real();
  Mat S;
  if (q > 0) {
    auto ps = real_polynomial_from_roots(stable_roots);
    Mat P = evaluate_polynomial(ps, Ad);
    S = kernel_basis(P, q);
  }
  Mat Au = Ad;
  Au.diagonal().array() -= mu_root.real();
  Vec u = kernel_basis(Au, 1).col(0);

  Mat As = S.transpose() * Ad * S;
  const double scale = Ad.cwiseAbs().maxCoeff();
  double sub_res = (Ad * S - S * As).cwiseAbs().maxCoeff();
  double u_res = (Ad * u - mu_root.real() * u).cwiseAbs().maxCoeff();
  if (std::max(sub_res, u_res) > tol * std::max(1.0, scale)) {
    res.status = SplitStatus::ill_conditioned;
    res.detail = "invariant subspace residual " + std::to_string(std::max(sub_res, u_res)) +
                 " exceeds tolerance";
    return res;
  }

  auto form = similarity_form(As, lambda, tol);
  if (!form.ok) {
    res.detail = "stable restriction is not a similarity: " + form.detail;
    return res;
  }

  SpectralSplit split;
  split.matrix = A;
  split.lambda = lambda;
  split.mu = mu_root.real();
  split.stable_basis = S;
  split.unstable_basis = u;
  split.b = form.b;
  res.split = std::move(split);
  res.status = SplitStatus::ok;
  return res;
}

CertifyReport certify(const SpectralSplit& split, double tol) {
  CertifyReport r;
  r.tol = tol;
  const Mat Ad = split.matrix.real();
  const Mat& S = split.stable_basis;
  Mat As = S.transpose() * Ad * S;
  r.subspace_residual = std::max((Ad * S - S * As).cwiseAbs().maxCoeff(),
                                 (Ad * split.unstable_basis - split.mu * split.unstable_basis)
                                     .cwiseAbs()
                                     .maxCoeff());
  r.similarity_residual =
      (As.transpose() * split.b * As - split.lambda * split.lambda * split.b).cwiseAbs().maxCoeff() /
      split.b.cwiseAbs().maxCoeff();
  r.unimodularity_residual =
      std::abs(std::abs(split.mu) * std::pow(split.lambda, split.q()) - 1.0);
  Eigen::SelfAdjointEigenSolver<Mat> eig(split.b);
  r.b_min_eigenvalue = eig.eigenvalues().minCoeff();

  r.subspace_ok = r.subspace_residual < tol;
  r.similarity_ok = r.similarity_residual < tol;
  r.unimodularity_ok = r.unimodularity_residual < tol;
  r.b_positive = r.b_min_eigenvalue > 0;
  r.pass = r.subspace_ok && r.similarity_ok && r.unimodularity_ok && r.b_positive;
  return r;
}

std::vector<SpectralSplit> search_anosov(int q, std::int64_t coeff_bound, int threads) {
  if (q < 1) throw Error(Errc::domain_error, "search_anosov: q must be >= 1");
  if (coeff_bound < 1) throw Error(Errc::domain_error, "search_anosov: coeff_bound must be >= 1");

  const int n = q + 1;
  std::vector<IntegerMatrix> candidates;
  std::set<std::vector<std::int64_t>> seen;

  auto push = [&](const IntegerMatrix& A) {
    std::vector<std::int64_t> key(A.entries.data(), A.entries.data() + n * n);
    if (seen.insert(key).second) candidates.push_back(A);
  };

  // Companion matrices, lexicographic on (c0, c1, ..., c_{n-1}).
  std::vector<std::int64_t> tail(n, 0);
  auto enumerate = [&](auto&& self, int pos) -> void {
    if (pos == n) {
      push(companion_matrix(tail));
      return;
    }
    if (pos == 0) {
      for (std::int64_t c : {-1, 1}) {
        tail[0] = c;
        self(self, 1);
      }
    } else {
      for (std::int64_t c = -coeff_bound; c <= coeff_bound; ++c) {
        tail[pos] = c;
        self(self, pos + 1);
      }
    }
  };
  enumerate(enumerate, 0);

  if (q == 1) {
    for (std::int64_t a = -coeff_bound; a <= coeff_bound; ++a)
      for (std::int64_t b = -coeff_bound; b <= coeff_bound; ++b)
        for (std::int64_t c = -coeff_bound; c <= coeff_bound; ++c)
          for (std::int64_t d = -coeff_bound; d <= coeff_bound; ++d) {
            std::int64_t det = a * d - b * c;
            if (det != 1 && det != -1) continue;
            IntegerMatrix A;
            A.entries.resize(2, 2);
            A.entries << a, b, c, d;
            push(A);
          }
  }

  std::vector<std::optional<SpectralSplit>> results(candidates.size());
  auto work = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      auto r = spectral_split(candidates[i], 1e-9);
      if (r.ok()) results[i] = std::move(r.split);
    }
  };
  if (threads <= 1 || candidates.size() < 64) {
    work(0, candidates.size());
  } else {
    const size_t chunk = (candidates.size() + threads - 1) / threads;
    std::vector<std::future<void>> futs;
    for (size_t lo = 0; lo < candidates.size(); lo += chunk)
      futs.push_back(std::async(std::launch::async, work, lo,
                                std::min(lo + chunk, candidates.size())));
    for (auto& f : futs) f.get();
  }

  std::vector<SpectralSplit> out;
  for (auto& r : results)
    if (r) out.push_back(std::move(*r));
  return out;
}

}  // namespace simlab
