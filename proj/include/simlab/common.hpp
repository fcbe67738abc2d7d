// simlab - shared basics: error codes, deterministic RNG, small helpers

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace simlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Errc {
  domain_error,
  config_error,
  not_vertical,
  margin_violation,
  curvature_vanishes,
  tolerance_ambiguity,
  degenerate_projection,
  not_similarity,
  ill_conditioned,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// SplitMix64. Uniform doubles take the top 53 bits, so streams do not depend
// on library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::uint64_t state_;
  bool have_cache_ = false;
  double cache_ = 0.0;
};

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace simlab
