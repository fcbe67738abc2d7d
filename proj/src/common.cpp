#include "simlab/common.hpp"

#include <cmath>

namespace simlab {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::domain_error: return "DomainError";
    case Errc::config_error: return "ConfigError";
    case Errc::not_vertical: return "NotVertical";
    case Errc::margin_violation: return "MarginViolation";
    case Errc::curvature_vanishes: return "CurvatureVanishes";
    case Errc::tolerance_ambiguity: return "ToleranceAmbiguity";
    case Errc::degenerate_projection: return "DegenerateProjection";
    case Errc::not_similarity: return "NotSimilarity";
    case Errc::ill_conditioned: return "IllConditioned";
  }
  return "Error";
}

double Rng::normal() {
  if (have_cache_) {
    have_cache_ = false;
    return cache_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  cache_ = r * std::sin(2.0 * M_PI * u2);
  have_cache_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace simlab
