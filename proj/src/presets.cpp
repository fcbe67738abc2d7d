#include "simlab/presets.hpp"

#include <charconv>

namespace simlab {

namespace {

SpectralSplit must_split(const IntegerMatrix& A) {
  auto r = spectral_split(A, 1e-9);
  if (!r.ok()) throw Error(Errc::ill_conditioned, "preset matrix failed to split: " + r.detail);
  return *r.split;
}

bool parse_suffix_double(const std::string& name, const std::string& prefix, double* out) {
  if (name.rfind(prefix, 0) != 0) return false;
  const std::string tail = name.substr(prefix.size());
  if (tail.empty()) return false;
  try {
    size_t pos = 0;
    *out = std::stod(tail, &pos);
    return pos == tail.size() && *out > 0;
  } catch (...) {
    return false;
  }
}

}  // namespace

SpectralSplit preset_split_mn() {
  return must_split(make_integer_matrix({{2, 1}, {1, 1}}));
}

SpectralSplit preset_split_plastic() {
  return must_split(companion_matrix({-1, -1, 0}));  // z^3 - z - 1
}

MetricField make_preset(const std::string& name) {
  if (name == "mn-q1") {
    SpectralSplit s = preset_split_mn();
    PhiProfile phi{1, s.lambda, {}};
    return MetricField::mapping_torus(std::move(s), phi);
  }
  if (name == "plastic-q2") {
    SpectralSplit s = preset_split_plastic();
    PhiProfile phi{2, s.lambda, {}};
    return MetricField::mapping_torus(std::move(s), phi);
  }
  double v = 0;
  if (parse_suffix_double(name, "flat-torus-", &v))
    return MetricField::flat_torus(static_cast<int>(v));
  if (parse_suffix_double(name, "cone-sphere-", &v))
    return MetricField::cone({ConeBase::Kind::sphere, v});
  if (parse_suffix_double(name, "cone-circle-", &v))
    return MetricField::cone({ConeBase::Kind::circle, v});
  throw Error(Errc::config_error, "unknown preset: " + name);
}

bool is_preset_name(const std::string& name) {
  try {
    make_preset(name);
    return true;
  } catch (...) {
    return false;
  }
}

}  // namespace simlab
