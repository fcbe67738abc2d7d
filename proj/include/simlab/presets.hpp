// simlab - named example manifolds.

#pragma once

#include <string>

#include "simlab/metric_field.hpp"

namespace simlab {

// q = 1, A = [[2,1],[1,1]], phi(z) = z^4
SpectralSplit preset_split_mn();

// q = 2, companion matrix of z^3 - z - 1, phi(z) = z^6
SpectralSplit preset_split_plastic();

// Names: "mn-q1", "plastic-q2", "flat-torus-<d>", "cone-sphere-<r>",
// "cone-circle-<r>" (radius parsed from the suffix).
MetricField make_preset(const std::string& name);

bool is_preset_name(const std::string& name);

}  // namespace simlab
