// simlab - JSON and CSV serialization of results (schema version 1).

#pragma once

#include <string>

#include <json.hpp>

#include "simlab/geodesics.hpp"
#include "simlab/holonomy.hpp"
#include "simlab/lattice.hpp"
#include "simlab/leaf_closures.hpp"
#include "simlab/pseudogroup.hpp"

namespace simlab {

using json = nlohmann::ordered_json;

json to_json(const IntegerMatrix& m);
json to_json(const SpectralSplit& s);       // integer entries exact, reals as doubles
SpectralSplit split_from_json(const json& j);
json to_json(const CertifyReport& r);
json to_json(const Trichotomy& t);
json to_json(const DensityReport& r);
json to_json(const ClosureReport& r);
json to_json(const EquicontinuityReport& r);
json to_json(const MuEstimate& e);

std::string geodesic_csv(const MetricField& field, const GeodesicRecord& rec);
std::string curvature_csv(const std::vector<std::pair<double, double>>& rows);  // z, K

}  // namespace simlab
