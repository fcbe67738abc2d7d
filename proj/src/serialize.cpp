#include "simlab/serialize.hpp"

#include <sstream>

namespace simlab {

namespace {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_rows_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

json to_json(const IntegerMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.n(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.n(); ++j) row.push_back(m.entries(i, j));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const SpectralSplit& s) {
  json j;
  j["version"] = 1;
  j["n"] = s.matrix.n();
  j["matrix"] = to_json(s.matrix);
  j["lambda"] = s.lambda;
  j["mu"] = s.mu;
  // basis vectors listed row-major, one vector per entry
  json stable = json::array();
  for (int c = 0; c < s.stable_basis.cols(); ++c) stable.push_back(vec_to_json(s.stable_basis.col(c)));
  j["stable_basis"] = stable;
  j["unstable_basis"] = vec_to_json(s.unstable_basis);
  j["b"] = mat_rows_to_json(s.b);
  return j;
}

SpectralSplit split_from_json(const json& j) {
  if (j.value("version", 0) != 1) throw Error(Errc::config_error, "unsupported split version");
  SpectralSplit s;
  const int n = j.at("n").get<int>();
  s.matrix.entries.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) s.matrix.entries(i, k) = j.at("matrix")[i][k].get<std::int64_t>();
  s.lambda = j.at("lambda").get<double>();
  s.mu = j.at("mu").get<double>();
  const auto& stable = j.at("stable_basis");
  s.stable_basis.resize(n, static_cast<int>(stable.size()));
  for (size_t c = 0; c < stable.size(); ++c)
    for (int i = 0; i < n; ++i) s.stable_basis(i, static_cast<int>(c)) = stable[c][i].get<double>();
  s.unstable_basis.resize(n);
  for (int i = 0; i < n; ++i) s.unstable_basis(i) = j.at("unstable_basis")[i].get<double>();
  const auto& b = j.at("b");
  const int q = static_cast<int>(b.size());
  s.b.resize(q, q);
  for (int i = 0; i < q; ++i)
    for (int k = 0; k < q; ++k) s.b(i, k) = b[i][k].get<double>();
  return s;
}

json to_json(const CertifyReport& r) {
  json j;
  j["subspace_residual"] = r.subspace_residual;
  j["similarity_residual"] = r.similarity_residual;
  j["unimodularity_residual"] = r.unimodularity_residual;
  j["b_min_eigenvalue"] = r.b_min_eigenvalue;
  j["tol"] = r.tol;
  j["pass"] = r.pass;
  return j;
}

json to_json(const Trichotomy& t) {
  json j;
  j["verdict"] = verdict_name(t.verdict);
  j["flat_dim"] = t.flat_dim;
  j["irreducible_dim"] = t.irreducible_dim;
  json blocks = json::array();
  for (const auto& b : t.blocks) {
    json jb;
    jb["dim"] = b.dim;
    jb["fixed"] = b.fixed;
    jb["basis"] = mat_rows_to_json(b.basis);
    jb["curvature_indicator"] = b.curvature_indicator;
    blocks.push_back(jb);
  }
  j["blocks"] = blocks;
  j["tolerances"] = {{"orthogonality", t.ortho_tol},
                     {"null_space", t.null_tol},
                     {"curvature_flatness", t.curvature_tol}};
  j["max_ortho_defect"] = t.max_ortho_defect;
  j["max_curvature"] = t.max_curvature;
  j["base_point_verdicts"] = t.base_point_verdicts;
  j["incompleteness_evidence"] = {{"finite_lifetime_found", t.finite_lifetime_found},
                                  {"example_finite_lifetime", t.example_finite_lifetime}};
  return j;
}

json to_json(const DensityReport& r) {
  json j;
  j["projections"] = r.projections;
  j["pairwise_ratios"] = r.pairwise_ratios;
  j["min_abs_projection"] = r.min_abs_projection;
  j["orbit_points"] = r.orbit_points;
  j["max_gap_normalized"] = r.max_gap_normalized;
  j["gap_threshold"] = r.gap_threshold;
  j["dense"] = r.dense;
  return j;
}

json to_json(const ClosureReport& r) {
  json j;
  j["q"] = r.q;
  j["closure_dim"] = r.d;
  j["z_level"] = r.z_level;
  j["slice_metric"] = mat_rows_to_json(r.slice_metric);
  j["metric_constancy_residual"] = r.metric_constancy_residual;
  j["flat"] = r.flat;
  j["bounds_ok"] = r.bounds_ok;
  j["covering_radius_stat"] = r.covering_radius_stat;
  j["density"] = to_json(r.density);
  return j;
}

json to_json(const EquicontinuityReport& r) {
  json j;
  j["word_length"] = r.word_length;
  j["m_bound"] = r.m_bound;
  j["min_power"] = r.min_power;
  j["max_power"] = r.max_power;
  j["raw_ratio_min"] = r.raw_ratio_min;
  j["raw_ratio_max"] = r.raw_ratio_max;
  j["raw_equicontinuous"] = r.raw_equicontinuous;
  j["weighted_max_deviation"] = r.weighted_max_deviation;
  j["weighted_equicontinuous"] = r.weighted_equicontinuous;
  j["words_enumerated"] = r.words_enumerated;
  j["epsilon0"] = r.epsilon0;
  json hist;
  for (const auto& [len, powers] : r.power_histogram) {
    json h;
    for (const auto& [p, c] : powers) h[std::to_string(p)] = c;
    hist[std::to_string(len)] = h;
  }
  j["power_histogram"] = hist;
  return j;
}

json to_json(const MuEstimate& e) {
  json j;
  j["value"] = e.value;
  j["censored"] = e.censored;
  j["finite_count"] = e.finite_count;
  json table = json::array();
  for (const auto& [idx, lt] : e.table) {
    json row;
    row["direction"] = idx;
    row["finite"] = lt.finite;
    row[lt.finite ? "lifetime" : "alive_at"] = lt.value;
    table.push_back(row);
  }
  j["table"] = table;
  return j;
}

std::string geodesic_csv(const MetricField& field, const GeodesicRecord& rec) {
  std::ostringstream out;
  const int d = field.dim();
  out << "t";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  for (int i = 0; i < d; ++i) out << ",v" << i;
  out << ",energy\n";
  out.precision(17);
  for (const auto& s : rec.samples) {
    out << s.t;
    for (int i = 0; i < d; ++i) out << "," << s.x(i);
    for (int i = 0; i < d; ++i) out << "," << s.v(i);
    out << "," << s.v.dot(field.metric_at(s.x) * s.v) << "\n";
  }
  return out.str();
}

std::string curvature_csv(const std::vector<std::pair<double, double>>& rows) {
  std::ostringstream out;
  out << "z,K\n";
  out.precision(17);
  for (const auto& [z, K] : rows) out << z << "," << K << "\n";
  return out.str();
}

}  // namespace simlab
