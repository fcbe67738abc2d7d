#include "simlab/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

#include "simlab/presets.hpp"

namespace simlab {

namespace {

const std::set<std::string> kOperations = {"search",   "build",    "curvature", "geodesic",
                                           "lifetime", "mu",       "holonomy",  "classify",
                                           "pseudogroup", "closures"};

const std::set<std::string> kKeys = {
    "operation", "example", "matrix",     "fourier", "tol",    "t_max",      "seed",
    "samples",   "threads", "q",          "bound",   "x0",     "v0",         "grid_lo",
    "grid_hi",   "grid_n",  "chart_size", "depth",   "word_length", "m_bound", "out_dir",
    "json_stdout"};

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

void write_file(const std::string& dir, const std::string& name, const std::string& content,
                std::vector<std::string>* written) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / name).string();
  std::ofstream out(path);
  out << content;
  written->push_back(path);
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  for (const auto& [key, _] : j.items())
    if (!kKeys.count(key)) throw Error(Errc::config_error, "unknown config key: " + key);

  ExperimentConfig c;
  c.operation = j.value("operation", "");
  c.example = j.value("example", "");
  if (j.contains("matrix"))
    c.matrix = j.at("matrix").get<std::vector<std::vector<std::int64_t>>>();
  if (j.contains("fourier"))
    for (const auto& row : j.at("fourier"))
      c.fourier.emplace_back(row[0].get<double>(), row[1].get<double>());
  c.tol = j.value("tol", c.tol);
  c.t_max = j.value("t_max", c.t_max);
  c.seed = j.value("seed", c.seed);
  c.samples = j.value("samples", c.samples);
  c.threads = j.value("threads", c.threads);
  c.q = j.value("q", c.q);
  c.bound = j.value("bound", c.bound);
  if (j.contains("x0")) c.x0 = j.at("x0").get<std::vector<double>>();
  if (j.contains("v0")) c.v0 = j.at("v0").get<std::vector<double>>();
  c.grid_lo = j.value("grid_lo", c.grid_lo);
  c.grid_hi = j.value("grid_hi", c.grid_hi);
  c.grid_n = j.value("grid_n", c.grid_n);
  c.chart_size = j.value("chart_size", c.chart_size);
  c.depth = j.value("depth", c.depth);
  c.word_length = j.value("word_length", c.word_length);
  c.m_bound = j.value("m_bound", c.m_bound);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.json_stdout = j.value("json_stdout", c.json_stdout);
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["operation"] = c.operation;
  j["example"] = c.example;
  if (c.matrix) j["matrix"] = *c.matrix;
  if (!c.fourier.empty()) {
    json f = json::array();
    for (auto [a, b] : c.fourier) f.push_back({a, b});
    j["fourier"] = f;
  }
  j["tol"] = c.tol;
  j["t_max"] = c.t_max;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["threads"] = c.threads;
  j["q"] = c.q;
  j["bound"] = c.bound;
  if (!c.x0.empty()) j["x0"] = c.x0;
  if (!c.v0.empty()) j["v0"] = c.v0;
  j["grid_lo"] = c.grid_lo;
  j["grid_hi"] = c.grid_hi;
  j["grid_n"] = c.grid_n;
  j["chart_size"] = c.chart_size;
  j["depth"] = c.depth;
  j["word_length"] = c.word_length;
  j["m_bound"] = c.m_bound;
  j["out_dir"] = c.out_dir;
  j["json_stdout"] = c.json_stdout;
  return j;
}

void validate(const ExperimentConfig& c) {
  if (!kOperations.count(c.operation))
    throw Error(Errc::config_error, "unknown operation: '" + c.operation + "'");
  if (c.tol <= 0) throw Error(Errc::config_error, "tol must be positive");
  if (c.t_max <= 0) throw Error(Errc::config_error, "t_max must be positive");
  if (c.samples < 1) throw Error(Errc::config_error, "samples must be >= 1");
  if (c.threads < 1) throw Error(Errc::config_error, "threads must be >= 1");
  if (c.chart_size <= 0) throw Error(Errc::config_error, "chart_size must be positive");
  if (c.grid_n < 2) throw Error(Errc::config_error, "grid_n must be >= 2");
  if (c.word_length < 1) throw Error(Errc::config_error, "word_length must be >= 1");
  if (c.m_bound <= 1) throw Error(Errc::config_error, "m_bound must exceed 1");
}

MetricField field_from_config(const ExperimentConfig& config) {
  if (!config.example.empty()) {
    MetricField f = make_preset(config.example);
    if (f.kind() == FieldKind::mapping_torus && !config.fourier.empty()) {
      SpectralSplit s = f.split();
      PhiProfile phi{s.q(), s.lambda, config.fourier};
      return MetricField::mapping_torus(std::move(s), phi);
    }
    return f;
  }
  if (config.matrix) {
    const auto& rows = *config.matrix;
    const int n = static_cast<int>(rows.size());
    IntegerMatrix A;
    A.entries.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A.entries(i, j) = rows[i][j];
    auto r = spectral_split(A, 1e-9);
    if (!r.ok()) throw Error(Errc::config_error, "matrix is not admissible: " + r.detail);
    PhiProfile phi{r.split->q(), r.split->lambda, config.fourier};
    return MetricField::mapping_torus(std::move(*r.split), phi);
  }
  throw Error(Errc::config_error, "no manifold given: set 'example' or 'matrix'");
}

RunResult run(const ExperimentConfig& config) {
  validate(config);
  RunResult result;
  json out;
  out["version"] = 1;
  json cfg = config_to_json(config);
  out["config"] = cfg;
  out["config_hash"] = fnv1a(cfg.dump());
  out["seed"] = config.seed;
  out["generated_at"] = iso_timestamp();

  try {
    if (config.operation == "search") {
      auto splits = search_anosov(config.q, config.bound, config.threads);
      json list = json::array();
      for (const auto& s : splits) {
        json js = to_json(s);
        js["certify"] = to_json(certify(s, config.tol));
        list.push_back(js);
      }
      out["results"] = list;
      out["count"] = splits.size();
    } else if (config.operation == "build") {
      MetricField f = field_from_config(config);
      out["dim"] = f.dim();
      if (f.kind() == FieldKind::mapping_torus) {
        out["split"] = to_json(f.split());
        out["certify"] = to_json(certify(f.split(), config.tol));
      }
    } else if (config.operation == "curvature") {
      MetricField f = field_from_config(config);
      const int d = f.dim();
      std::vector<std::pair<double, double>> rows;
      json jrows = json::array();
      for (int i = 0; i < config.grid_n; ++i) {
        const double z = config.grid_lo +
                         (config.grid_hi - config.grid_lo) * i / (config.grid_n - 1);
        Vec p = Vec::Zero(d);
        p(d - 1) = z;
        if (f.kind() == FieldKind::cone_sphere) p(0) = M_PI / 2;
        const double K = d >= 2 ? f.sectional(p, d - 2, d - 1) : 0.0;
        rows.emplace_back(z, K);
        jrows.push_back({{"z", z}, {"K", K}});
      }
      out["rows"] = jrows;
      if (!config.out_dir.empty())
        write_file(config.out_dir, "curvature.csv", curvature_csv(rows), &result.files_written);
    } else if (config.operation == "geodesic" || config.operation == "lifetime") {
      MetricField f = field_from_config(config);
      const int d = f.dim();
      if (static_cast<int>(config.x0.size()) != d || static_cast<int>(config.v0.size()) != d)
        throw Error(Errc::config_error, "x0 and v0 must have dimension " + std::to_string(d));
      Vec x0 = Eigen::Map<const Vec>(config.x0.data(), d);
      Vec v0 = Eigen::Map<const Vec>(config.v0.data(), d);
      IntegratorOptions io;
      io.t_max = config.t_max;
      double e = v0.dot(f.metric_at(x0) * v0);
      Vec v = v0 / std::sqrt(e);
      GeodesicRecord rec = integrate_geodesic(f, x0, v, io);
      out["termination"] = rec.termination == Termination::boundary_escape ? "BoundaryEscape"
                           : rec.termination == Termination::max_time      ? "MaxTime"
                                                                           : "StepUnderflow";
      out["lifetime"] = rec.lifetime.finite ? json(rec.lifetime.value) : json(nullptr);
      out["alive_at"] = rec.lifetime.finite ? json(nullptr) : json(rec.lifetime.value);
      out["energy_drift"] = rec.energy_drift;
      out["steps_recorded"] = rec.samples.size();
      if (!config.out_dir.empty())
        write_file(config.out_dir, "trajectory.csv", geodesic_csv(f, rec), &result.files_written);
    } else if (config.operation == "mu") {
      MetricField f = field_from_config(config);
      const int d = f.dim();
      Vec x0;
      if (config.x0.empty()) {
        x0 = Vec::Zero(d);
        if (f.has_boundary()) x0(d - 1) = 1.0;
        if (f.kind() == FieldKind::cone_sphere) x0(0) = M_PI / 2;
      } else if (static_cast<int>(config.x0.size()) == d) {
        x0 = Eigen::Map<const Vec>(config.x0.data(), d);
      } else {
        throw Error(Errc::config_error, "x0 must have dimension " + std::to_string(d));
      }
      IntegratorOptions io;
      io.t_max = config.t_max;
      MuEstimate est = mu_estimate(f, x0, config.samples, io, config.seed);
      out["mu"] = to_json(est);
    } else if (config.operation == "holonomy" || config.operation == "classify") {
      MetricField f = field_from_config(config);
      ClassifyOptions opts;
      opts.seed = config.seed;
      Trichotomy t = classify(f, opts);
      out["trichotomy"] = to_json(t);
    } else if (config.operation == "pseudogroup") {
      MetricField f = field_from_config(config);
      ChartCover cover = build_cover(f, config.chart_size, config.depth);
      EquicontinuityReport rep = equicontinuity_report(cover, config.word_length, config.m_bound);
      out["equicontinuity"] = to_json(rep);
      out["charts"] = cover.charts.size();
      out["transitions"] = cover.transitions.size();
    } else if (config.operation == "closures") {
      MetricField f = field_from_config(config);
      const int d = f.dim();
      Vec base = Vec::Zero(d);
      base(d - 1) = config.x0.empty() ? 1.0 : config.x0.back();
      ClosureReport rep = closure_analyze(f, base, config.samples >= 1000 ? config.samples : 100000);
      out["closure"] = to_json(rep);
      if (!config.out_dir.empty()) {
        std::ostringstream csv;
        csv << "projection\n";
        csv.precision(17);
        for (double t : rep.density.projections) csv << t << "\n";
        write_file(config.out_dir, "orbit.csv", csv.str(), &result.files_written);
      }
    }
    result.exit_code = 0;
  } catch (const Error& e) {
    out["error"] = {{"kind", errc_name(e.code())}, {"message", e.what()}};
    result.exit_code = e.code() == Errc::tolerance_ambiguity ? 2 : 1;
  }

  result.output = out;
  if (!config.out_dir.empty())
    write_file(config.out_dir, "result.json", out.dump(2) + "\n", &result.files_written);
  return result;
}

}  // namespace simlab
