// simlab - reproducible experiment configs and the pipeline runner.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simlab/serialize.hpp"

namespace simlab {

struct ExperimentConfig {
  std::string operation;  // search | build | curvature | geodesic | lifetime |
                          // mu | holonomy | classify | pseudogroup | closures
  std::string example;    // preset name; empty when matrix/q given explicitly

  // explicit manifold description (mapping torus)
  std::optional<std::vector<std::vector<std::int64_t>>> matrix;
  std::vector<std::pair<double, double>> fourier;

  // numeric options
  double tol = 1e-8;
  double t_max = 10.0;
  std::uint64_t seed = 1;
  int samples = 64;
  int threads = 1;

  // search
  int q = 1;
  std::int64_t bound = 3;

  // geodesic / lifetime / mu
  std::vector<double> x0;
  std::vector<double> v0;

  // curvature grid
  double grid_lo = 0.25;
  double grid_hi = 4.0;
  int grid_n = 64;

  // pseudogroup
  double chart_size = 0.25;
  int depth = 6;
  int word_length = 5;
  double m_bound = 2.0;

  // io
  std::string out_dir;
  bool json_stdout = true;
};

// Strict parse: unknown keys are a ConfigError.
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

struct RunResult {
  int exit_code = 0;
  json output;
  std::vector<std::string> files_written;
};

// Executes the configured pipeline. Exit code 0 on success, 2 when a verdict
// is withheld for tolerance ambiguity, 1 on errors. The output embeds the
// resolved config, its hash, the seed and a timestamp.
RunResult run(const ExperimentConfig& config);

MetricField field_from_config(const ExperimentConfig& config);

}  // namespace simlab
