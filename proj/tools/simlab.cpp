// simlab command line: reproducible experiments on similarity structures.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "simlab/experiment.hpp"

namespace {

int execute(const simlab::ExperimentConfig& config) {
  simlab::RunResult res = simlab::run(config);
  if (config.json_stdout) std::cout << res.output.dump(2) << std::endl;
  for (const auto& f : res.files_written) std::cerr << "wrote " << f << "\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simlab: similarity structures on mapping tori, cones and flat tori"};
  app.require_subcommand(0, 1);

  simlab::ExperimentConfig config;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (alternative to a subcommand)");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--example", config.example, "preset manifold name");
    cmd->add_option("--seed", config.seed, "RNG seed");
    cmd->add_option("--tol", config.tol, "certification tolerance");
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_option("--threads", config.threads, "worker thread cap");
    cmd->add_flag("--json,!--no-json", config.json_stdout, "print JSON to stdout");
  };

  auto* search = app.add_subcommand("search", "enumerate admissible integer matrices");
  search->add_option("--q", config.q, "stable dimension");
  search->add_option("--bound", config.bound, "coefficient bound");
  add_common(search);

  auto* build = app.add_subcommand("build", "build a manifold and certify its data");
  build->add_option("--matrix", [&config](const std::vector<std::string>& vals) {
    // row-major integers, n*n of them
    std::vector<std::int64_t> flat;
    for (const auto& v : vals) flat.push_back(std::stoll(v));
    const int n = static_cast<int>(std::round(std::sqrt(static_cast<double>(flat.size()))));
    if (n * n != static_cast<int>(flat.size())) return false;
    std::vector<std::vector<std::int64_t>> rows(n, std::vector<std::int64_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) rows[i][j] = flat[i * n + j];
    config.matrix = rows;
    return true;
  }, "row-major integer matrix entries");
  add_common(build);

  auto* curvature = app.add_subcommand("curvature", "sample sectional curvature on a grid");
  curvature->add_option("--grid-lo", config.grid_lo, "lower grid bound");
  curvature->add_option("--grid-hi", config.grid_hi, "upper grid bound");
  curvature->add_option("--grid-n", config.grid_n, "grid points");
  add_common(curvature);

  auto* geodesic = app.add_subcommand("geodesic", "integrate a geodesic");
  geodesic->add_option("--x0", config.x0, "initial point");
  geodesic->add_option("--v0", config.v0, "initial velocity");
  geodesic->add_option("--t-max", config.t_max, "time horizon");
  add_common(geodesic);

  auto* lifetime_cmd = app.add_subcommand("lifetime", "lifetime of a half-geodesic");
  lifetime_cmd->add_option("--x0", config.x0, "initial point");
  lifetime_cmd->add_option("--v0", config.v0, "initial direction");
  lifetime_cmd->add_option("--t-max", config.t_max, "censoring horizon");
  add_common(lifetime_cmd);

  auto* mu = app.add_subcommand("mu", "sup of finite lifetimes over sampled directions");
  mu->add_option("--x0", config.x0, "base point");
  mu->add_option("--samples", config.samples, "direction count");
  mu->add_option("--t-max", config.t_max, "censoring horizon");
  add_common(mu);

  auto* holonomy = app.add_subcommand("holonomy", "sample holonomy and classify");
  add_common(holonomy);
  auto* classify = app.add_subcommand("classify", "holonomy trichotomy verdict");
  add_common(classify);

  auto* pseudogroup = app.add_subcommand("pseudogroup", "transversal pseudogroup report");
  pseudogroup->add_option("--chart-size", config.chart_size, "transversal chart size");
  pseudogroup->add_option("--depth", config.depth, "gluing levels on each side");
  pseudogroup->add_option("--word-length", config.word_length, "maximum word length");
  pseudogroup->add_option("--m", config.m_bound, "equicontinuity bound");
  add_common(pseudogroup);

  auto* closures = app.add_subcommand("closures", "leaf closure analysis");
  closures->add_option("--x0", config.x0, "slice point (last coordinate = z)");
  closures->add_option("--samples", config.samples, "orbit points");
  add_common(closures);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw simlab::Error(simlab::Errc::config_error, "cannot read " + config_path);
      simlab::json j = simlab::json::parse(in);
      return execute(simlab::config_from_json(j));
    }
    for (auto* cmd : {search, build, curvature, geodesic, lifetime_cmd, mu, holonomy, classify,
                      pseudogroup, closures}) {
      if (cmd->parsed()) {
        config.operation = cmd->get_name();
        return execute(config);
      }
    }
    std::cerr << app.help() << std::endl;
    return 1;
  } catch (const simlab::Error& e) {
    std::cerr << e.what() << std::endl;
    return e.code() == simlab::Errc::tolerance_ambiguity ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
