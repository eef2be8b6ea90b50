// Command-line front end.
//
//   samp amp run <config>        inference experiments (glm/cluster engines)
//   samp se sweep <config>       state-evolution curves
//   samp landscape scan <config> replica-potential landscapes
//   samp phasediag <config>      MMSE vs streaming-SE phase diagram
//   samp cluster run <config>    streaming GMM clustering
//   samp figures <1|2|3|4>       canned desk-scale reproduction recipes
//
// Exit codes: 0 success, 1 configuration/usage error, 2 numerical failure.

#include <CLI11.hpp>
#include <cstdio>

#include "samp/experiments.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

struct GlobalFlags {
  long seed = -1;
  std::string out;
  int threads = 0;
  std::string format;
};

samp::ExperimentConfig load_with_overrides(const std::string& path,
                                           const GlobalFlags& g) {
  samp::ExperimentConfig cfg = samp::load_config(path);
  if (g.seed >= 0) cfg.seeds = {g.seed};
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (g.threads > 0) cfg.threads = g.threads;
  if (!g.format.empty()) {
    cfg.format = g.format;
    cfg.validate();
  }
  return cfg;
}

int run_config(const std::string& path, const GlobalFlags& g,
               samp::ExperimentKind expected_kind, const char* verb) {
  samp::ExperimentConfig cfg = load_with_overrides(path, g);
  if (cfg.kind != expected_kind)
    throw samp::ConfigError(std::string("'") + verb + "' expects a config " +
                            "with kind " + samp::to_string(expected_kind) +
                            ", got " + samp::to_string(cfg.kind));
  samp::ExperimentOutput out = samp::run_experiment(cfg);
  for (const auto& f : out.files) std::printf("wrote %s\n", f.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming approximate message passing: engines, state "
               "evolution and replica analysis"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--seed", g.seed, "run a single seed");
  app.add_option("--out", g.out, "output directory override");
  app.add_option("--threads", g.threads, "worker thread count");
  app.add_option("--format", g.format, "csv or json");

  std::string cfg_path;
  int figure = 0;

  auto* amp = app.add_subcommand("amp", "message-passing inference");
  auto* amp_run = amp->add_subcommand("run", "run a glm experiment config");
  amp_run->add_option("config", cfg_path, "config file")->required();

  auto* se = app.add_subcommand("se", "state evolution");
  auto* se_sweep = se->add_subcommand("sweep", "run an se_sweep config");
  se_sweep->add_option("config", cfg_path, "config file")->required();

  auto* land = app.add_subcommand("landscape", "replica landscapes");
  auto* land_scan = land->add_subcommand("scan", "run a landscape config");
  land_scan->add_option("config", cfg_path, "config file")->required();

  auto* pd = app.add_subcommand("phasediag", "MMSE vs SE phase diagram");
  pd->add_option("config", cfg_path, "config file")->required();

  auto* cluster = app.add_subcommand("cluster", "streaming clustering");
  auto* cluster_run = cluster->add_subcommand("run", "run a cluster config");
  cluster_run->add_option("config", cfg_path, "config file")->required();

  auto* figures = app.add_subcommand("figures", "canned reproduction recipes");
  figures->add_option("which", figure, "figure number (1-4)")->required();
  bool full = false;
  figures->add_flag("--full", full, "full grids (slower)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

#ifdef _OPENMP
  if (g.threads > 0) omp_set_num_threads(g.threads);
#endif

  try {
    using samp::ExperimentKind;
    if (amp_run->parsed())
      return run_config(cfg_path, g, samp::load_config(cfg_path).kind ==
                                             ExperimentKind::GlmOffline
                                         ? ExperimentKind::GlmOffline
                                         : ExperimentKind::GlmStream,
                        "amp run");
    if (se_sweep->parsed())
      return run_config(cfg_path, g, ExperimentKind::SeSweep, "se sweep");
    if (land_scan->parsed())
      return run_config(cfg_path, g, ExperimentKind::Landscape,
                        "landscape scan");
    if (pd->parsed())
      return run_config(cfg_path, g, ExperimentKind::PhaseDiagram, "phasediag");
    if (cluster_run->parsed())
      return run_config(cfg_path, g, ExperimentKind::ClusterStream,
                        "cluster run");
    if (figures->parsed()) {
      std::string out_dir = g.out.empty() ? "." : g.out;
      auto files = samp::run_figures(figure, out_dir, full);
      for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
      return 0;
    }
    std::fprintf(stderr, "no subcommand action selected\n");
    return 1;
  } catch (const samp::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const samp::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
}
