#include "samp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "samp/generators.hpp"
#include "samp/replica.hpp"
#include "samp/state_evolution.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace samp {

namespace {

namespace fs = std::filesystem;

std::string series_label(double alpha_b) {
  return "alpha_b=" + format_double(alpha_b);
}

Eigen::Index batch_rows(const ExperimentConfig& cfg, double alpha_b) {
  auto m_b = static_cast<Eigen::Index>(std::llround(alpha_b * cfg.n));
  if (m_b < 1)
    throw ConfigError("experiment: alpha_b * n is below one row per batch");
  return m_b;
}

SeOptions se_options(const ExperimentConfig& cfg, int t_max_override = -1) {
  SeOptions o;
  o.quad_order = cfg.se_quad_order;
  if (t_max_override > 0) {
    o.t_max = t_max_override;
    o.tol = 0.0;  // run exactly t_max iterations
  }
  return o;
}

AmpOptions amp_options(const ExperimentConfig& cfg) {
  AmpOptions o;
  o.t_max = cfg.t_max;
  o.tol = cfg.tol;
  o.damping = cfg.damping;
  return o;
}

// Mean and standard error over seeds, appended as seed = -1 rows.
void append_aggregates(std::vector<ResultRow>& rows) {
  struct Key {
    std::string series, metric;
    long batch;
    bool operator<(const Key& o) const {
      return std::tie(series, metric, batch) <
             std::tie(o.series, o.metric, o.batch);
    }
  };
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const ResultRow& r : rows) {
    if (r.seed < 0) continue;
    groups[{r.series, r.metric, r.batch}].push_back(&r);
  }
  std::vector<ResultRow> agg;
  for (auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end(),
              [](const ResultRow* a, const ResultRow* b) {
                return a->seed < b->seed;
              });
    double mean = 0.0;
    for (auto* r : members) mean += r->value;
    mean /= static_cast<double>(members.size());
    double var = 0.0;
    for (auto* r : members) var += sq(r->value - mean);
    var /= static_cast<double>(members.size() - 1);
    ResultRow a = *members.front();
    a.seed = -1;
    a.value = mean;
    a.stderr_ = std::sqrt(var / static_cast<double>(members.size()));
    agg.push_back(a);
  }
  rows.insert(rows.end(), agg.begin(), agg.end());
}

using SeedRunner =
    std::function<std::vector<ResultRow>(long seed, size_t series_index)>;

// Parallel loop over (series x seeds); per-slot collection keeps the output
// independent of scheduling.  Divergent seeds become data rows.
void run_seeds(const ExperimentConfig& cfg, size_t n_series,
               const SeedRunner& runner, std::vector<ResultRow>& rows,
               int& failed, int& total) {
  const long n_seeds = static_cast<long>(cfg.seeds.size());
  const long n_jobs = n_seeds * static_cast<long>(n_series);
  std::vector<std::vector<ResultRow>> slots(static_cast<size_t>(n_jobs));
  std::vector<char> failures(static_cast<size_t>(n_jobs), 0);

#pragma omp parallel for schedule(dynamic)
  for (long job = 0; job < n_jobs; ++job) {
    long seed = cfg.seeds[static_cast<size_t>(job % n_seeds)];
    size_t series = static_cast<size_t>(job / n_seeds);
    try {
      slots[static_cast<size_t>(job)] = runner(seed, series);
    } catch (const std::exception& e) {
      failures[static_cast<size_t>(job)] = 1;
      ResultRow r;
      r.series = "series_" + std::to_string(series);
      r.seed = seed;
      r.metric = "diverged";
      r.value = 1.0;
      slots[static_cast<size_t>(job)] = {r};
#pragma omp critical
      std::fprintf(stderr, "seed %ld (series %zu) failed: %s\n", seed, series,
                   e.what());
    }
  }
  for (auto& slot : slots)
    rows.insert(rows.end(), slot.begin(), slot.end());
  failed = 0;
  for (char f : failures) failed += f;
  total = static_cast<int>(n_jobs);
}

// ---- glm_stream ------------------------------------------------------------

std::vector<ResultRow> glm_stream_rows(const ExperimentConfig& cfg) {
  std::vector<ResultRow> rows;

  // theory per series
  std::vector<std::vector<double>> theory(cfg.alpha_b_grid.size());
  std::vector<std::vector<AdfOdePoint>> adf_theory(cfg.alpha_b_grid.size());
  for (size_t s = 0; s < cfg.alpha_b_grid.size(); ++s) {
    double ab = cfg.alpha_b_grid[s];
    if (cfg.engine == "adf") {
      adf_theory[s] = se_adf_ode(cfg.prior, cfg.channel,
                                 ab * cfg.num_batches, 1e-3, cfg.se_quad_order);
    } else if (cfg.engine != "vb" && cfg.engine != "minibatch_kmeans") {
      SETrajectory t =
          se_mini(cfg.prior, cfg.channel, ab, cfg.num_batches, se_options(cfg));
      for (const auto& b : t.batches) theory[s].push_back(b.mse);
    }
  }
  auto adf_theory_at = [&](size_t s, double alpha) {
    const auto& tr = adf_theory[s];
    if (tr.empty()) return std::numeric_limits<double>::quiet_NaN();
    size_t idx = std::min(
        tr.size() - 1,
        static_cast<size_t>(std::llround(alpha / 1e-3)));
    return tr[idx].mse;
  };

  auto runner = [&](long seed, size_t s) {
    double ab = cfg.alpha_b_grid[s];
    Eigen::Index m_b = batch_rows(cfg, ab);
    GlmInstance inst =
        generate_glm(cfg.prior, cfg.channel, cfg.n,
                     m_b * cfg.num_batches, static_cast<uint64_t>(seed));
    std::vector<ResultRow> out;
    auto emit = [&](long batch, double value, double th) {
      ResultRow r;
      r.series = series_label(ab);
      r.seed = seed;
      r.batch = batch;
      r.alpha = static_cast<double>(batch) * ab;
      r.metric = "mse";
      r.value = value;
      r.theory = th;
      out.push_back(r);
    };

    if (cfg.engine == "adf") {
      GlmProblem pb = inst.whole(cfg.prior, cfg.channel);
      GlmResult res = adf(pb, amp_options(cfg));
      const auto& mses = res.report.last().mse_per_iteration;
      for (int k = 1; k <= cfg.num_batches; ++k) {
        size_t idx = static_cast<size_t>(k * m_b) - 1;
        if (idx < mses.size())
          emit(k, mses[idx], adf_theory_at(s, k * ab));
      }
    } else if (cfg.engine == "vb") {
      VbOptions vo;
      vo.t_max = cfg.t_max;
      vo.tol = cfg.tol;
      vo.learn_noise = cfg.learn_noise;
      GlmResult res = vb_mean_field_stream(
          inst.batches(m_b, cfg.prior, cfg.channel), vo);
      for (int k = 0; k < cfg.num_batches; ++k)
        emit(k + 1, res.report.batches[static_cast<size_t>(k)].final_mse,
             std::numeric_limits<double>::quiet_NaN());
    } else {  // mini_amp
      GlmResult res =
          mini_amp(inst.batches(m_b, cfg.prior, cfg.channel), amp_options(cfg));
      for (int k = 0; k < cfg.num_batches; ++k)
        emit(k + 1, res.report.batches[static_cast<size_t>(k)].final_mse,
             theory[s].empty() ? std::numeric_limits<double>::quiet_NaN()
                               : theory[s][static_cast<size_t>(k)]);
    }
    return out;
  };
  int failed = 0, total = 0;
  run_seeds(cfg, cfg.alpha_b_grid.size(), runner, rows, failed, total);
  if (failed * 2 > total)
    throw ExperimentError("glm_stream: more than half of the seeds failed");
  append_aggregates(rows);
  return rows;
}

// ---- glm_offline -----------------------------------------------------------

std::vector<ResultRow> glm_offline_rows(const ExperimentConfig& cfg) {
  std::vector<ResultRow> rows;
  std::vector<double> theory(cfg.alpha_b_grid.size());
  for (size_t s = 0; s < cfg.alpha_b_grid.size(); ++s)
    theory[s] = se_offline(cfg.prior, cfg.channel, cfg.alpha_b_grid[s],
                           se_options(cfg))
                    .final_mse();

  auto runner = [&](long seed, size_t s) {
    double alpha = cfg.alpha_b_grid[s];
    Eigen::Index m = batch_rows(cfg, alpha);
    GlmInstance inst =
        generate_glm(cfg.prior, cfg.channel, cfg.n, m, static_cast<uint64_t>(seed));
    GlmProblem pb = inst.whole(cfg.prior, cfg.channel);
    GlmResult res;
    if (cfg.engine == "vb") {
      VbOptions vo;
      vo.t_max = cfg.t_max;
      vo.tol = cfg.tol;
      vo.learn_noise = cfg.learn_noise;
      res = vb_mean_field(pb, vo);
    } else if (cfg.engine == "amp" &&
               cfg.channel.kind == ChannelSpec::Kind::Gaussian) {
      res = amp_offline_gaussian(pb, amp_options(cfg));
    } else {
      res = gamp(pb, amp_options(cfg));
    }
    ResultRow r;
    r.series = "alpha=" + format_double(alpha);
    r.seed = seed;
    r.batch = 1;
    r.alpha = alpha;
    r.metric = "mse";
    r.value = res.report.last().final_mse;
    r.theory = cfg.engine == "vb" ? std::numeric_limits<double>::quiet_NaN()
                                  : theory[s];
    return std::vector<ResultRow>{r};
  };
  int failed = 0, total = 0;
  run_seeds(cfg, cfg.alpha_b_grid.size(), runner, rows, failed, total);
  if (failed * 2 > total)
    throw ExperimentError("glm_offline: more than half of the seeds failed");
  append_aggregates(rows);
  return rows;
}

// ---- se_sweep --------------------------------------------------------------

std::vector<ResultRow> se_sweep_rows(const ExperimentConfig& cfg) {
  std::vector<ResultRow> rows;
  for (double ab : cfg.alpha_b_grid) {
    if (cfg.engine == "adf") {
      double amax = cfg.alpha_max > 0.0 ? cfg.alpha_max : ab * cfg.num_batches;
      auto tr = se_adf_ode(cfg.prior, cfg.channel, amax, 1e-3,
                           cfg.se_quad_order);
      size_t stride = std::max<size_t>(1, tr.size() / 300);
      for (size_t i = 0; i < tr.size(); i += stride) {
        ResultRow r;
        r.series = "adf";
        r.seed = -1;
        r.batch = static_cast<long>(i);
        r.alpha = tr[i].alpha;
        r.metric = "mse";
        r.value = tr[i].mse;
        rows.push_back(r);
      }
      continue;
    }
    SETrajectory t =
        se_mini(cfg.prior, cfg.channel, ab, cfg.num_batches, se_options(cfg));
    for (size_t k = 0; k < t.batches.size(); ++k) {
      ResultRow r;
      r.series = series_label(ab);
      r.seed = -1;
      r.batch = static_cast<long>(k + 1);
      r.alpha = static_cast<double>(k + 1) * ab;
      r.metric = "mse";
      r.value = t.batches[k].mse;
      rows.push_back(r);
      ResultRow l = r;
      l.metric = "lambda";
      l.value = t.batches[k].lambda;
      rows.push_back(l);
    }
  }
  return rows;
}

// ---- landscape -------------------------------------------------------------

std::string landscape_csv(const ExperimentConfig& cfg) {
  if (cfg.channel.kind != ChannelSpec::Kind::Gaussian)
    throw ConfigError("landscape: gaussian channel only");
  double ab = cfg.alpha_b_grid.front();
  SeOptions so = se_options(cfg);
  SETrajectory se = se_mini(cfg.prior, cfg.channel, ab, cfg.num_batches, so);
  double delta = std::max(cfg.channel.delta, so.delta_floor);

  std::string out = "config_hash,batch,lambda,e,irs,is_minimum,is_global\n";
  const std::string h = cfg.hash();
  double lambda = 0.0;
  for (int k = 0; k < cfg.num_batches; ++k) {
    LandscapeScan scan = scan_landscape(cfg.prior, delta, ab, lambda);
    for (int i = 0; i < scan.e_grid.size(); ++i)
      out += h + "," + std::to_string(k + 1) + "," + format_double(lambda) +
             "," + format_double(scan.e_grid[i]) + "," +
             format_double(scan.irs[i]) + ",0,0\n";
    for (const auto& m : scan.minima)
      out += h + "," + std::to_string(k + 1) + "," + format_double(lambda) +
             "," + format_double(m.e) + "," + format_double(m.value) + ",1," +
             (m.e == scan.global.e ? "1" : "0") + "\n";
    lambda = se.batches[static_cast<size_t>(k)].lambda;
  }
  return out;
}

// ---- phase_diagram ---------------------------------------------------------

std::string phase_diagram_csv(const ExperimentConfig& cfg) {
  if (cfg.channel.kind != ChannelSpec::Kind::Gaussian)
    throw ConfigError("phase_diagram: gaussian channel only");
  SeOptions so = se_options(cfg);
  double delta = std::max(cfg.channel.delta, so.delta_floor);

  std::string out =
      "config_hash,alpha_b,batch,alpha,mmse,se_mse,classification\n";
  const std::string h = cfg.hash();
  for (double ab : cfg.alpha_b_grid) {
    SETrajectory se = se_mini(cfg.prior, cfg.channel, ab, cfg.num_batches, so);
    auto mmse = mmse_recursion(cfg.prior, delta, ab, cfg.num_batches);
    for (int k = 0; k < cfg.num_batches; ++k) {
      double m = mmse[static_cast<size_t>(k)].mmse;
      double s = se.batches[static_cast<size_t>(k)].mse;
      const char* cls;
      if (s > m + std::max(1e-6, 0.01 * m)) cls = "suboptimal";
      else if (m < 1e-8) cls = "zero";
      else cls = "optimal";
      out += h + "," + format_double(ab) + "," + std::to_string(k + 1) + "," +
             format_double((k + 1) * ab) + "," + format_double(m) + "," +
             format_double(s) + "," + cls + "\n";
    }
  }
  return out;
}

// ---- cluster_stream --------------------------------------------------------

std::vector<ResultRow> cluster_stream_rows(const ExperimentConfig& cfg) {
  std::vector<ResultRow> rows;

  std::vector<LowRankSeResult> theory(cfg.alpha_b_grid.size());
  const bool has_theory = cfg.engine != "minibatch_kmeans" &&
                          cfg.prior.kind == PriorSpec::Kind::Gaussian;
  for (size_t s = 0; s < cfg.alpha_b_grid.size() && has_theory; ++s) {
    LowRankSeOptions so;
    so.seed_overlap = cfg.seed_overlap;
    so.t_max = cfg.t_max;
    theory[s] = se_lowrank(cfg.rank, cfg.channel.delta, cfg.prior,
                           cfg.alpha_b_grid[s], cfg.num_batches, so);
  }

  auto runner = [&](long seed, size_t s) {
    double ab = cfg.alpha_b_grid[s];
    Eigen::Index m_b = batch_rows(cfg, ab);
    GmmInstance inst =
        generate_gmm(cfg.prior, cfg.rank, cfg.channel.delta0, cfg.n,
                     m_b * cfg.num_batches, static_cast<uint64_t>(seed));
    auto batches = inst.column_batches(m_b);
    auto truth_labels = inst.label_batches(m_b);

    std::vector<ResultRow> out;
    auto emit = [&](long batch, const std::string& metric, double value,
                    double th) {
      ResultRow r;
      r.series = series_label(ab);
      r.seed = seed;
      r.batch = batch;
      r.alpha = static_cast<double>(batch) * ab;
      r.metric = metric;
      r.value = value;
      r.theory = th;
      out.push_back(r);
    };

    if (cfg.engine == "minibatch_kmeans") {
      KMeansResult km = minibatch_kmeans(batches, cfg.rank,
                                         static_cast<uint64_t>(seed), true);
      double sqrt_n = std::sqrt(static_cast<double>(cfg.n));
      for (size_t k = 0; k < batches.size(); ++k) {
        MatchedLosses ml = permutation_matched_losses(
            sqrt_n * km.centroids, km.labels[k], inst.u0, truth_labels[k]);
        emit(static_cast<long>(k + 1), "centroid_mse", ml.centroid_mse,
             std::numeric_limits<double>::quiet_NaN());
        emit(static_cast<long>(k + 1), "zero_one_loss", ml.zero_one_loss,
             std::numeric_limits<double>::quiet_NaN());
      }
      return out;
    }

    ClusterStreamOptions co;
    co.amp.t_max = cfg.t_max;
    co.amp.tol = cfg.tol;
    co.learn_noise = cfg.learn_noise;
    co.init_batches = cfg.init_batches;
    co.seed = static_cast<uint64_t>(seed);
    ClusterStreamResult res =
        gmm_stream_cluster(batches, cfg.rank, cfg.prior, cfg.channel.delta,
                           co, &inst.u0, &truth_labels);
    for (size_t k = 0; k < res.stats.size(); ++k) {
      double th_mse = std::numeric_limits<double>::quiet_NaN();
      double th_loss = std::numeric_limits<double>::quiet_NaN();
      if (has_theory) {
        th_mse = theory[s].batches[k].centroid_mse;
        th_loss = 1.0 - theory[s].batches[k].argmax_accuracy;
      }
      emit(static_cast<long>(k + 1), "centroid_mse",
           res.stats[k].centroid_mse, th_mse);
      emit(static_cast<long>(k + 1), "zero_one_loss",
           res.stats[k].zero_one_loss, th_loss);
    }
    return out;
  };
  int failed = 0, total = 0;
  run_seeds(cfg, cfg.alpha_b_grid.size(), runner, rows, failed, total);
  if (failed * 2 > total)
    throw ExperimentError("cluster_stream: more than half of the seeds failed");
  append_aggregates(rows);
  return rows;
}

// ---- tmax_study ------------------------------------------------------------

std::vector<ResultRow> tmax_study_rows(const ExperimentConfig& cfg) {
  std::vector<ResultRow> rows;
  double ab = cfg.alpha_b_grid.front();

  std::vector<std::vector<double>> theory(cfg.t_max_grid.size());
  for (size_t s = 0; s < cfg.t_max_grid.size(); ++s) {
    SETrajectory t = se_mini(cfg.prior, cfg.channel, ab, cfg.num_batches,
                             se_options(cfg, cfg.t_max_grid[s]));
    for (const auto& b : t.batches) theory[s].push_back(b.mse);
  }

  auto tmax_label = [&](int t) {
    return t > 0 ? "t_max=" + std::to_string(t) : std::string("t_max=conv");
  };

  auto runner = [&](long seed, size_t s) {
    int cap = cfg.t_max_grid[s];
    Eigen::Index m_b = batch_rows(cfg, ab);
    GlmInstance inst =
        generate_glm(cfg.prior, cfg.channel, cfg.n, m_b * cfg.num_batches,
                     static_cast<uint64_t>(seed));
    AmpOptions ao = amp_options(cfg);
    if (cap > 0) {
      ao.t_max = cap;
      ao.tol = 0.0;
    }
    GlmResult res = mini_amp(inst.batches(m_b, cfg.prior, cfg.channel), ao);
    std::vector<ResultRow> out;
    for (int k = 0; k < cfg.num_batches; ++k) {
      ResultRow r;
      r.series = tmax_label(cap);
      r.seed = seed;
      r.batch = k + 1;
      r.alpha = (k + 1) * ab;
      r.metric = "mse";
      r.value = res.report.batches[static_cast<size_t>(k)].final_mse;
      r.theory = theory[s][static_cast<size_t>(k)];
      out.push_back(r);
    }
    return out;
  };
  int failed = 0, total = 0;
  run_seeds(cfg, cfg.t_max_grid.size(), runner, rows, failed, total);
  if (failed * 2 > total)
    throw ExperimentError("tmax_study: more than half of the seeds failed");
  append_aggregates(rows);
  return rows;
}

void write_json_summary(const ExperimentConfig& cfg,
                        const std::vector<ResultRow>& rows,
                        const std::string& path) {
  nlohmann::json j;
  j["config_hash"] = cfg.hash();
  j["experiment"] = to_string(cfg.kind);
  j["name"] = cfg.name;
  nlohmann::json series = nlohmann::json::object();
  for (const ResultRow& r : rows) {
    if (r.seed != -1) continue;
    auto& entry = series[r.series][r.metric];
    nlohmann::json point;
    point["batch"] = r.batch;
    point["alpha"] = r.alpha;
    point["mean"] = r.value;
    if (std::isfinite(r.stderr_)) point["stderr"] = r.stderr_;
    if (std::isfinite(r.theory)) point["theory"] = r.theory;
    entry.push_back(point);
  }
  j["series"] = series;
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  fs::create_directories(cfg.out_dir);
  ExperimentOutput out;
  const std::string base = (fs::path(cfg.out_dir) / cfg.name).string();

  switch (cfg.kind) {
    case ExperimentKind::Landscape: {
      std::string csv = landscape_csv(cfg);
      write_text_file(base + "_landscape.csv", csv);
      out.files.push_back(base + "_landscape.csv");
      return out;
    }
    case ExperimentKind::PhaseDiagram: {
      std::string csv = phase_diagram_csv(cfg);
      write_text_file(base + "_phasediag.csv", csv);
      out.files.push_back(base + "_phasediag.csv");
      return out;
    }
    case ExperimentKind::GlmStream:
      out.rows = glm_stream_rows(cfg);
      break;
    case ExperimentKind::GlmOffline:
      out.rows = glm_offline_rows(cfg);
      break;
    case ExperimentKind::SeSweep:
      out.rows = se_sweep_rows(cfg);
      break;
    case ExperimentKind::ClusterStream:
      out.rows = cluster_stream_rows(cfg);
      break;
    case ExperimentKind::TmaxStudy:
      out.rows = tmax_study_rows(cfg);
      break;
  }

  std::string csv = render_metrics_csv(cfg.hash(), to_string(cfg.kind), out.rows);
  write_text_file(base + "_metrics.csv", csv);
  out.files.push_back(base + "_metrics.csv");
  if (cfg.format == "json") {
    write_json_summary(cfg, out.rows, base + "_summary.json");
    out.files.push_back(base + "_summary.json");
  }
  return out;
}

namespace {

ExperimentConfig base_slr_config() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::GlmStream;
  cfg.prior = PriorSpec::gauss_bernoulli(0.3);
  cfg.channel = ChannelSpec::gaussian(1e-8);
  cfg.n = 2000;
  cfg.t_max = 400;
  cfg.tol = 1e-13;
  cfg.seeds.clear();
  for (long s = 0; s < 10; ++s) cfg.seeds.push_back(s);
  return cfg;
}

std::vector<std::string> figures_1(const std::string& out_dir, bool full) {
  std::vector<std::string> files;
  int seeds = full ? 20 : 10;

  // left: noiseless SLR
  {
    ExperimentConfig cfg = base_slr_config();
    cfg.name = "fig1_left";
    cfg.channel = ChannelSpec::gaussian(0.0);
    cfg.alpha_b_grid = {0.1, 0.3, 0.5, 1.0};
    cfg.num_batches = 30;  // trimmed per-series below via alpha <= 3
    cfg.out_dir = out_dir;
    cfg.seeds.clear();
    for (long s = 0; s < seeds; ++s) cfg.seeds.push_back(s);
    // one run per alpha_b with its own batch count
    for (double ab : std::vector<double>{0.1, 0.3, 0.5, 1.0}) {
      ExperimentConfig c = cfg;
      c.alpha_b_grid = {ab};
      c.num_batches = static_cast<int>(std::lround(3.0 / ab));
      c.name = "fig1_left_ab" + format_double(ab);
      auto res = run_experiment(c);
      files.insert(files.end(), res.files.begin(), res.files.end());
    }
    // fully online reference curve
    ExperimentConfig ode = cfg;
    ode.kind = ExperimentKind::SeSweep;
    ode.engine = "adf";
    ode.alpha_max = 3.0;
    ode.name = "fig1_left_adf";
    ode.seeds = {0};
    auto res = run_experiment(ode);
    files.insert(files.end(), res.files.begin(), res.files.end());
  }

  // center: SLR with small noise, MMSE overlay and streaming VB
  {
    for (double ab : std::vector<double>{0.1, 0.35, 0.5}) {
      ExperimentConfig c = base_slr_config();
      c.name = "fig1_center_ab" + format_double(ab);
      c.alpha_b_grid = {ab};
      c.num_batches = static_cast<int>(std::lround(3.0 / ab));
      c.out_dir = out_dir;
      c.seeds.clear();
      for (long s = 0; s < seeds; ++s) c.seeds.push_back(s);
      auto res = run_experiment(c);
      files.insert(files.end(), res.files.begin(), res.files.end());

      ExperimentConfig vb = c;
      vb.engine = "vb";
      vb.learn_noise = true;
      vb.t_max = 200;
      vb.name = "fig1_center_vb_ab" + format_double(ab);
      auto vres = run_experiment(vb);
      files.insert(files.end(), vres.files.begin(), vres.files.end());
    }
    ExperimentConfig pd = base_slr_config();
    pd.kind = ExperimentKind::PhaseDiagram;
    pd.alpha_b_grid = {0.1, 0.35, 0.5};
    pd.num_batches = 30;
    pd.name = "fig1_center_mmse";
    pd.out_dir = out_dir;
    auto res = run_experiment(pd);
    files.insert(files.end(), res.files.begin(), res.files.end());
  }

  // right: perceptron learning with Rademacher parameters
  {
    for (double ab : std::vector<double>{0.3, 1.0}) {
      ExperimentConfig c = base_slr_config();
      c.name = "fig1_right_ab" + format_double(ab);
      c.prior = PriorSpec::rademacher();
      c.channel = ChannelSpec::probit(1e-10);
      c.engine = "mini_amp";
      c.alpha_b_grid = {ab};
      c.num_batches = static_cast<int>(std::lround(6.0 / ab));
      c.n = full ? 2000 : 1000;
      c.t_max = 200;
      c.out_dir = out_dir;
      c.seeds.clear();
      for (long s = 0; s < seeds; ++s) c.seeds.push_back(s);
      auto res = run_experiment(c);
      files.insert(files.end(), res.files.begin(), res.files.end());
    }
    ExperimentConfig ode = base_slr_config();
    ode.kind = ExperimentKind::SeSweep;
    ode.prior = PriorSpec::rademacher();
    ode.channel = ChannelSpec::probit(1e-10);
    ode.engine = "adf";
    ode.alpha_max = 6.0;
    ode.name = "fig1_right_adf";
    ode.out_dir = out_dir;
    ode.seeds = {0};
    auto res = run_experiment(ode);
    files.insert(files.end(), res.files.begin(), res.files.end());
  }
  return files;
}

std::vector<std::string> figures_2(const std::string& out_dir, bool full) {
  std::vector<std::string> files;
  ExperimentConfig land = base_slr_config();
  land.kind = ExperimentKind::Landscape;
  land.alpha_b_grid = {0.35};
  land.num_batches = 9;
  land.name = "fig2_left";
  land.out_dir = out_dir;
  auto res = run_experiment(land);
  files.insert(files.end(), res.files.begin(), res.files.end());

  ExperimentConfig pd = base_slr_config();
  pd.kind = ExperimentKind::PhaseDiagram;
  pd.alpha_b_grid = full ? std::vector<double>{0.15, 0.2, 0.25, 0.3, 0.325,
                                               0.35, 0.4, 0.45, 0.5, 0.55}
                         : std::vector<double>{0.2, 0.3, 0.35, 0.45, 0.55};
  pd.num_batches = 30;
  pd.name = "fig2_right";
  pd.out_dir = out_dir;
  auto res2 = run_experiment(pd);
  files.insert(files.end(), res2.files.begin(), res2.files.end());
  return files;
}

std::vector<std::string> figures_3(const std::string& out_dir, bool full) {
  std::vector<std::string> files;
  int seeds = full ? 100 : 50;
  for (double ab : std::vector<double>{0.2, 0.3, 0.5}) {
    ExperimentConfig c;
    c.kind = ExperimentKind::ClusterStream;
    c.name = "fig3_left_ab" + format_double(ab);
    c.prior = PriorSpec::gaussian(0.0, 1.0);
    c.channel = ChannelSpec::gaussian(0.1);
    c.rank = 5;
    c.n = 1000;
    c.alpha_b_grid = {ab};
    c.num_batches = static_cast<int>(std::lround(5.0 / ab));
    c.t_max = 50;
    c.tol = 1e-7;
    c.init_batches = 5;
    c.seed_overlap = ab > undetectability_threshold(c.rank, 0.1) ? 1e-3 : 0.0;
    c.out_dir = out_dir;
    c.seeds.clear();
    for (long s = 0; s < seeds; ++s) c.seeds.push_back(s);
    auto res = run_experiment(c);
    files.insert(files.end(), res.files.begin(), res.files.end());
  }
  return files;
}

std::vector<std::string> figures_4(const std::string& out_dir, bool full) {
  std::vector<std::string> files;
  ExperimentConfig cfg = base_slr_config();
  cfg.kind = ExperimentKind::TmaxStudy;
  cfg.alpha_b_grid = {0.35};
  cfg.num_batches = 9;
  cfg.t_max_grid = {2, 5, 10, 0};
  cfg.name = "fig4";
  cfg.out_dir = out_dir;
  cfg.seeds.clear();
  for (long s = 0; s < (full ? 20 : 10); ++s) cfg.seeds.push_back(s);
  auto res = run_experiment(cfg);
  files.insert(files.end(), res.files.begin(), res.files.end());
  return files;
}

}  // namespace

std::vector<std::string> run_figures(int which, const std::string& out_dir,
                                     bool full) {
  switch (which) {
    case 1: return figures_1(out_dir, full);
    case 2: return figures_2(out_dir, full);
    case 3: return figures_3(out_dir, full);
    case 4: return figures_4(out_dir, full);
    default:
      throw ConfigError("figures: expected 1, 2, 3 or 4");
  }
}

}  // namespace samp
