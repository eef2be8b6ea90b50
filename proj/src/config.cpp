#include "samp/config.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "samp/io.hpp"
#include "samp/rng.hpp"

namespace samp {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("config: key '" + key + "' has non-numeric value '" + v +
                      "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("config: key '" + key + "' has non-integer value '" + v +
                      "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: key '" + key + "' has non-boolean value '" + v +
                    "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
  return out;
}

std::vector<double> to_double_list(const std::string& key,
                                   const std::string& v) {
  std::vector<double> out;
  for (const auto& t : split(v, ',')) out.push_back(to_double(key, t));
  if (out.empty()) throw ConfigError("config: key '" + key + "' is empty");
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& t : split(v, ','))
    out.push_back(static_cast<int>(to_long(key, t)));
  if (out.empty()) throw ConfigError("config: key '" + key + "' is empty");
  return out;
}

// "0,1,2" or the range form "0:10" (half-open)
std::vector<long> to_seed_list(const std::string& key, const std::string& v) {
  std::vector<long> out;
  if (v.find(':') != std::string::npos) {
    auto parts = split(v, ':');
    if (parts.size() != 2)
      throw ConfigError("config: key '" + key + "': bad range '" + v + "'");
    long a = to_long(key, parts[0]);
    long b = to_long(key, parts[1]);
    if (b <= a)
      throw ConfigError("config: key '" + key + "': empty range '" + v + "'");
    for (long s = a; s < b; ++s) out.push_back(s);
    return out;
  }
  for (const auto& t : split(v, ',')) out.push_back(to_long(key, t));
  if (out.empty()) throw ConfigError("config: key '" + key + "' is empty");
  return out;
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::GlmStream: return "glm_stream";
    case ExperimentKind::GlmOffline: return "glm_offline";
    case ExperimentKind::SeSweep: return "se_sweep";
    case ExperimentKind::Landscape: return "landscape";
    case ExperimentKind::PhaseDiagram: return "phase_diagram";
    case ExperimentKind::ClusterStream: return "cluster_stream";
    case ExperimentKind::TmaxStudy: return "tmax_study";
  }
  return "?";
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  // model scratch values assembled at the end
  std::string prior_name = "gauss_bernoulli";
  double rho = 0.3, prior_mean = 0.0, prior_variance = 1.0, sigma2 = 1.0;
  std::string channel_name = "gaussian";
  double delta = 1e-8, delta0 = -1.0;

  std::string section;
  std::istringstream in(text);
  std::string raw;
  size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "experiment" && section != "model" &&
          section != "geometry" && section != "algorithm" && section != "run")
        throw ConfigError("config: unknown section '" + section + "'");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    std::string qual = section + "." + key;

    if (section == "experiment") {
      if (key == "kind") {
        if (val == "glm_stream") cfg.kind = ExperimentKind::GlmStream;
        else if (val == "glm_offline") cfg.kind = ExperimentKind::GlmOffline;
        else if (val == "se_sweep") cfg.kind = ExperimentKind::SeSweep;
        else if (val == "landscape") cfg.kind = ExperimentKind::Landscape;
        else if (val == "phase_diagram") cfg.kind = ExperimentKind::PhaseDiagram;
        else if (val == "cluster_stream") cfg.kind = ExperimentKind::ClusterStream;
        else if (val == "tmax_study") cfg.kind = ExperimentKind::TmaxStudy;
        else throw ConfigError("config: unknown experiment kind '" + val + "'");
      } else if (key == "name") {
        cfg.name = val;
      } else {
        throw ConfigError("config: unknown key '" + qual + "'");
      }
    } else if (section == "model") {
      if (key == "prior") prior_name = val;
      else if (key == "rho") rho = to_double(qual, val);
      else if (key == "prior_mean") prior_mean = to_double(qual, val);
      else if (key == "prior_variance") prior_variance = to_double(qual, val);
      else if (key == "sigma2") sigma2 = to_double(qual, val);
      else if (key == "channel") channel_name = val;
      else if (key == "delta") delta = to_double(qual, val);
      else if (key == "delta0") delta0 = to_double(qual, val);
      else if (key == "r") cfg.rank = static_cast<int>(to_long(qual, val));
      else throw ConfigError("config: unknown key '" + qual + "'");
    } else if (section == "geometry") {
      if (key == "n") cfg.n = static_cast<int>(to_long(qual, val));
      else if (key == "alpha_b") cfg.alpha_b_grid = to_double_list(qual, val);
      else if (key == "num_batches")
        cfg.num_batches = static_cast<int>(to_long(qual, val));
      else if (key == "alpha_max") cfg.alpha_max = to_double(qual, val);
      else throw ConfigError("config: unknown key '" + qual + "'");
    } else if (section == "algorithm") {
      if (key == "engine") cfg.engine = val;
      else if (key == "t_max") cfg.t_max = static_cast<int>(to_long(qual, val));
      else if (key == "tol") cfg.tol = to_double(qual, val);
      else if (key == "damping") cfg.damping = to_double(qual, val);
      else if (key == "learn_noise") cfg.learn_noise = to_bool(qual, val);
      else if (key == "init_batches")
        cfg.init_batches = static_cast<int>(to_long(qual, val));
      else if (key == "t_max_grid") cfg.t_max_grid = to_int_list(qual, val);
      else if (key == "se_quad_order")
        cfg.se_quad_order = static_cast<int>(to_long(qual, val));
      else if (key == "seed_overlap") cfg.seed_overlap = to_double(qual, val);
      else throw ConfigError("config: unknown key '" + qual + "'");
    } else if (section == "run") {
      if (key == "seeds") cfg.seeds = to_seed_list(qual, val);
      else if (key == "out") cfg.out_dir = val;
      else if (key == "format") cfg.format = val;
      else if (key == "threads")
        cfg.threads = static_cast<int>(to_long(qual, val));
      else if (key == "full") cfg.full = to_bool(qual, val);
      else throw ConfigError("config: unknown key '" + qual + "'");
    } else {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key outside of any section");
    }
  }

  if (prior_name == "gauss_bernoulli") cfg.prior = PriorSpec::gauss_bernoulli(rho);
  else if (prior_name == "rademacher") cfg.prior = PriorSpec::rademacher();
  else if (prior_name == "gaussian")
    cfg.prior = PriorSpec::gaussian(prior_mean, prior_variance);
  else if (prior_name == "truncated_nonneg_gaussian")
    cfg.prior = PriorSpec::truncated_nonneg_gaussian(sigma2);
  else throw ConfigError("config: unknown prior '" + prior_name + "'");

  if (channel_name == "gaussian")
    cfg.channel = ChannelSpec::gaussian(delta, delta0);
  else if (channel_name == "probit")
    cfg.channel = ChannelSpec::probit(delta, delta0);
  else throw ConfigError("config: unknown channel '" + channel_name + "'");

  if (cfg.name.empty()) cfg.name = to_string(cfg.kind);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

void ExperimentConfig::validate() const {
  if (n < 4) throw ConfigError("config: geometry.n must be >= 4");
  if (num_batches < 1) throw ConfigError("config: geometry.num_batches >= 1");
  for (double a : alpha_b_grid)
    if (!(a > 0.0)) throw ConfigError("config: geometry.alpha_b must be > 0");
  if (t_max < 0) throw ConfigError("config: algorithm.t_max must be >= 0");
  if (!(tol >= 0.0)) throw ConfigError("config: algorithm.tol must be >= 0");
  if (damping < 0.0 || damping >= 1.0)
    throw ConfigError("config: algorithm.damping must lie in [0, 1)");
  if (rank < 1) throw ConfigError("config: model.r must be >= 1");
  if (seeds.empty()) throw ConfigError("config: run.seeds is empty");
  if (format != "csv" && format != "json")
    throw ConfigError("config: run.format must be csv or json");
  const bool known_engine =
      engine == "mini_amp" || engine == "amp" || engine == "gamp" ||
      engine == "adf" || engine == "vb" || engine == "minibatch_kmeans";
  if (!known_engine)
    throw ConfigError("config: unknown engine '" + engine + "'");
}

std::string ExperimentConfig::canonical() const {
  std::string s;
  s += "experiment.kind=" + to_string(kind) + "\n";
  s += "experiment.name=" + name + "\n";
  s += "model.prior=" + prior.name() + "\n";
  s += "model.rho=" + format_double(prior.rho) + "\n";
  s += "model.prior_mean=" + format_double(prior.mean) + "\n";
  s += "model.prior_variance=" + format_double(prior.variance) + "\n";
  s += "model.sigma2=" + format_double(prior.sigma2) + "\n";
  s += "model.channel=" + channel.name() + "\n";
  s += "model.delta=" + format_double(channel.delta) + "\n";
  s += "model.delta0=" + format_double(channel.delta0) + "\n";
  s += "model.r=" + std::to_string(rank) + "\n";
  s += "geometry.n=" + std::to_string(n) + "\n";
  s += "geometry.alpha_b=";
  for (size_t i = 0; i < alpha_b_grid.size(); ++i)
    s += (i ? "," : "") + format_double(alpha_b_grid[i]);
  s += "\n";
  s += "geometry.num_batches=" + std::to_string(num_batches) + "\n";
  s += "geometry.alpha_max=" + format_double(alpha_max) + "\n";
  s += "algorithm.engine=" + engine + "\n";
  s += "algorithm.t_max=" + std::to_string(t_max) + "\n";
  s += "algorithm.tol=" + format_double(tol) + "\n";
  s += "algorithm.damping=" + format_double(damping) + "\n";
  s += "algorithm.learn_noise=" + std::string(learn_noise ? "true" : "false") + "\n";
  s += "algorithm.init_batches=" + std::to_string(init_batches) + "\n";
  s += "algorithm.t_max_grid=";
  for (size_t i = 0; i < t_max_grid.size(); ++i)
    s += (i ? "," : "") + std::to_string(t_max_grid[i]);
  s += "\n";
  s += "algorithm.se_quad_order=" + std::to_string(se_quad_order) + "\n";
  s += "algorithm.seed_overlap=" + format_double(seed_overlap) + "\n";
  s += "run.seeds=";
  for (size_t i = 0; i < seeds.size(); ++i)
    s += (i ? "," : "") + std::to_string(seeds[i]);
  s += "\n";
  return s;
}

std::string ExperimentConfig::hash() const {
  uint64_t h = fnv1a64(canonical());
  char buf[20];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace samp
