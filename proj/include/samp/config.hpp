#ifndef SAMP_CONFIG_HPP
#define SAMP_CONFIG_HPP

#include <string>
#include <vector>

#include "samp/channels.hpp"
#include "samp/priors.hpp"

// Experiment configuration: a flat sectioned key-value text format.
//
//   # comment
//   [experiment]
//   kind = glm_stream
//   [model]
//   prior = gauss_bernoulli
//   rho = 0.3
//   channel = gaussian
//   delta = 1e-8
//   [geometry]
//   n = 2000
//   alpha_b = 0.35
//   num_batches = 9
//   [algorithm]
//   engine = mini_amp
//   t_max = 200
//   tol = 1e-13
//   [run]
//   seeds = 0:10
//   out = out/
//
// Section and key names are validated strictly: an unknown key is a
// configuration error naming the key.

namespace samp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  GlmStream,
  GlmOffline,
  SeSweep,
  Landscape,
  PhaseDiagram,
  ClusterStream,
  TmaxStudy
};

std::string to_string(ExperimentKind k);

struct ExperimentConfig {
  // [experiment]
  ExperimentKind kind = ExperimentKind::GlmStream;
  std::string name;  // defaults to the kind name

  // [model]
  PriorSpec prior = PriorSpec::gauss_bernoulli(0.3);
  ChannelSpec channel = ChannelSpec::gaussian(1e-8);
  int rank = 5;  // clustering

  // [geometry]
  int n = 2000;
  std::vector<double> alpha_b_grid = {0.35};  // one series per value
  int num_batches = 9;
  double alpha_max = 0.0;  // se_sweep/adf: integrate/iterate up to here

  // [algorithm]
  std::string engine = "mini_amp";  // mini_amp|amp|gamp|adf|vb|minibatch_kmeans
  int t_max = 200;
  double tol = 1e-13;
  double damping = 0.0;
  bool learn_noise = false;
  int init_batches = 5;
  std::vector<int> t_max_grid = {2, 5, 10, 0};  // tmax_study; 0 = converged
  int se_quad_order = 61;
  double seed_overlap = 0.0;  // low-rank SE symmetry-breaking seed

  // [run]
  std::vector<long> seeds = {0};
  std::string out_dir = ".";
  std::string format = "csv";  // csv | json
  int threads = 0;             // 0: leave runtime setting untouched
  bool full = false;

  // canonical serialization (sorted, normalized); basis of the config hash
  std::string canonical() const;
  std::string hash() const;

  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace samp

#endif  // SAMP_CONFIG_HPP
