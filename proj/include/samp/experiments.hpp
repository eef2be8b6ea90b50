#ifndef SAMP_EXPERIMENTS_HPP
#define SAMP_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "samp/config.hpp"
#include "samp/io.hpp"

// The orchestration layer: dispatches a validated ExperimentConfig to the
// engines, pairs every empirical curve with its theory counterpart where one
// is defined, aggregates over seeds, and persists the documented CSV/JSON
// artifacts.  Seeds run in parallel; output is byte-identical for any thread
// count.

namespace samp {

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentOutput {
  std::vector<std::string> files;
  std::vector<ResultRow> rows;  // metric rows (empty for landscape-only runs)
  int failed_seeds = 0;
  int seed_runs = 0;
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

// Canned desk-scale reproduction recipes; returns the files written.
std::vector<std::string> run_figures(int which, const std::string& out_dir,
                                     bool full);

}  // namespace samp

#endif  // SAMP_EXPERIMENTS_HPP
