#ifndef SAMP_IO_HPP
#define SAMP_IO_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

// Matrix ingestion, the raw matrix container format, and the long-format
// result CSV.
//
// raw_f64 layout (little-endian, bit-exact round trip):
//   bytes 0..3   magic "SAMP"
//   bytes 4..7   u32 rows
//   bytes 8..11  u32 cols
//   bytes 12..15 reserved (zero)
//   then rows*cols f64 values, row-major.
//
// metrics CSV schema (one metric per row):
//   config_hash,experiment,series,seed,batch,alpha,metric,value,theory,stderr
// seed is -1 on aggregate rows; empty cells mean "not defined here".

namespace samp {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Eigen::MatrixXd ingest_matrix_csv(const std::string& path);
Eigen::MatrixXd ingest_matrix_raw(const std::string& path);
Eigen::MatrixXd ingest_matrix(const std::string& path,
                              const std::string& format);  // "csv" | "raw_f64"

void write_matrix_raw(const std::string& path, const Eigen::MatrixXd& m);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

struct ResultRow {
  std::string series;
  long seed = -1;  // -1: aggregate / theory-only
  long batch = 0;
  double alpha = 0.0;
  std::string metric;
  double value = std::numeric_limits<double>::quiet_NaN();
  double theory = std::numeric_limits<double>::quiet_NaN();
  double stderr_ = std::numeric_limits<double>::quiet_NaN();
};

// Renders rows (sorted canonically, so output is independent of the order
// rows were produced in) into the documented CSV.
std::string render_metrics_csv(const std::string& config_hash,
                               const std::string& experiment,
                               std::vector<ResultRow> rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Canonical number formatting shared by all writers (shortest round-trip).
std::string format_double(double v);

}  // namespace samp

#endif  // SAMP_IO_HPP
