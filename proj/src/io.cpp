#include "samp/io.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace samp {

namespace {

constexpr char kMagic[4] = {'S', 'A', 'M', 'P'};

bool parse_double_token(const std::string& tok, double& out) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Eigen::MatrixXd ingest_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    bool bad = false;
    while (std::getline(ss, tok, ',')) {
      // trim spaces
      size_t a = tok.find_first_not_of(" \t");
      size_t b = tok.find_last_not_of(" \t");
      if (a == std::string::npos) {
        bad = true;
        break;
      }
      double v;
      if (!parse_double_token(tok.substr(a, b - a + 1), v)) {
        bad = true;
        break;
      }
      row.push_back(v);
    }
    if (bad) {
      if (lineno == 1 && rows.empty()) continue;  // optional header line
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": cannot parse numeric row");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected " + std::to_string(rows.front().size()) +
                       " columns, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no numeric rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return m;
}

Eigen::MatrixXd ingest_matrix_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  char header[16];
  in.read(header, 16);
  if (in.gcount() != 16)
    throw ParseError(path + ": truncated header, expected 16 bytes, got " +
                     std::to_string(in.gcount()));
  if (std::memcmp(header, kMagic, 4) != 0)
    throw ParseError(path + ": bad magic at byte 0 (want \"SAMP\")");
  uint32_t rows, cols;
  std::memcpy(&rows, header + 4, 4);
  std::memcpy(&cols, header + 8, 4);
  const uint64_t count = static_cast<uint64_t>(rows) * cols;
  Eigen::MatrixXd m(rows, cols);
  std::vector<double> buf(count);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(count * 8));
  const auto got = in.gcount();
  if (static_cast<uint64_t>(got) != count * 8)
    throw ParseError(path + ": truncated payload at byte " +
                     std::to_string(16 + got) + ", expected " +
                     std::to_string(16 + count * 8) + " bytes total");
  for (uint32_t i = 0; i < rows; ++i)
    for (uint32_t j = 0; j < cols; ++j) m(i, j) = buf[i * cols + j];
  return m;
}

Eigen::MatrixXd ingest_matrix(const std::string& path,
                              const std::string& format) {
  if (format == "csv") return ingest_matrix_csv(path);
  if (format == "raw_f64") return ingest_matrix_raw(path);
  throw ParseError("ingest_matrix: unknown format '" + format + "'");
}

void write_matrix_raw(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  char header[16] = {};
  std::memcpy(header, kMagic, 4);
  uint32_t rows = static_cast<uint32_t>(m.rows());
  uint32_t cols = static_cast<uint32_t>(m.cols());
  std::memcpy(header + 4, &rows, 4);
  std::memcpy(header + 8, &cols, 4);
  out.write(header, 16);
  std::vector<double> buf(static_cast<size_t>(rows) * cols);
  for (uint32_t i = 0; i < rows; ++i)
    for (uint32_t j = 0; j < cols; ++j) buf[static_cast<size_t>(i) * cols + j] = m(i, j);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 8));
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::string render_metrics_csv(const std::string& config_hash,
                               const std::string& experiment,
                               std::vector<ResultRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.series != b.series) return a.series < b.series;
    if (a.metric != b.metric) return a.metric < b.metric;
    if (a.seed != b.seed) return a.seed < b.seed;
    if (a.batch != b.batch) return a.batch < b.batch;
    return a.alpha < b.alpha;
  });
  std::string out =
      "config_hash,experiment,series,seed,batch,alpha,metric,value,theory,"
      "stderr\n";
  for (const ResultRow& r : rows) {
    out += config_hash;
    out += ',';
    out += experiment;
    out += ',';
    out += r.series;
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.batch);
    out += ',';
    out += format_double(r.alpha);
    out += ',';
    out += r.metric;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += format_double(r.theory);
    out += ',';
    out += format_double(r.stderr_);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace samp
