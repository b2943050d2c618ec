#include "fluxlab/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace fluxlab {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::string csv_table(const std::string& header,
                      const std::vector<std::string>& rows) {
  std::string out = header;
  out += '\n';
  for (const std::string& r : rows) {
    out += r;
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string iso8601_utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string spectrum_csv(std::int64_t sample_index,
                         const Eigen::VectorXd& eigenvalues) {
  std::vector<std::string> rows;
  rows.reserve(eigenvalues.size());
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k)
    rows.push_back(std::to_string(sample_index) + "," + std::to_string(k) +
                   "," + format_double(eigenvalues[k]));
  return csv_table("sample_index,k,eigenvalue", rows);
}

void write_states_binary(const std::string& path, const Eigen::MatrixXcd& states) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (Eigen::Index site = 0; site < states.rows(); ++site) {
    for (Eigen::Index k = 0; k < states.cols(); ++k) {
      const double re = states(site, k).real();
      const double im = states(site, k).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string current_csv(const ArrowField& current) {
  std::vector<std::string> rows;
  for (const Arrow& a : current.box().arrows())
    rows.push_back(std::to_string(a.from.x1) + "," + std::to_string(a.from.x2) +
                   "," + std::to_string(a.to.x1) + "," + std::to_string(a.to.x2) +
                   "," + format_double(current.value(a)));
  return csv_table("from_x1,from_x2,to_x1,to_x2,J", rows);
}

}  // namespace fluxlab
