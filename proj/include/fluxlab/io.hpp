#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fluxlab/gauge.hpp"
#include "fluxlab/lattice.hpp"

namespace fluxlab {

// Shortest representation that round-trips a double (printf %.17g trimmed).
std::string format_double(double x);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// header line + one line per row, '\n' endings throughout.
std::string csv_table(const std::string& header,
                      const std::vector<std::string>& rows);

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);

std::string iso8601_utc_now();

// eigenvalue table: sample_index,k,eigenvalue
std::string spectrum_csv(std::int64_t sample_index, const Eigen::VectorXd& eigenvalues);

// States as raw float64 pairs (re, im), native little-endian x86 layout:
// row = site index, column = eigenvector index, row-major.
void write_states_binary(const std::string& path, const Eigen::MatrixXcd& states);

// bond table: from_x1,from_x2,to_x1,to_x2,J over every directed bond.
std::string current_csv(const ArrowField& current);

}  // namespace fluxlab
