#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluxlab/gauge.hpp"
#include "fluxlab/lattice.hpp"

namespace fluxlab {

enum class DensityMode { symmetric, single_arc };

// One smooth bump of the density: amplitude * cos^4(pi (t - center) / width)
// on [lo, hi], zero elsewhere.
struct DensityArc {
  double lo = 0.0;
  double hi = 0.0;
  double mass = 0.0;
  double amplitude = 0.0;
};

// Probability density on the circle, C^2, vanishing to second order at the
// support edges, supported where both 0 and pi are at circle distance >= b.
//   symmetric  : arcs [b, pi-b] and [-(pi-b), -b], mass 1/2 each
//   single_arc : arc [b, pi-b], mass 1
class FluxDensity {
 public:
  static FluxDensity bump(double b, DensityMode mode = DensityMode::symmetric);

  double b() const { return b_; }
  DensityMode mode() const { return mode_; }
  const std::vector<DensityArc>& arcs() const { return arcs_; }

  double pdf(double t) const;
  // Mass of (-pi, t], closed form.
  double cdf(double t) const;
  // Inverse of cdf via per-arc monotone cubic tables; u in [0, 1).
  double quantile(double u) const;

  // Analytic sup over the circle of |v|, |v'|, |v''|.
  double derivative_bound() const;

  std::string config_json() const;
  static FluxDensity from_config_json(const std::string& text);

 private:
  FluxDensity() = default;
  void build_tables();

  struct InverseTable {
    double mass_before = 0.0;  // cumulative mass of earlier arcs
    double mass = 0.0;
    std::vector<double> t;      // knot positions, equally spaced in arc mass
    std::vector<double> slope;  // monotone cubic (Fritsch-Carlson) slopes
  };

  double b_ = 0.0;
  DensityMode mode_ = DensityMode::symmetric;
  std::vector<DensityArc> arcs_;
  std::vector<InverseTable> tables_;
};

struct AssumptionReport {
  double b = 0.0;
  double derivative_bound = 0.0;  // measured max of |v|, |v'|, |v''|
  double total_mass = 0.0;
  double band_margin = 0.0;  // min over supp v of distance to {0, pi}, minus b
  bool nonnegative = false;
  bool normalized = false;
  bool supported_in_band = false;
  bool ok = false;
};

// Checks the density on a uniform grid: nonnegativity, unit mass, support
// inside the admissible band, and a C^2 bound from divided differences.
AssumptionReport validate_assumption(const FluxDensity& v, int grid_points = 40001);

struct DisorderSample {
  FluxField fluxes;
  std::uint64_t master_seed = 0;
  std::int64_t sample_index = 0;
};

// One i.i.d. flux per plaquet. The value on plaquet p depends only on
// (master_seed, sample_index, p), so any evaluation order and any worker
// layout produce identical fields.
DisorderSample sample_fluxes(const FluxDensity& v, const BoxRegion& box,
                             std::uint64_t master_seed, std::int64_t sample_index);

}  // namespace fluxlab
