#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fluxlab/lattice.hpp"
#include "fluxlab/random_field.hpp"

namespace fluxlab {

struct EnsembleConfig {
  std::vector<int> L_list{4, 6, 8, 10};
  std::vector<double> E_grid{0.5};
  std::vector<double> eta_grid{0.02, 0.05, 0.1};
  int samples = 200;
  double b = 0.7853981633974483;  // quarter turn
  DensityMode mode = DensityMode::symmetric;
  double E_star = 1.0;
  std::uint64_t master_seed = 1;
  int workers = 1;
  int gauge_variant = 2;

  FluxDensity density() const { return FluxDensity::bump(b, mode); }
  std::string to_json() const;
};

// Every (E, eta) pair must fit the regime of the counting estimate:
// E + eta/2 <= E_star < 4 - sqrt(8), or its mirror image
// E - eta/2 >= 8 - E_star. Throws std::invalid_argument otherwise.
void validate_window_config(const EnsembleConfig& config);

struct WegnerRow {
  int L = 0;
  double E = 0.0, eta = 0.0;
  double mean_count = 0.0, std_error = 0.0;
  long samples = 0;
};

struct WegnerTable {
  std::vector<WegnerRow> rows;
};

// Mean eigenvalue count in [E - eta/2, E + eta/2] per disorder sample,
// tabulated over L_list x E_grid x eta_grid.
WegnerTable wegner_experiment(const EnsembleConfig& config);

struct WegnerFit {
  double C_least_squares = 0.0;  // best C for mean ~ C * eta * L^8
  double C_envelope = 0.0;       // smallest C with mean <= C * eta * L^8 on all rows
  double min_slack = 0.0;        // min over rows of C_envelope * eta * L^8 - mean
};

WegnerFit fit_wegner_constant(const WegnerTable& table);

std::string wegner_csv(const WegnerTable& table);

struct IDSCurve {
  int L_hi = 0;        // largest box in L_list
  int L_lo = 0;        // second largest, 0 when absent
  long samples = 0;
  std::vector<double> E;
  std::vector<double> k_hi;   // mean counting fraction at L_hi
  std::vector<double> k_lo;   // same at L_lo, empty when absent
  std::vector<double> drift;  // k_hi - k_lo, empty when absent
};

// Integrated counting fraction  mean #{eigenvalues <= E} / N  on the two
// largest boxes of the config.
IDSCurve ids_estimate(const EnsembleConfig& config);

std::string ids_csv(const IDSCurve& curve);

struct LifshitzRow {
  double E = 0.0;
  double k_hat = 0.0;
  double ratio = 0.0;  // log(-log k_hat) / log(E - E0)
  bool defined = false;
  std::string reason;  // why the ratio is not defined
};

// Thinning diagnostic of the counting fraction near the deterministic lower
// edge E0 = 4 (1 - cos(b/4)); ratios at or below -1 indicate faster than
// power-law thinning. Exploratory: rows are flagged, never NaN.
std::vector<LifshitzRow> lifshitz_diagnostic(const IDSCurve& curve, double b);

std::string lifshitz_csv(const std::vector<LifshitzRow>& rows);

double inverse_participation_ratio(const Eigen::VectorXcd& psi);

struct DecayFit {
  double rate = 0.0;  // decay exponent of the shell envelope around the peak
  double r2 = 0.0;
  int shells = 0;
  bool ok = false;
};

// Least-squares fit of log max|psi| over Chebyshev shells around the peak.
DecayFit fit_exponential_envelope(const Eigen::VectorXcd& psi,
                                  const BoxRegion& box);

struct LocalizationRow {
  int L = 0;
  long sample = 0;
  int k = 0;
  double energy = 0.0;
  double ipr = 0.0;
  double decay_rate = 0.0;
  double fit_r2 = 0.0;
  int shells = 0;
  bool fit_ok = false;
};

// Spread diagnostics for the eigenpairs at the bottom of the spectrum: the
// `lowest` eigenpairs per sample plus everything within `window` above the
// deterministic edge. With clean = true the fluxes are zero and a single
// sample is taken.
std::vector<LocalizationRow> localization_diagnostics(
    const EnsembleConfig& config, double window, int lowest, bool clean);

std::string localization_csv(const std::vector<LocalizationRow>& rows);

}  // namespace fluxlab
