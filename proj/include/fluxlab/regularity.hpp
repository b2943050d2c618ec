#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fluxlab/gauge.hpp"
#include "fluxlab/lattice.hpp"
#include "fluxlab/random_field.hpp"

namespace fluxlab {

struct MaxSiteReport {
  Site x0;              // site of maximal modulus; ties broken by site index
  double M = 0.0;       // that modulus
  double pigeonhole_floor = 0.0;  // 1/sqrt(site count), M is never below this
  double coarse_floor = 0.0;      // 1/L for the centered box {-L..L}^2, else 0
};

MaxSiteReport max_site(const Eigen::VectorXcd& psi, const BoxRegion& box);

// Guaranteed neighbor sizes at the peak of an eigenvector with eigenvalue E.
// All margins are (attained - guaranteed) and must be >= 0 up to roundoff:
//   max rule:      max in-box neighbor >= (1 - E/4) M
//   others rule:   every neighbor except the smallest one is
//                  >= (2 - E - eps) M with eps = smallest/M
//   opposite rule: for each neighbor y with |psi(y)| = kappa M and t
//                  perpendicular to y - x0 (psi = 0 outside the box),
//                  |psi(y+t)| + |psi(y-t)| >= ((4 - E) kappa - 2) M
struct NeighborBoundsReport {
  Site x0;
  double M = 0.0;
  double E = 0.0;
  std::vector<std::pair<Site, double>> neighbors;  // in-box, direction order
  double margin_max_rule = 0.0;
  double margin_others_rule = 0.0;
  double margin_opposite_rule = 0.0;
};

NeighborBoundsReport neighbor_bounds(const Eigen::VectorXcd& psi,
                                     const BoxRegion& box, double E);

// A unit square on whose four corners the eigenvector is certified to be
// at least c * M in modulus. The proof constant c depends only on the
// energy cap and the small-neighbor threshold eps:
//   case 1 (every neighbor of the peak exceeds eps M):
//     c = min{ eps, 1 - E*/4, ((4-E*)(1-E*/4) - 2)/2 }
//   case 2 (some neighbor is at most eps M; the square sits opposite it):
//     c = min{ 2 - E* - eps, ((4-E*)(2-E*-eps) - 2)/2 }
// Both are positive for E* < 4 - sqrt(8).
struct SquareCertificate {
  bool valid = false;
  std::string failure;
  int case_taken = 0;
  bool fallback_used = false;  // peak at the box edge; best in-box square used
  Site x0;
  double M = 0.0;
  double E = 0.0, E_star = 0.0, eps = 0.0;
  Plaquet Q{{0, 0}};
  std::array<Site, 4> corners{};  // the plaquet's sites
  double c = 0.0;
  double min_on_Q = 0.0;
};

double square_constant_case1(double E_star, double eps);
double square_constant_case2(double E_star, double eps);

// Locates the certified square for an eigenpair (psi, E) under the cap
// E <= E_star < 4 - sqrt(8). Throws std::invalid_argument if the caps are
// violated; returns an invalid certificate with a reason if no in-box
// square attains the constant.
SquareCertificate find_square(const Eigen::VectorXcd& psi, const BoxRegion& box,
                              double E, double E_star, double eps = 0.1);

// Quantitative lower bound on the current of a low eigenpair. On the
// certified square the four corner moduli are at least cM; the bond phases
// around it add up to the flux through it, which lives at circle distance
// >= b from {0, pi}, so at least one bond phase is at distance >= b/8 and
// that bond carries |J| >= 2 (cM)^2 sin(b/8).
struct CurrentBoundReport {
  SquareCertificate cert;
  double flux_on_Q = 0.0;
  std::array<double, 4> phases{};   // bond phases around the square
  int pigeonhole_index = -1;        // boundary arrow with a usable phase
  double phase_band = 0.0;          // b/8
  double bound = 0.0;               // 4 (cM)^4 sin^2(b/8)
  double pigeonhole_current_sq = 0.0;
  double boundary_current_sq = 0.0;  // sum of J^2 over the 4 oriented edges
  double total_current_sq = 0.0;     // over all directed bonds of the box
  bool ok = false;
  std::string failure;
};

CurrentBoundReport current_lower_bound(const Eigen::VectorXcd& psi,
                                       const VectorPotential& A, double E,
                                       double E_star, double b,
                                       double eps = 0.1);

std::string certificate_json(const CurrentBoundReport& report);

// Size dependence of the two squared norms behind the counting estimate,
// scaled by L^4. The estimate needs min over low eigenpairs to stay away
// from zero as L grows.
struct ScalingRow {
  int L = 0;
  long samples = 0;
  long eigenpairs = 0;      // eigenpairs with energy <= cap
  double min_l4_derivatives = 0.0;
  double min_l4_current = 0.0;
  double mean_l4_derivatives = 0.0;
};

std::vector<ScalingRow> derivative_scaling_study(
    const FluxDensity& density, const std::vector<int>& L_list, int samples,
    double E_cap, std::uint64_t master_seed, int workers = 1,
    int gauge_variant = 2);

}  // namespace fluxlab
