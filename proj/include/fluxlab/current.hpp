#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fluxlab/gauge.hpp"
#include "fluxlab/hamiltonian.hpp"
#include "fluxlab/lattice.hpp"

namespace fluxlab {

// Bond current of a state:
//   J_psi(a) = -2 Re[ conj(psi(a.from)) i exp(i A(a)) psi(a.to) ].
// Antisymmetric under reversal; divergence-free at every site when psi is an
// eigenvector.
ArrowField current_field(const Eigen::VectorXcd& psi, const VectorPotential& A);

// Net outflow of the current at s, summed over in-box bonds.
double divergence(const ArrowField& current, Site s);

// Rate of change of <psi, H psi> when the flux through f moves along the
// unit gauge of the given variant. Computed as sum of coeff * J over the
// canonical support bonds, which equals half the sum over both orientations.
double hf_derivative(const ArrowField& current, Plaquet f, int variant);

// Same quantity from the literal double sum
//   -sum_{directed bonds (x,y)} conj(psi(x)) i coeff(x,y) exp(i A(x,y)) psi(y),
// enumerating every directed bond of the box. Kept deliberately separate
// from hf_derivative as a cross-check.
double hf_derivative_direct(const Eigen::VectorXcd& psi, const VectorPotential& A,
                            Plaquet f, int variant);

// hf_derivative for every plaquet of the box, indexed like box.plaquets().
std::vector<double> hf_derivatives_all(const ArrowField& current, int variant);

// Reconstructs the current on one bond from the flux derivatives:
//   J(a) = [f_a in box] d<H>/d flux(f_a) - [f_rev in box] d<H>/d flux(f_rev)
// where f_a = plaquet_of_arrow(a) and f_rev = plaquet_of_arrow(a reversed).
// Horizontal bonds use gauge variants 1/3, vertical bonds 2/4, so each
// plaquet's derivative is taken along a gauge supported on that bond.
double current_from_derivatives(const ArrowField& current, Arrow a);

struct DerivativeNorms {
  double sum_sq_derivatives = 0.0;  // sum over plaquets of (d<H>/d flux)^2
  double sum_sq_current = 0.0;      // sum over directed bonds of J^2
};

// Each bond current is a difference of at most two flux derivatives, and
// each plaquet derivative feeds at most eight directed bonds, so
// sum_sq_current <= 32 * sum_sq_derivatives holds with room to spare.
DerivativeNorms derivative_norms(const ArrowField& current, int variant);

// First derivative of H in the flux through f along the unit gauge:
// entries -i coeff(x,y) exp(i A(x,y)). Hermitian.
Eigen::MatrixXcd flux_derivative_matrix(const VectorPotential& A, Plaquet f,
                                        int variant);

// Second derivative: entries coeff(x,y)^2 exp(i A(x,y)). Hermitian, and
// its operator norm is at most 4.
Eigen::MatrixXcd flux_second_derivative_matrix(const VectorPotential& A,
                                               Plaquet f, int variant);

double operator_norm(const Eigen::MatrixXcd& M);

// Index of the column of `other` with maximal overlap against column k of
// `base`; follows an eigenvalue through a perturbation.
int track_eigenvector(const Eigen::MatrixXcd& base, int k,
                      const Eigen::MatrixXcd& other);

struct SecondDerivativeCurve {
  Eigen::VectorXd values;  // second derivative of each tracked eigenvalue
  double min_gap = 0.0;    // smallest spacing in the unperturbed spectrum
};

// Second derivative of every eigenvalue in the flux through f: central
// differences at steps h and h/2 with eigenvector tracking, combined by one
// Richardson step.
SecondDerivativeCurve flux_second_derivatives(const FluxField& flux, int variant,
                                              Plaquet f, double h = 1e-4);

// Ramp with F' = indicator of [E - eta/2, E + eta/2].
double window_primitive(double x, double E, double eta);
// Second primitive, G' = F; satisfies G(x) <= eta * max(x - E + eta/2, 0).
double window_double_primitive(double x, double E, double eta);

struct TraceTrickReport {
  double lhs = 0.0;        // Tr[(d^2 H) F(H)]
  double rhs = 0.0;        // sum_l (d^2 lambda_l) F(lambda_l)
  double trace_G = 0.0;    // Tr G(H)
  double trace_G_bound = 0.0;  // eta * (8 - E + eta/2) * dim, crude ceiling
  double min_gap = 0.0;
  bool skipped = false;    // spectrum too degenerate for tracked differences
};

// Trades the trace against per-eigenvalue second derivatives:
//   Tr[(d^2 H) F(H)] <= sum_l (d^2 lambda_l) F(lambda_l)
// for the nondecreasing primitive F of the window indicator.
TraceTrickReport trace_trick_check(const FluxField& flux, int variant, Plaquet f,
                                   double E, double eta);

struct JensenReport {
  double trace_T_sq = 0.0;     // Tr T^2 for T = P (dH) P on the cluster
  double sum_diag_sq = 0.0;    // sum over cluster states of <dH>^2
  double diag_consistency = 0.0;  // max |T_hh - hf_derivative(phi_h)|
  int cluster_size = 0;
};

// Within a degenerate cluster the diagonal of the compressed derivative is
// the per-state expectation, and Tr T^2 dominates the sum of its squares.
JensenReport degenerate_jensen_check(const SpectrumResult& spectrum,
                                     const VectorPotential& A, Plaquet f,
                                     int variant, int cluster_start,
                                     int cluster_size);

}  // namespace fluxlab
