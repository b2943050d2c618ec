#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "fluxlab/gauge.hpp"
#include "fluxlab/lattice.hpp"
#include "fluxlab/torus.hpp"

namespace fluxlab {

// Eigensolver failed to converge or a factorization broke down.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Magnetic hopping operator on the box:
//   (H psi)(x) = 4 psi(x) - sum_{|y-x|=1, y in box} exp(i A(x,y)) psi(y).
// The diagonal stays 4 everywhere; bonds leaving the box are dropped.
// Spectrum lies in [0, 8].
struct HamiltonianMatrix {
  BoxRegion box;
  Eigen::MatrixXcd mat;
  FluxField flux;  // curl of the assembling potential
  int gauge_variant = 0;  // 0 when assembled from a raw potential
};

HamiltonianMatrix assemble(const VectorPotential& A);
HamiltonianMatrix assemble(const FluxField& flux, int gauge_variant = 2);

struct SpectrumResult {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd eigenvectors; // columns, orthonormal
  double max_residual = 0.0;     // max_k |H v_k - lambda_k v_k|_2
  double degeneracy_tolerance = 1e-8;
};

// Dense Hermitian diagonalization (unitary reduction to tridiagonal form
// plus implicit-shift QL/QR) with a residual certificate.
SpectrumResult eigendecompose(const HamiltonianMatrix& H);

// Eigenvalue count in [E - eta/2, E + eta/2] from the full spectrum.
int count_in_window(const SpectrumResult& spectrum, double E, double eta);

struct Inertia {
  int negative = 0;
  int zero = 0;
  int positive = 0;
};

// Inertia of a Hermitian matrix via LDL^T with Bunch-Kaufman diagonal
// pivoting; by Sylvester's law this counts eigenvalues by sign.
Inertia hermitian_inertia(Eigen::MatrixXcd M, double pivot_tolerance_rel = 1e-13);

// Same window count through two shifted factorizations, never touching the
// eigensolver. Agreement with count_in_window is a cross-check.
int count_in_window_inertia(const HamiltonianMatrix& H, double E, double eta);

// Max spectral deviation over a set of gauge transforms of one flux field:
// assembles the four gauge variants plus a random site gauge and returns the
// largest eigenvalue difference against the variant-2 assembly.
double gauge_invariance_deviation(const FluxField& flux, std::uint64_t seed);

// Largest |lambda_k + lambda_{N+1-k} - 8| of a spectrum; zero when the
// spectrum is symmetric about 4, which the alternating-sign conjugation
// guarantees for this operator.
double particle_hole_defect(const Eigen::VectorXd& eigenvalues);

// Threshold 4 - sqrt(8) below which the square-certificate argument runs.
inline double critical_energy() { return 4.0 - std::sqrt(8.0); }

// Deterministic lower edge 4 (1 - cos(c/4)) of the spectrum when every
// plaquet flux has magnitude at least c.
inline double spectral_bottom(double c) { return 4.0 * (1.0 - std::cos(c / 4.0)); }

}  // namespace fluxlab
