#include "fluxlab/hamiltonian.hpp"

#include <algorithm>
#include <complex>

namespace fluxlab {

using cd = std::complex<double>;

HamiltonianMatrix assemble(const VectorPotential& A) {
  const BoxRegion& box = A.box();
  const int n = box.site_count();
  HamiltonianMatrix H{box, Eigen::MatrixXcd::Zero(n, n), flux_of(A), 0};
  H.mat.diagonal().setConstant(cd(4.0, 0.0));
  A.field().for_each_canonical([&](Arrow a, double v) {
    const int i = box.site_index(a.from);
    const int j = box.site_index(a.to);
    H.mat(i, j) = -std::exp(cd(0.0, v));
    H.mat(j, i) = -std::exp(cd(0.0, -v));
  });
  return H;
}

HamiltonianMatrix assemble(const FluxField& flux, int gauge_variant) {
  HamiltonianMatrix H = assemble(assemble_potential(flux, gauge_variant));
  H.flux = flux;
  H.gauge_variant = gauge_variant;
  return H;
}

SpectrumResult eigendecompose(const HamiltonianMatrix& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H.mat);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigendecompose: iteration failed to converge");
  SpectrumResult out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  const Eigen::MatrixXcd resid =
      H.mat * out.eigenvectors - out.eigenvectors * out.eigenvalues.asDiagonal();
  out.max_residual = resid.colwise().norm().maxCoeff();
  return out;
}

int count_in_window(const SpectrumResult& spectrum, double E, double eta) {
  const double lo = E - eta / 2.0, hi = E + eta / 2.0;
  int c = 0;
  for (int i = 0; i < spectrum.eigenvalues.size(); ++i) {
    const double x = spectrum.eigenvalues[i];
    if (lo <= x && x <= hi) ++c;
  }
  return c;
}

namespace {

void symmetric_swap(Eigen::MatrixXcd& M, int i, int j) {
  if (i == j) return;
  M.row(i).swap(M.row(j));
  M.col(i).swap(M.col(j));
}

void classify(double x, double tol, Inertia& inertia) {
  if (x > tol)
    ++inertia.positive;
  else if (x < -tol)
    ++inertia.negative;
  else
    ++inertia.zero;
}

}  // namespace

Inertia hermitian_inertia(Eigen::MatrixXcd M, double pivot_tolerance_rel) {
  const int n = static_cast<int>(M.rows());
  Inertia inertia;
  if (n == 0) return inertia;
  const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
  const double tol = pivot_tolerance_rel * scale;
  const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;

  int k = 0;
  while (k < n) {
    const double akk = M(k, k).real();
    if (k == n - 1) {
      classify(akk, tol, inertia);
      break;
    }

    int r = k + 1;
    double colmax = 0.0;
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(M(i, k));
      if (v > colmax) {
        colmax = v;
        r = i;
      }
    }

    if (std::max(std::abs(akk), colmax) <= tol) {
      // Negligible column: contributes one (numerically) zero eigenvalue.
      ++inertia.zero;
      ++k;
      continue;
    }

    bool one_by_one = true;
    int swap_with = -1;
    if (std::abs(akk) < alpha * colmax) {
      double rowmax = 0.0;
      for (int j = k; j < n; ++j)
        if (j != r) rowmax = std::max(rowmax, std::abs(M(r, j)));
      if (std::abs(akk) * rowmax >= alpha * colmax * colmax) {
        // keep pivot at k
      } else if (std::abs(M(r, r).real()) >= alpha * rowmax) {
        swap_with = r;
      } else {
        one_by_one = false;
      }
    }

    if (one_by_one) {
      if (swap_with > k) symmetric_swap(M, k, swap_with);
      double d = M(k, k).real();
      if (std::abs(d) <= tol) {
        // Pivoting should avoid this; nudge so elimination stays finite.
        ++inertia.zero;
        d = (d < 0.0 ? -tol : tol);
      } else {
        classify(d, tol, inertia);
      }
      const int m = n - k - 1;
      if (m > 0) {
        const Eigen::VectorXcd col = M.col(k).segment(k + 1, m);
        M.block(k + 1, k + 1, m, m).noalias() -= (col * col.adjoint()) / d;
      }
      ++k;
    } else {
      symmetric_swap(M, k + 1, r);
      const double a = M(k, k).real();
      const double c = M(k + 1, k + 1).real();
      const cd b = M(k + 1, k);
      const double det = a * c - std::norm(b);
      const double tr = a + c;
      // Eigenvalues of the 2x2 block.
      const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
      classify(tr / 2.0 + disc, tol, inertia);
      classify(tr / 2.0 - disc, tol, inertia);
      const int m = n - k - 2;
      if (m > 0) {
        if (std::abs(det) <= tol * tol)
          throw NumericalError("hermitian_inertia: singular 2x2 pivot");
        Eigen::Matrix2cd E;
        E << cd(a, 0.0), std::conj(b), b, cd(c, 0.0);
        const Eigen::Matrix2cd Einv = E.inverse();
        const Eigen::MatrixXcd W = M.block(k + 2, k, m, 2);
        M.block(k + 2, k + 2, m, m).noalias() -= W * Einv * W.adjoint();
      }
      k += 2;
    }
  }
  return inertia;
}

int count_in_window_inertia(const HamiltonianMatrix& H, double E, double eta) {
  const int n = static_cast<int>(H.mat.rows());
  const double nudge = 1e-12 * 8.0;
  const auto below = [&](double shift) {
    Eigen::MatrixXcd M = H.mat;
    M.diagonal().array() -= cd(shift, 0.0);
    return hermitian_inertia(std::move(M)).negative;
  };
  const int under_hi = below(E + eta / 2.0 + nudge);
  const int under_lo = below(E - eta / 2.0 - nudge);
  (void)n;
  return under_hi - under_lo;
}

double gauge_invariance_deviation(const FluxField& flux, std::uint64_t seed) {
  const SpectrumResult ref = eigendecompose(assemble(flux, 2));
  double worst = 0.0;
  const auto compare = [&](const VectorPotential& A) {
    const SpectrumResult s = eigendecompose(assemble(A));
    worst = std::max(worst,
                     (s.eigenvalues - ref.eigenvalues).cwiseAbs().maxCoeff());
  };
  for (const int variant : {1, 3, 4})
    compare(assemble_potential(flux, variant));
  const VectorPotential A2 = assemble_potential(flux, 2);
  compare(gauge_transform(A2, GaugeFunction::random(flux.box(), seed)));
  return worst;
}

double particle_hole_defect(const Eigen::VectorXd& eigenvalues) {
  const auto n = eigenvalues.size();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    worst = std::max(worst,
                     std::abs(eigenvalues[k] + eigenvalues[n - 1 - k] - 8.0));
  return worst;
}

}  // namespace fluxlab
