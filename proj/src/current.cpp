#include "fluxlab/current.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace fluxlab {

using cd = std::complex<double>;

ArrowField current_field(const Eigen::VectorXcd& psi, const VectorPotential& A) {
  const BoxRegion& box = A.box();
  if (psi.size() != box.site_count())
    throw std::invalid_argument("current_field: state size mismatch");
  ArrowField J(box);
  A.field().for_each_canonical([&](Arrow a, double v) {
    const cd amp = std::conj(psi[box.site_index(a.from)]) * cd(0.0, 1.0) *
                   std::exp(cd(0.0, v)) * psi[box.site_index(a.to)];
    J.set(a, -2.0 * amp.real());
  });
  return J;
}

double divergence(const ArrowField& current, Site s) {
  double out = 0.0;
  for (const Site y : current.box().neighbors(s)) out += current.value({s, y});
  return out;
}

double hf_derivative(const ArrowField& current, Plaquet f, int variant) {
  double sum = 0.0;
  for_each_gauge_arrow(current.box(), f, variant,
                       [&](Arrow a, double c) { sum += c * current.value(a); });
  return sum;
}

double hf_derivative_direct(const Eigen::VectorXcd& psi, const VectorPotential& A,
                            Plaquet f, int variant) {
  const BoxRegion& box = A.box();
  const ArrowField coeff = unit_flux_gauge(box, f, variant);
  cd sum = 0.0;
  for (const Arrow& a : box.arrows()) {
    const double c = coeff.value(a);
    if (c == 0.0) continue;
    sum += std::conj(psi[box.site_index(a.from)]) * cd(0.0, c) *
           std::exp(cd(0.0, A.value(a))) * psi[box.site_index(a.to)];
  }
  return -sum.real();
}

std::vector<double> hf_derivatives_all(const ArrowField& current, int variant) {
  const BoxRegion& box = current.box();
  std::vector<double> out(box.plaquet_count());
  for (int i = 0; i < box.plaquet_count(); ++i)
    out[i] = hf_derivative(current, box.plaquet_at(i), variant);
  return out;
}

double current_from_derivatives(const ArrowField& current, Arrow a) {
  const BoxRegion& box = current.box();
  const bool horizontal = (a.to - a.from).x2 == 0;
  // Variants supported on the bond itself: 1/3 for horizontal bonds,
  // 2/4 for vertical ones.
  const auto term = [&](Arrow arrow) {
    const Plaquet f = plaquet_of_arrow(arrow);
    if (!box.contains(f)) return 0.0;
    // Pick the variant whose support contains this bond. For the bottom
    // edge of f (horizontal, pointing +e1) that is variant 3; for the top
    // edge variant 1; for the left edge variant 4; for the right variant 2.
    const Site d = arrow.to - arrow.from;
    const int variant = horizontal ? (d == kE1 ? 3 : 1) : (d == kE2 ? 2 : 4);
    return hf_derivative(current, f, variant);
  };
  return term(a) - term(a.reversed());
}

DerivativeNorms derivative_norms(const ArrowField& current, int variant) {
  DerivativeNorms n;
  for (const double d : hf_derivatives_all(current, variant))
    n.sum_sq_derivatives += d * d;
  current.for_each_canonical([&](Arrow, double j) {
    n.sum_sq_current += 2.0 * j * j;  // both orientations carry +-j
  });
  return n;
}

Eigen::MatrixXcd flux_derivative_matrix(const VectorPotential& A, Plaquet f,
                                        int variant) {
  const BoxRegion& box = A.box();
  const int n = box.site_count();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  for_each_gauge_arrow(box, f, variant, [&](Arrow a, double c) {
    const int i = box.site_index(a.from);
    const int j = box.site_index(a.to);
    const cd entry = cd(0.0, -c) * std::exp(cd(0.0, A.value(a)));
    M(i, j) = entry;
    M(j, i) = std::conj(entry);
  });
  return M;
}

Eigen::MatrixXcd flux_second_derivative_matrix(const VectorPotential& A,
                                               Plaquet f, int variant) {
  const BoxRegion& box = A.box();
  const int n = box.site_count();
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  for_each_gauge_arrow(box, f, variant, [&](Arrow a, double c) {
    const int i = box.site_index(a.from);
    const int j = box.site_index(a.to);
    const cd entry = c * c * std::exp(cd(0.0, A.value(a)));
    M(i, j) = entry;
    M(j, i) = std::conj(entry);
  });
  return M;
}

double operator_norm(const Eigen::MatrixXcd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(M, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("operator_norm: iteration failed to converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

int track_eigenvector(const Eigen::MatrixXcd& base, int k,
                      const Eigen::MatrixXcd& other) {
  const Eigen::VectorXd overlaps = (other.adjoint() * base.col(k)).cwiseAbs();
  int best = 0;
  overlaps.maxCoeff(&best);
  return best;
}

SecondDerivativeCurve flux_second_derivatives(const FluxField& flux, int variant,
                                              Plaquet f, double h) {
  const SpectrumResult base = eigendecompose(assemble(flux, variant));
  const int n = static_cast<int>(base.eigenvalues.size());

  SecondDerivativeCurve out;
  out.min_gap = 8.0;
  for (int l = 0; l + 1 < n; ++l)
    out.min_gap = std::min(out.min_gap,
                           base.eigenvalues[l + 1] - base.eigenvalues[l]);

  const auto tracked = [&](double step) {
    FluxField shifted = flux;
    shifted.set(f, shifted.value(f) + step);
    const SpectrumResult s = eigendecompose(assemble(shifted, variant));
    Eigen::VectorXd lam(n);
    for (int l = 0; l < n; ++l)
      lam[l] = s.eigenvalues[track_eigenvector(base.eigenvectors, l, s.eigenvectors)];
    return lam;
  };

  // The explicit return type forces evaluation while the tracked temporaries
  // are still alive; a deduced expression template would dangle.
  const auto central = [&](double step) -> Eigen::VectorXd {
    return (tracked(step) + tracked(-step) -
            2.0 * base.eigenvalues) / (step * step);
  };

  const Eigen::VectorXd coarse = central(h);
  const Eigen::VectorXd fine = central(h / 2.0);
  out.values = (4.0 * fine - coarse) / 3.0;
  return out;
}

double window_primitive(double x, double E, double eta) {
  return std::clamp(x - (E - eta / 2.0), 0.0, eta);
}

double window_double_primitive(double x, double E, double eta) {
  const double lo = E - eta / 2.0, hi = E + eta / 2.0;
  if (x <= lo) return 0.0;
  if (x <= hi) return (x - lo) * (x - lo) / 2.0;
  return eta * (x - E);
}

TraceTrickReport trace_trick_check(const FluxField& flux, int variant, Plaquet f,
                                   double E, double eta) {
  TraceTrickReport r;
  const VectorPotential A = assemble_potential(flux, variant);
  const HamiltonianMatrix H = assemble(A);
  const SpectrumResult s = eigendecompose(H);
  const int n = static_cast<int>(s.eigenvalues.size());

  const SecondDerivativeCurve curve = flux_second_derivatives(flux, variant, f);
  r.min_gap = curve.min_gap;
  if (curve.min_gap < 1e-6) {
    r.skipped = true;
    return r;
  }

  const Eigen::MatrixXcd M2 = flux_second_derivative_matrix(A, f, variant);
  for (int k = 0; k < n; ++k) {
    const double F = window_primitive(s.eigenvalues[k], E, eta);
    const cd quad = s.eigenvectors.col(k).dot(M2 * s.eigenvectors.col(k));
    r.lhs += quad.real() * F;
    r.rhs += curve.values[k] * F;
    r.trace_G += window_double_primitive(s.eigenvalues[k], E, eta);
  }
  r.trace_G_bound = eta * std::max(8.0 - E + eta / 2.0, 0.0) * n;
  return r;
}

JensenReport degenerate_jensen_check(const SpectrumResult& spectrum,
                                     const VectorPotential& A, Plaquet f,
                                     int variant, int cluster_start,
                                     int cluster_size) {
  JensenReport r;
  r.cluster_size = cluster_size;
  const Eigen::MatrixXcd M1 = flux_derivative_matrix(A, f, variant);
  const Eigen::MatrixXcd P =
      spectrum.eigenvectors.middleCols(cluster_start, cluster_size);
  const Eigen::MatrixXcd T = P.adjoint() * M1 * P;
  r.trace_T_sq = (T * T).trace().real();
  for (int h = 0; h < cluster_size; ++h) {
    const double d = T(h, h).real();
    r.sum_diag_sq += d * d;
    const ArrowField J = current_field(P.col(h), A);
    r.diag_consistency =
        std::max(r.diag_consistency, std::abs(d - hf_derivative(J, f, variant)));
  }
  return r;
}

}  // namespace fluxlab
