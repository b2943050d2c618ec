#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "fluxlab/current.hpp"
#include "fluxlab/hamiltonian.hpp"
#include "fluxlab/random_field.hpp"
#include "fluxlab/rng.hpp"

using namespace fluxlab;
using cd = std::complex<double>;

namespace {

struct Instance {
  BoxRegion box;
  FluxField flux;
  VectorPotential A;
  SpectrumResult spec;
};

Instance make(int L, double b, std::uint64_t seed, std::int64_t sample) {
  const BoxRegion box = BoxRegion::centered(L);
  FluxField flux = sample_fluxes(FluxDensity::bump(b), box, seed, sample).fluxes;
  VectorPotential A = assemble_potential(flux, 2);
  SpectrumResult spec = eigendecompose(assemble(A));
  return {box, std::move(flux), std::move(A), std::move(spec)};
}

Eigen::VectorXcd random_state(const BoxRegion& box, std::uint64_t seed) {
  Eigen::VectorXcd psi(box.site_count());
  for (int i = 0; i < psi.size(); ++i)
    psi[i] = cd(detail::uniform01(detail::counter_hash(seed, 0, i)) - 0.5,
                detail::uniform01(detail::counter_hash(seed, 1, i)) - 0.5);
  psi.normalize();
  return psi;
}

}  // namespace

TEST_CASE("bond current: antisymmetry and the polar form") {
  const Instance inst = make(2, kPi / 4.0, 101, 0);
  const Eigen::VectorXcd psi = random_state(inst.box, 5);
  const ArrowField J = current_field(psi, inst.A);
  for (const Arrow& a : inst.box.arrows()) {
    CHECK(J.value(a.reversed()) == doctest::Approx(-J.value(a)).epsilon(1e-15));
    const cd zi = psi[inst.box.site_index(a.from)];
    const cd zt = psi[inst.box.site_index(a.to)];
    const double phase =
        inst.A.value(a) + std::arg(zt) - std::arg(zi);
    CHECK(J.value(a) ==
          doctest::Approx(2.0 * std::abs(zi) * std::abs(zt) * std::sin(phase))
              .epsilon(1e-10));
  }
}

TEST_CASE("eigenvector currents are divergence free, generic states are not") {
  const Instance inst = make(3, kPi / 4.0, 103, 1);
  for (int k = 0; k < inst.spec.eigenvalues.size(); k += 7) {
    const ArrowField J = current_field(inst.spec.eigenvectors.col(k), inst.A);
    for (const Site s : inst.box.sites())
      CHECK(std::abs(divergence(J, s)) < 1e-12);
  }
  const ArrowField Jr = current_field(random_state(inst.box, 9), inst.A);
  double worst = 0.0;
  for (const Site s : inst.box.sites())
    worst = std::max(worst, std::abs(divergence(Jr, s)));
  CHECK(worst > 1e-4);
}

TEST_CASE("derivative of the quadratic form: three routes agree for any state") {
  const Instance inst = make(2, 1.0, 107, 2);
  for (const std::uint64_t s : {11ull, 12ull}) {
    const Eigen::VectorXcd psi = random_state(inst.box, s);
    const ArrowField J = current_field(psi, inst.A);
    for (const Plaquet& f : inst.box.plaquets())
      for (int variant = 1; variant <= 4; ++variant) {
        const double via_support = hf_derivative(J, f, variant);
        const double via_double_sum =
            hf_derivative_direct(psi, inst.A, f, variant);
        const Eigen::MatrixXcd M1 =
            flux_derivative_matrix(inst.A, f, variant);
        const double via_matrix = psi.dot(M1 * psi).real();
        CHECK(via_support == doctest::Approx(via_double_sum).epsilon(1e-12));
        CHECK(via_support == doctest::Approx(via_matrix).epsilon(1e-12));
      }
  }
}

TEST_CASE("gauge variant does not matter for eigenvector derivatives") {
  // For divergence-free currents the derivative is gauge independent.
  const Instance inst = make(2, kPi / 4.0, 109, 3);
  for (int k = 0; k < 6; ++k) {
    const ArrowField J = current_field(inst.spec.eigenvectors.col(k), inst.A);
    for (const Plaquet& f : inst.box.plaquets()) {
      const double base = hf_derivative(J, f, 1);
      for (int variant = 2; variant <= 4; ++variant)
        CHECK(hf_derivative(J, f, variant) ==
              doctest::Approx(base).epsilon(1e-11));
    }
  }
}

TEST_CASE("tracked finite differences recover the derivative") {
  const Instance inst = make(2, kPi / 4.0, 113, 4);
  const int n = inst.box.site_count();
  const double h = 1e-6;
  for (const Plaquet& f : {inst.box.plaquet_at(0), inst.box.plaquet_at(7)}) {
    for (int k = 0; k < n; k += 5) {
      // Skip near-degenerate pairs, where the branch is not differentiable
      // in a tracked sense.
      const double gap_lo = k > 0 ? inst.spec.eigenvalues[k] -
                                        inst.spec.eigenvalues[k - 1]
                                  : 1.0;
      const double gap_hi = k + 1 < n ? inst.spec.eigenvalues[k + 1] -
                                            inst.spec.eigenvalues[k]
                                      : 1.0;
      if (std::min(gap_lo, gap_hi) < 1e-4) continue;

      const ArrowField J = current_field(inst.spec.eigenvectors.col(k), inst.A);
      const double analytic = hf_derivative(J, f, 2);

      FluxField up = inst.flux, dn = inst.flux;
      up.set(f, up.value(f) + h);
      dn.set(f, dn.value(f) - h);
      const SpectrumResult su = eigendecompose(assemble(up, 2));
      const SpectrumResult sd = eigendecompose(assemble(dn, 2));
      const int ku = track_eigenvector(inst.spec.eigenvectors, k, su.eigenvectors);
      const int kd = track_eigenvector(inst.spec.eigenvectors, k, sd.eigenvectors);
      const double fd = (su.eigenvalues[ku] - sd.eigenvalues[kd]) / (2.0 * h);
      CHECK(std::abs(analytic - fd) /
                std::max({std::abs(analytic), std::abs(fd), 1e-3}) <
            1e-5);
    }
  }
}

TEST_CASE("each bond current is a difference of two plaquet derivatives") {
  for (int L = 2; L <= 3; ++L) {
    const Instance inst = make(L, kPi / 4.0, 127, L);
    for (int k = 0; k < inst.spec.eigenvalues.size(); k += 9) {
      const ArrowField J = current_field(inst.spec.eigenvectors.col(k), inst.A);
      for (const Arrow& a : inst.box.arrows())
        CHECK(std::abs(current_from_derivatives(J, a) - J.value(a)) < 1e-10);
    }
  }
}

TEST_CASE("squared current is controlled by squared derivatives") {
  const Instance inst = make(3, kPi / 4.0, 131, 6);
  int positive = 0;
  for (int k = 0; k < inst.spec.eigenvalues.size(); ++k) {
    if (inst.spec.eigenvalues[k] > 1.0) break;
    const ArrowField J = current_field(inst.spec.eigenvectors.col(k), inst.A);
    const DerivativeNorms norms = derivative_norms(J, 2);
    CHECK(norms.sum_sq_current <= 32.0 * norms.sum_sq_derivatives + 1e-15);
    if (norms.sum_sq_derivatives > 0.0) ++positive;
  }
  CHECK(positive > 0);

  // The flat field carries no current at all on simple eigenvectors.
  const BoxRegion box = BoxRegion::centered(2);
  const VectorPotential A0 = assemble_potential(FluxField(box), 2);
  const SpectrumResult s0 = eigendecompose(assemble(A0));
  const int n = box.site_count();
  for (int k = 0; k < n; ++k) {
    const double gap_lo = k > 0 ? s0.eigenvalues[k] - s0.eigenvalues[k - 1] : 1.0;
    const double gap_hi =
        k + 1 < n ? s0.eigenvalues[k + 1] - s0.eigenvalues[k] : 1.0;
    if (std::min(gap_lo, gap_hi) < 1e-8) continue;
    const ArrowField J = current_field(s0.eigenvectors.col(k), A0);
    const DerivativeNorms norms = derivative_norms(J, 2);
    CHECK(norms.sum_sq_current < 1e-20);
  }
}

TEST_CASE("second derivative matrix: norm bound and perturbation oracle") {
  const Instance inst = make(2, kPi / 4.0, 137, 7);
  const int n = inst.box.site_count();
  const Plaquet f = inst.box.plaquet_at(3);
  for (int variant = 1; variant <= 4; ++variant) {
    const Eigen::MatrixXcd M2 =
        flux_second_derivative_matrix(inst.A, f, variant);
    CHECK((M2 - M2.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(operator_norm(M2) <= 4.0 + 1e-12);
  }

  // Independent oracle for the tracked difference scheme: second-order
  // perturbation theory assembled from the first and second derivative
  // matrices and the full eigensystem.
  const SecondDerivativeCurve curve =
      flux_second_derivatives(inst.flux, 2, f);
  REQUIRE(curve.min_gap > 1e-6);
  const Eigen::MatrixXcd M1 = flux_derivative_matrix(inst.A, f, 2);
  const Eigen::MatrixXcd M2 = flux_second_derivative_matrix(inst.A, f, 2);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXcd vk = inst.spec.eigenvectors.col(k);
    double second = vk.dot(M2 * vk).real();
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      const cd off = inst.spec.eigenvectors.col(j).dot(M1 * vk);
      second += 2.0 * std::norm(off) /
                (inst.spec.eigenvalues[k] - inst.spec.eigenvalues[j]);
    }
    CHECK(std::abs(curve.values[k] - second) < 1e-4 * std::max(1.0, std::abs(second)));
  }
}

TEST_CASE("windowed trace trade-off holds and is not vacuous") {
  const Instance inst = make(2, kPi / 4.0, 139, 8);
  const Plaquet f = inst.box.plaquet_at(5);
  int live = 0;
  for (const double E : {1.5, 4.0, 6.5})
    for (const double eta : {0.3, 1.0}) {
      const TraceTrickReport r =
          trace_trick_check(inst.flux, 2, f, E, eta);
      if (r.skipped) continue;
      CHECK(r.lhs <= r.rhs + 1e-6);
      CHECK(r.trace_G >= 0.0);
      CHECK(r.trace_G <= r.trace_G_bound + 1e-12);
      if (r.rhs != 0.0 || r.lhs != 0.0) ++live;
    }
  CHECK(live >= 4);

  // Zero-width window kills both sides.
  const TraceTrickReport z = trace_trick_check(inst.flux, 2, f, 4.0, 0.0);
  if (!z.skipped) {
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
  }
}

TEST_CASE("window primitives") {
  const double E = 3.0, eta = 0.5;
  CHECK(window_primitive(2.0, E, eta) == 0.0);
  CHECK(window_primitive(3.0, E, eta) == doctest::Approx(eta / 2.0));
  CHECK(window_primitive(5.0, E, eta) == doctest::Approx(eta));
  for (double x = 0.0; x <= 8.0; x += 0.05) {
    const double h = 1e-6;
    const double d = (window_double_primitive(x + h, E, eta) -
                      window_double_primitive(x - h, E, eta)) /
                     (2.0 * h);
    CHECK(d == doctest::Approx(window_primitive(x, E, eta)).epsilon(1e-4));
    CHECK(window_double_primitive(x, E, eta) <=
          eta * std::max(x - E + eta / 2.0, 0.0) + 1e-12);
  }
}

TEST_CASE("degenerate cluster: square trace dominates squared diagonal") {
  const BoxRegion box = BoxRegion::centered(2);
  const VectorPotential A = assemble_potential(FluxField(box), 2);
  const SpectrumResult spec = eigendecompose(assemble(A));
  const int n = box.site_count();
  // Find the widest degenerate cluster of the flat-field spectrum.
  int best_start = 0, best_size = 1, start = 0;
  for (int k = 1; k <= n; ++k) {
    if (k == n ||
        spec.eigenvalues[k] - spec.eigenvalues[k - 1] > spec.degeneracy_tolerance) {
      if (k - start > best_size) {
        best_size = k - start;
        best_start = start;
      }
      start = k;
    }
  }
  REQUIRE(best_size >= 2);
  for (const Plaquet& f : box.plaquets()) {
    const JensenReport r =
        degenerate_jensen_check(spec, A, f, 2, best_start, best_size);
    CHECK(r.cluster_size == best_size);
    CHECK(r.trace_T_sq >= r.sum_diag_sq - 1e-12);
    CHECK(r.diag_consistency < 1e-12);
  }
}
