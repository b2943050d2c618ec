#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <set>

#include "doctest.h"
#include "fluxlab/hamiltonian.hpp"
#include "fluxlab/random_field.hpp"
#include "fluxlab/regularity.hpp"
#include "json.hpp"

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

double modulus_at(const Eigen::VectorXcd& psi, const BoxRegion& box, Site s) {
  return box.contains(s) ? std::abs(psi[box.site_index(s)]) : 0.0;
}

}  // namespace

TEST_CASE("max_site finds the peak and its floors") {
  const BoxRegion box = BoxRegion::centered(2);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(box.site_count(), cd(0.1, 0.0));
  const Site peak{1, -2};
  psi[box.site_index(peak)] = cd(0.3, -0.4);
  const MaxSiteReport r = max_site(psi, box);
  CHECK(r.x0 == peak);
  CHECK(r.M == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.pigeonhole_floor == doctest::Approx(1.0 / 5.0).epsilon(1e-15));
  CHECK(r.coarse_floor == doctest::Approx(0.5).epsilon(1e-15));

  // A normalized vector always peaks at or above 1/sqrt(N).
  const Instance inst = make(3, kPi / 4.0, 211, 0);
  for (int k = 0; k < inst.spec.eigenvalues.size(); k += 6) {
    const MaxSiteReport m = max_site(inst.spec.eigenvectors.col(k), inst.box);
    CHECK(m.M >= m.pigeonhole_floor - 1e-14);
    CHECK(m.pigeonhole_floor ==
          doctest::Approx(1.0 / std::sqrt(inst.box.site_count())));
  }
}

TEST_CASE("neighbor bounds hold at the peak of every low eigenvector") {
  for (const std::int64_t sample : {0, 1, 2}) {
    const Instance inst = make(3, kPi / 4.0, 223, sample);
    for (int k = 0; k < inst.spec.eigenvalues.size(); ++k) {
      const double E = inst.spec.eigenvalues[k];
      if (E > 2.0) break;
      const Eigen::VectorXcd psi = inst.spec.eigenvectors.col(k);
      const NeighborBoundsReport r = neighbor_bounds(psi, inst.box, E);
      CHECK(r.margin_max_rule >= -1e-12);
      CHECK(r.margin_others_rule >= -1e-12);
      CHECK(r.margin_opposite_rule >= -1e-12);

      // Recompute the first rule from scratch: the eigenvalue equation at
      // the peak forces the neighbor sum up to (4 - E) M, so the largest
      // in-box neighbor reaches a quarter of that.
      const MaxSiteReport m = max_site(psi, inst.box);
      double best = 0.0, sum = 0.0;
      for (const Site y :
           {m.x0 + kE1, m.x0 - kE1, m.x0 + kE2, m.x0 - kE2}) {
        const double v = modulus_at(psi, inst.box, y);
        best = std::max(best, v);
        sum += v;
      }
      CHECK(sum >= (4.0 - E) * m.M - 1e-12);
      CHECK(best >= (1.0 - E / 4.0) * m.M - 1e-12);
      CHECK(r.margin_max_rule ==
            doctest::Approx(best - (1.0 - E / 4.0) * m.M).epsilon(1e-10));
    }
  }
}

TEST_CASE("square constants: pinned values and positivity below the threshold") {
  CHECK(square_constant_case1(1.0, 0.1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(square_constant_case2(1.0, 0.1) == doctest::Approx(0.35).epsilon(1e-15));

  // Formula check at another point: case 1 is the minimum of eps, 1 - E/4
  // and ((4 - E)(1 - E/4) - 2) / 2; case 2 of 2 - E - eps and
  // ((4 - E)(2 - E - eps) - 2) / 2.
  const double E = 0.8, eps = 0.05;
  CHECK(square_constant_case1(E, eps) ==
        doctest::Approx(std::min({eps, 1.0 - E / 4.0,
                                  ((4.0 - E) * (1.0 - E / 4.0) - 2.0) / 2.0})));
  CHECK(square_constant_case2(E, eps) ==
        doctest::Approx(std::min(2.0 - E - eps,
                                 ((4.0 - E) * (2.0 - E - eps) - 2.0) / 2.0)));

  for (double Es = 0.2; Es <= 1.1; Es += 0.1) {
    CHECK(square_constant_case1(Es, 0.05) > 0.0);
    CHECK(square_constant_case2(Es, 0.05) > 0.0);
  }
  CHECK(critical_energy() == doctest::Approx(4.0 - std::sqrt(8.0)).epsilon(1e-15));
}

TEST_CASE("find_square certifies four large corners for low eigenpairs") {
  int certified = 0;
  for (const std::int64_t sample : {0, 1, 2, 3}) {
    const Instance inst = make(3, kPi / 4.0, 227, sample);
    for (int k = 0; k < inst.spec.eigenvalues.size(); ++k) {
      const double E = inst.spec.eigenvalues[k];
      if (E > 1.0) break;
      const Eigen::VectorXcd psi = inst.spec.eigenvectors.col(k);
      const SquareCertificate cert = find_square(psi, inst.box, E, 1.0);
      REQUIRE(cert.valid);
      CHECK((cert.case_taken == 1 || cert.case_taken == 2));
      const double c_expected = cert.case_taken == 1
                                    ? square_constant_case1(1.0, cert.eps)
                                    : square_constant_case2(1.0, cert.eps);
      CHECK(cert.c == doctest::Approx(c_expected).epsilon(1e-15));

      // The four corners are exactly the plaquet's sites and each carries
      // at least c * M of modulus; min_on_Q reports their minimum.
      const std::set<std::pair<int, int>> expect = {
          {cert.Q.corner.x1, cert.Q.corner.x2},
          {cert.Q.corner.x1 + 1, cert.Q.corner.x2},
          {cert.Q.corner.x1 + 1, cert.Q.corner.x2 + 1},
          {cert.Q.corner.x1, cert.Q.corner.x2 + 1}};
      std::set<std::pair<int, int>> got;
      double min_corner = 8.0;
      for (const Site s : cert.corners) {
        got.insert({s.x1, s.x2});
        REQUIRE(inst.box.contains(s));
        min_corner = std::min(min_corner, modulus_at(psi, inst.box, s));
      }
      CHECK(got == expect);
      CHECK(cert.min_on_Q == doctest::Approx(min_corner).epsilon(1e-12));
      CHECK(min_corner >= cert.c * cert.M - 1e-12);
      ++certified;
    }
  }
  CHECK(certified > 0);
}

TEST_CASE("find_square rejects bad caps and survives adversarial input") {
  const Instance inst = make(2, kPi / 4.0, 229, 0);
  const Eigen::VectorXcd psi = inst.spec.eigenvectors.col(0);
  const double E = inst.spec.eigenvalues[0];
  CHECK_THROWS_AS(find_square(psi, inst.box, E, critical_energy() + 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(find_square(psi, inst.box, 1.05, 1.0), std::invalid_argument);

  // A delta function is no eigenvector; all its neighbors vanish, so no
  // square can be certified, and the reason is reported instead of a crash.
  Eigen::VectorXcd delta = Eigen::VectorXcd::Zero(inst.box.site_count());
  delta[inst.box.site_index(Site{0, 0})] = 1.0;
  const SquareCertificate cert = find_square(delta, inst.box, 0.5, 1.0);
  CHECK_FALSE(cert.valid);
  CHECK_FALSE(cert.failure.empty());
}

TEST_CASE("current lower bound: positive, attained, and correctly ordered") {
  const double b = kPi / 4.0;
  int bounded = 0;
  for (const std::int64_t sample : {0, 1, 2}) {
    const Instance inst = make(3, b, 233, sample);
    for (int k = 0; k < inst.spec.eigenvalues.size(); ++k) {
      const double E = inst.spec.eigenvalues[k];
      if (E > 1.0) break;
      const Eigen::VectorXcd psi = inst.spec.eigenvectors.col(k);
      const CurrentBoundReport r = current_lower_bound(psi, inst.A, E, 1.0, b);
      REQUIRE(r.ok);
      REQUIRE(r.cert.valid);
      CHECK(r.bound > 0.0);
      CHECK(r.bound ==
            doctest::Approx(4.0 * std::pow(r.cert.c * r.cert.M, 4.0) *
                            std::pow(std::sin(b / 8.0), 2.0))
                .epsilon(1e-12));
      CHECK(r.phase_band == doctest::Approx(b / 8.0));

      // The four bond phases add up to the flux through the square, which
      // sits inside the admissible band; the pigeonhole bond's phase stays
      // a band-width away from both 0 and pi.
      CHECK(r.flux_on_Q ==
            doctest::Approx(inst.flux.value(r.cert.Q)).epsilon(1e-12));
      CHECK(in_flux_band(r.flux_on_Q, b));
      double phase_sum = 0.0;
      for (const double p : r.phases) phase_sum += p;
      CHECK(torus_distance(phase_sum, r.flux_on_Q) < 1e-12);
      REQUIRE(r.pigeonhole_index >= 0);
      REQUIRE(r.pigeonhole_index < 4);
      CHECK(in_flux_band(r.phases[r.pigeonhole_index], b / 8.0));

      // Chain of inequalities down from the total current mass.
      CHECK(r.pigeonhole_current_sq >= r.bound - 1e-15);
      CHECK(r.boundary_current_sq >= r.pigeonhole_current_sq - 1e-15);
      CHECK(r.total_current_sq >= r.boundary_current_sq - 1e-15);
      ++bounded;
    }
  }
  CHECK(bounded > 0);
}

TEST_CASE("current lower bound declines fluxes outside the band") {
  // With the flat field every plaquet carries zero flux, which the phase
  // pigeonhole cannot use; the report must say so rather than fabricate a
  // positive bound.
  const BoxRegion box = BoxRegion::centered(2);
  const VectorPotential A = assemble_potential(FluxField(box), 2);
  const SpectrumResult spec = eigendecompose(assemble(A));
  const Eigen::VectorXcd psi = spec.eigenvectors.col(0);
  const double E = spec.eigenvalues[0];
  REQUIRE(E <= 1.0);
  const CurrentBoundReport r = current_lower_bound(psi, A, E, 1.0, kPi / 4.0);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.failure.empty());
  CHECK(r.bound == 0.0);
}

TEST_CASE("certificate serialization carries the full report") {
  const double b = kPi / 4.0;
  const Instance inst = make(2, b, 239, 1);
  const Eigen::VectorXcd psi = inst.spec.eigenvectors.col(0);
  const double E = inst.spec.eigenvalues[0];
  REQUIRE(E <= 1.0);
  const CurrentBoundReport r = current_lower_bound(psi, inst.A, E, 1.0, b);
  const nlohmann::json j = nlohmann::json::parse(certificate_json(r));
  CHECK(j.at("ok").get<bool>() == r.ok);
  CHECK(j.at("bound").get<double>() == doctest::Approx(r.bound).epsilon(1e-15));
  CHECK(j.at("case").get<int>() == r.cert.case_taken);
  CHECK(j.at("c").get<double>() == doctest::Approx(r.cert.c).epsilon(1e-15));
  CHECK(j.at("Q_corner")[0].get<int>() == r.cert.Q.corner.x1);
  CHECK(j.at("Q_corner")[1].get<int>() == r.cert.Q.corner.x2);
  CHECK(j.at("min_on_Q").get<double>() ==
        doctest::Approx(r.cert.min_on_Q).epsilon(1e-15));
  CHECK(j.at("phases").size() == 4);
  CHECK(j.at("pigeonhole_index").get<int>() == r.pigeonhole_index);
}

TEST_CASE("scaling study: positive minima and worker-count invariance") {
  const FluxDensity density = FluxDensity::bump(kPi / 4.0);
  const std::vector<int> L_list = {2, 3};
  const auto rows =
      derivative_scaling_study(density, L_list, 4, 1.0, 241, 1);
  REQUIRE(rows.size() == 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].L == L_list[i]);
    CHECK(rows[i].samples == 4);
    CHECK(rows[i].eigenpairs > 0);
    CHECK(rows[i].min_l4_derivatives > 0.0);
    CHECK(rows[i].min_l4_current > 0.0);
    CHECK(rows[i].mean_l4_derivatives >= rows[i].min_l4_derivatives);
  }

  const auto rows3 =
      derivative_scaling_study(density, L_list, 4, 1.0, 241, 3);
  REQUIRE(rows3.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows3[i].eigenpairs == rows[i].eigenpairs);
    CHECK(rows3[i].min_l4_derivatives == rows[i].min_l4_derivatives);
    CHECK(rows3[i].min_l4_current == rows[i].min_l4_current);
    CHECK(rows3[i].mean_l4_derivatives == rows[i].mean_l4_derivatives);
  }
}
