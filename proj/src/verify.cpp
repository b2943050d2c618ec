#include "fluxlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

#include "fluxlab/current.hpp"
#include "fluxlab/hamiltonian.hpp"
#include "fluxlab/io.hpp"
#include "fluxlab/regularity.hpp"
#include "fluxlab/rng.hpp"

namespace fluxlab {

namespace {

struct Instance {
  BoxRegion box;
  FluxField flux;
  VectorPotential A;
  HamiltonianMatrix H;
  SpectrumResult spec;
};

Instance make_instance(const SuiteOptions& o, const FluxDensity& density,
                       long trial) {
  const int L = o.L_list.at(trial % o.L_list.size());
  const BoxRegion box = BoxRegion::centered(L);
  FluxField flux = sample_fluxes(density, box, o.master_seed, trial).fluxes;
  VectorPotential A = assemble_potential(flux, o.gauge_variant);
  HamiltonianMatrix H = assemble(A);
  SpectrumResult spec = eigendecompose(H);
  return {box, std::move(flux), std::move(A), std::move(H), std::move(spec)};
}

// Uniform double in [0,1) from the suite's replay stream.
double trial_uniform(const SuiteOptions& o, long trial, std::uint64_t salt) {
  return detail::uniform01(
      detail::counter_hash(o.master_seed ^ 0xf00dull, trial, salt));
}

int trial_plaquet(const Instance& inst, const SuiteOptions& o, long trial,
                  std::uint64_t salt) {
  return static_cast<int>(trial_uniform(o, trial, salt) *
                          inst.box.plaquet_count());
}

using Recorder = std::function<void(double, long)>;
using SuiteBody =
    std::function<void(const Instance&, long, const SuiteOptions&,
                       const Recorder&, SuiteResult&)>;

SuiteResult run_generic(const std::string& name, double tolerance,
                        const SuiteOptions& opts, const SuiteBody& body) {
  SuiteResult res;
  res.name = name;
  res.tolerance = tolerance;
  res.trials = opts.trials;
  const FluxDensity density = FluxDensity::bump(opts.b, opts.mode);
  const Recorder record = [&](double err, long trial) {
    ++res.checks;
    if (err > res.worst_error) res.worst_error = err;
    if (err > tolerance && res.failing_trial < 0) res.failing_trial = trial;
  };
  for (long trial = 0; trial < opts.trials; ++trial) {
    const Instance inst = make_instance(opts, density, trial);
    body(inst, trial, opts, record, res);
  }
  res.pass = res.worst_error <= tolerance && res.checks > 0;
  if (res.detail.empty()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "worst %.3e over %ld checks", res.worst_error,
                  res.checks);
    res.detail = buf;
  }
  return res;
}

// Spectra must not move under any admissible change of the bond angles that
// keeps every plaquet flux fixed.
SuiteResult suite_gauge_invariance(const SuiteOptions& o) {
  return run_generic(
      "gauge-invariance", 1e-9, o,
      [](const Instance& inst, long trial, const SuiteOptions& opts,
         const Recorder& record, SuiteResult&) {
        record(gauge_invariance_deviation(
                   inst.flux, detail::counter_hash(opts.master_seed, trial, 17)),
               trial);
        if (opts.inject_bug) {
          // Negative control: a single corrupted bond angle changes the
          // fluxes, so the spectrum must move and the suite must go red.
          VectorPotential tampered = inst.A;
          bool done = false;
          inst.A.field().for_each_canonical([&](Arrow a, double v) {
            if (!done) tampered.set(a, v + 0.05);
            done = true;
          });
          const SpectrumResult s = eigendecompose(assemble(tampered));
          record((s.eigenvalues - inst.spec.eigenvalues).cwiseAbs().maxCoeff(),
                 trial);
        }
      });
}

SuiteResult suite_particle_hole(const SuiteOptions& o) {
  return run_generic(
      "particle-hole", 1e-9, o,
      [](const Instance& inst, long trial, const SuiteOptions&,
         const Recorder& record, SuiteResult&) {
        record(particle_hole_defect(inst.spec.eigenvalues), trial);
      });
}

SuiteResult suite_divergence(const SuiteOptions& o) {
  return run_generic(
      "divergence", 1e-10, o,
      [](const Instance& inst, long trial, const SuiteOptions&,
         const Recorder& record, SuiteResult&) {
        for (int k = 0; k < inst.spec.eigenvalues.size(); ++k) {
          const ArrowField J =
              current_field(inst.spec.eigenvectors.col(k), inst.A);
          double worst = 0.0;
          for (int i = 0; i < inst.box.site_count(); ++i)
            worst = std::max(worst,
                             std::abs(divergence(J, inst.box.site_at(i))));
          record(worst, trial);
        }
      });
}

// d lambda / d flux from the current against a tracked central difference.
// Relative once the derivative exceeds 1e-3 in size, absolute below that
// (the difference scheme itself carries ~1e-10 of rounding noise).
SuiteResult suite_derivative_fd(const SuiteOptions& o) {
  return run_generic(
      "derivative-fd", 1e-5, o,
      [](const Instance& inst, long trial, const SuiteOptions& opts,
         const Recorder& record, SuiteResult& res) {
        const double h = 1e-5;
        const int n = static_cast<int>(inst.spec.eigenvalues.size());
        const std::vector<int> ks = {0, n / 2, n - 1};
        for (int which = 0; which < 2; ++which) {
          const Plaquet f =
              inst.box.plaquet_at(trial_plaquet(inst, opts, trial, 100 + which));
          SpectrumResult plus, minus;
          for (const double sign : {+1.0, -1.0}) {
            FluxField shifted = inst.flux;
            shifted.set(f, shifted.value(f) + sign * h);
            (sign > 0 ? plus : minus) = eigendecompose(
                assemble(assemble_potential(shifted, opts.gauge_variant)));
          }
          for (const int k : ks) {
            const double gap_lo =
                k > 0 ? inst.spec.eigenvalues[k] - inst.spec.eigenvalues[k - 1]
                      : 8.0;
            const double gap_hi =
                k + 1 < n
                    ? inst.spec.eigenvalues[k + 1] - inst.spec.eigenvalues[k]
                    : 8.0;
            if (std::min(gap_lo, gap_hi) <= 1e-6) {
              ++res.skipped;
              continue;
            }
            const ArrowField J =
                current_field(inst.spec.eigenvectors.col(k), inst.A);
            const double hf = hf_derivative(J, f, opts.gauge_variant);
            const double lp = plus.eigenvalues[track_eigenvector(
                inst.spec.eigenvectors, k, plus.eigenvectors)];
            const double lm = minus.eigenvalues[track_eigenvector(
                inst.spec.eigenvectors, k, minus.eigenvectors)];
            const double fd = (lp - lm) / (2.0 * h);
            record(std::abs(hf - fd) /
                       std::max({std::abs(hf), std::abs(fd), 1e-3}),
                   trial);
          }
        }
      });
}

SuiteResult suite_current_inversion(const SuiteOptions& o) {
  return run_generic(
      "current-inversion", 1e-10, o,
      [](const Instance& inst, long trial, const SuiteOptions&,
         const Recorder& record, SuiteResult&) {
        const int n = static_cast<int>(inst.spec.eigenvalues.size());
        for (const int k : {0, n / 2, n - 1}) {
          const ArrowField J =
              current_field(inst.spec.eigenvectors.col(k), inst.A);
          for (const Arrow& a : inst.box.arrows())
            record(std::abs(J.value(a) - current_from_derivatives(J, a)),
                   trial);
        }
      });
}

// Three routes to the same flux derivative: the canonical-support sum, the
// literal half sum over every directed bond, and the defining double sum.
SuiteResult suite_half_sum(const SuiteOptions& o) {
  return run_generic(
      "half-sum", 1e-12, o,
      [](const Instance& inst, long trial, const SuiteOptions& opts,
         const Recorder& record, SuiteResult&) {
        std::vector<Eigen::VectorXcd> states;
        states.push_back(inst.spec.eigenvectors.col(0));
        Eigen::VectorXcd random(inst.box.site_count());
        for (int i = 0; i < random.size(); ++i) {
          const double re = trial_uniform(opts, trial, 1000 + 2 * i) - 0.5;
          const double im = trial_uniform(opts, trial, 1001 + 2 * i) - 0.5;
          random[i] = std::complex<double>(re, im);
        }
        random.normalize();
        states.push_back(random);

        for (const Eigen::VectorXcd& psi : states) {
          const ArrowField J = current_field(psi, inst.A);
          for (const Plaquet& f : inst.box.plaquets()) {
            const double v1 = hf_derivative(J, f, opts.gauge_variant);
            const ArrowField coeff =
                unit_flux_gauge(inst.box, f, opts.gauge_variant);
            double v2 = 0.0;
            for (const Arrow& a : inst.box.arrows())
              v2 += coeff.value(a) * J.value(a);
            v2 /= 2.0;
            const double v3 =
                hf_derivative_direct(psi, inst.A, f, opts.gauge_variant);
            record(std::max({std::abs(v1 - v2), std::abs(v1 - v3),
                             std::abs(v2 - v3)}),
                   trial);
          }
        }
      });
}

SuiteResult suite_neighbor_bounds(const SuiteOptions& o) {
  return run_generic(
      "neighbor-bounds", 1e-10, o,
      [](const Instance& inst, long trial, const SuiteOptions&,
         const Recorder& record, SuiteResult&) {
        for (int k = 0; k < inst.spec.eigenvalues.size(); ++k) {
          const double E = inst.spec.eigenvalues[k];
          if (E > 4.0) break;
          const NeighborBoundsReport r =
              neighbor_bounds(inst.spec.eigenvectors.col(k), inst.box, E);
          const double worst_margin = std::min(
              {r.margin_max_rule, r.margin_others_rule, r.margin_opposite_rule});
          record(std::max(0.0, -worst_margin), trial);
        }
      });
}

SuiteResult suite_square_certificate(const SuiteOptions& o) {
  SuiteResult res = run_generic(
      "square-certificate", 1e-12, o,
      [](const Instance& inst, long trial, const SuiteOptions& opts,
         const Recorder& record, SuiteResult& r) {
        for (int k = 0; k < inst.spec.eigenvalues.size(); ++k) {
          const double E = inst.spec.eigenvalues[k];
          if (E > opts.E_star) break;
          const SquareCertificate cert = find_square(
              inst.spec.eigenvectors.col(k), inst.box, E, opts.E_star, opts.eps);
          if (!cert.valid) {
            record(1.0, trial);
            if (r.detail.empty()) r.detail = "invalid: " + cert.failure;
            continue;
          }
          record(std::max(0.0, cert.c * cert.M - cert.min_on_Q), trial);
        }
      });
  return res;
}

SuiteResult suite_current_bound(const SuiteOptions& o) {
  return run_generic(
      "current-bound", 1e-15, o,
      [](const Instance& inst, long trial, const SuiteOptions& opts,
         const Recorder& record, SuiteResult& r) {
        for (int k = 0; k < inst.spec.eigenvalues.size(); ++k) {
          const double E = inst.spec.eigenvalues[k];
          if (E > opts.E_star) break;
          const CurrentBoundReport rep =
              current_lower_bound(inst.spec.eigenvectors.col(k), inst.A, E,
                                  opts.E_star, opts.b, opts.eps);
          if (!rep.ok) {
            record(1.0, trial);
            if (r.detail.empty()) r.detail = "failed: " + rep.failure;
            continue;
          }
          record(std::max({0.0, rep.bound - rep.pigeonhole_current_sq,
                           rep.bound - rep.boundary_current_sq,
                           rep.bound - rep.total_current_sq,
                           rep.bound > 0.0 ? 0.0 : 1.0}),
                 trial);
        }
      });
}

// One-sided trade of a windowed trace against per-eigenvalue curvatures.
// The curvature side carries difference-scheme noise of about
// 30 eps |H| / (h/2)^2 per eigenvalue, which the budget absorbs.
SuiteResult suite_trace_trick(const SuiteOptions& o) {
  return run_generic(
      "trace-trick", 1e-6, o,
      [](const Instance& inst, long trial, const SuiteOptions& opts,
         const Recorder& record, SuiteResult& res) {
        const double E = 2.0 + 4.0 * trial_uniform(opts, trial, 7);
        const double eta = 0.05 + 0.45 * trial_uniform(opts, trial, 8);
        const Plaquet f = inst.box.plaquet_at(trial_plaquet(inst, opts, trial, 9));
        const TraceTrickReport r =
            trace_trick_check(inst.flux, opts.gauge_variant, f, E, eta);
        if (r.skipped) {
          ++res.skipped;
          return;
        }
        const double h = 1e-4;
        const double per_level =
            60.0 * std::numeric_limits<double>::epsilon() * 8.0 /
            ((h / 2.0) * (h / 2.0));
        double sum_F = 0.0;
        for (int k = 0; k < inst.spec.eigenvalues.size(); ++k)
          sum_F += window_primitive(inst.spec.eigenvalues[k], E, eta);
        const double budget = per_level * sum_F;
        record(std::max(0.0, r.lhs - r.rhs - budget), trial);
        record(std::max(0.0, r.trace_G - r.trace_G_bound), trial);
        record(std::max(0.0, -r.trace_G), trial);
      });
}

// Zero flux makes the box spectrum highly degenerate; inside one cluster the
// compressed first derivative must dominate its diagonal in square-trace.
SuiteResult suite_jensen_degenerate(const SuiteOptions& o) {
  return run_generic(
      "jensen-degenerate", 1e-10, o,
      [](const Instance& inst, long trial, const SuiteOptions& opts,
         const Recorder& record, SuiteResult& res) {
        const FluxField zero(inst.box);
        const VectorPotential A = assemble_potential(zero, opts.gauge_variant);
        const SpectrumResult spec = eigendecompose(assemble(A));
        const int n = static_cast<int>(spec.eigenvalues.size());
        int best_start = 0, best_size = 1, start = 0;
        for (int k = 1; k <= n; ++k) {
          const bool split =
              k == n || spec.eigenvalues[k] - spec.eigenvalues[k - 1] >
                            spec.degeneracy_tolerance;
          if (split) {
            if (k - start > best_size) {
              best_size = k - start;
              best_start = start;
            }
            start = k;
          }
        }
        if (best_size < 2) {
          ++res.skipped;
          return;
        }
        const Plaquet f = inst.box.plaquet_at(trial_plaquet(inst, opts, trial, 11));
        const JensenReport r =
            degenerate_jensen_check(spec, A, f, opts.gauge_variant, best_start,
                                    best_size);
        record(std::max(0.0, r.sum_diag_sq - r.trace_T_sq), trial);
        record(r.diag_consistency, trial);
      });
}

// Crude operator bounds: the second flux derivative has norm at most 4, and
// the summed squared current is at most 32 times the summed squared
// derivatives.
SuiteResult suite_norm_bounds(const SuiteOptions& o) {
  return run_generic(
      "norm-bounds", 1e-12, o,
      [](const Instance& inst, long trial, const SuiteOptions& opts,
         const Recorder& record, SuiteResult&) {
        for (int which = 0; which < 2; ++which) {
          const Plaquet f =
              inst.box.plaquet_at(trial_plaquet(inst, opts, trial, 30 + which));
          for (int variant = 1; variant <= 4; ++variant)
            record(std::max(0.0,
                            operator_norm(flux_second_derivative_matrix(
                                inst.A, f, variant)) -
                                4.0),
                   trial);
        }
        const int n = static_cast<int>(inst.spec.eigenvalues.size());
        for (const int k : {0, n - 1}) {
          const ArrowField J =
              current_field(inst.spec.eigenvectors.col(k), inst.A);
          const DerivativeNorms norms =
              derivative_norms(J, opts.gauge_variant);
          record(std::max(0.0, norms.sum_sq_current -
                                   32.0 * norms.sum_sq_derivatives),
                 trial);
        }
      });
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "gauge-invariance", "particle-hole",      "divergence",
      "derivative-fd",    "current-inversion",  "half-sum",
      "neighbor-bounds",  "square-certificate", "current-bound",
      "trace-trick",      "jensen-degenerate",  "norm-bounds"};
  return names;
}

std::vector<std::string> identity_suite_names() {
  return {"gauge-invariance", "particle-hole", "divergence",
          "derivative-fd",    "current-inversion", "half-sum"};
}

std::vector<std::string> regularity_suite_names() {
  return {"neighbor-bounds", "square-certificate", "current-bound"};
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opts) {
  if (name == "gauge-invariance") return suite_gauge_invariance(opts);
  if (name == "particle-hole") return suite_particle_hole(opts);
  if (name == "divergence") return suite_divergence(opts);
  if (name == "derivative-fd") return suite_derivative_fd(opts);
  if (name == "current-inversion") return suite_current_inversion(opts);
  if (name == "half-sum") return suite_half_sum(opts);
  if (name == "neighbor-bounds") return suite_neighbor_bounds(opts);
  if (name == "square-certificate") return suite_square_certificate(opts);
  if (name == "current-bound") return suite_current_bound(opts);
  if (name == "trace-trick") return suite_trace_trick(opts);
  if (name == "jensen-degenerate") return suite_jensen_degenerate(opts);
  if (name == "norm-bounds") return suite_norm_bounds(opts);
  throw std::invalid_argument("unknown suite: " + name);
}

std::vector<SuiteResult> run_all_suites(const SuiteOptions& opts) {
  std::vector<SuiteResult> out;
  for (const std::string& name : suite_names())
    out.push_back(run_suite(name, opts));
  return out;
}

std::string suite_report(const std::vector<SuiteResult>& results) {
  std::string out;
  for (const SuiteResult& r : results) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%-4s %-20s worst %.3e  tol %.0e  checks %ld  skipped %ld",
                  r.pass ? "ok" : "FAIL", r.name.c_str(), r.worst_error,
                  r.tolerance, r.checks, r.skipped);
    out += buf;
    if (!r.pass && r.failing_trial >= 0)
      out += "  replay_trial " + std::to_string(r.failing_trial);
    if (!r.pass && !r.detail.empty()) out += "  [" + r.detail + "]";
    out += '\n';
  }
  return out;
}

}  // namespace fluxlab
