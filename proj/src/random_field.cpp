#include "fluxlab/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fluxlab/rng.hpp"
#include "fluxlab/torus.hpp"
#include "json.hpp"

namespace fluxlab {

namespace {

constexpr int kKnots = 1 << 14;

// Antiderivative of cos^4: 3u/8 + sin(2u)/4 + sin(4u)/32.
double cos4_primitive(double u) {
  return 3.0 * u / 8.0 + std::sin(2.0 * u) / 4.0 + std::sin(4.0 * u) / 32.0;
}

// Mass of [arc.lo, t] for t inside the arc.
double arc_mass_below(const DensityArc& arc, double t) {
  const double w = arc.hi - arc.lo;
  const double theta = kPi * (t - 0.5 * (arc.lo + arc.hi)) / w;
  return arc.amplitude * (w / kPi) *
         (cos4_primitive(theta) + 3.0 * kPi / 16.0);
}

}  // namespace

FluxDensity FluxDensity::bump(double b, DensityMode mode) {
  if (!(b > 0.0) || !(b < kPi / 2.0))
    throw std::invalid_argument("FluxDensity::bump: need 0 < b < pi/2");
  FluxDensity v;
  v.b_ = b;
  v.mode_ = mode;
  const double w = kPi - 2.0 * b;
  if (mode == DensityMode::symmetric) {
    v.arcs_.push_back({-(kPi - b), -b, 0.5, 4.0 / (3.0 * w)});
    v.arcs_.push_back({b, kPi - b, 0.5, 4.0 / (3.0 * w)});
  } else {
    v.arcs_.push_back({b, kPi - b, 1.0, 8.0 / (3.0 * w)});
  }
  v.build_tables();
  return v;
}

double FluxDensity::pdf(double t) const {
  t = wrap_angle(t);
  for (const DensityArc& arc : arcs_) {
    if (t < arc.lo || t > arc.hi) continue;
    const double w = arc.hi - arc.lo;
    const double c = std::cos(kPi * (t - 0.5 * (arc.lo + arc.hi)) / w);
    return arc.amplitude * c * c * c * c;
  }
  return 0.0;
}

double FluxDensity::cdf(double t) const {
  t = wrap_angle(t);
  double m = 0.0;
  for (const DensityArc& arc : arcs_) {
    if (t >= arc.hi)
      m += arc.mass;
    else if (t > arc.lo)
      m += arc_mass_below(arc, t);
  }
  return m;
}

void FluxDensity::build_tables() {
  tables_.clear();
  double before = 0.0;
  for (const DensityArc& arc : arcs_) {
    InverseTable tab;
    tab.mass_before = before;
    tab.mass = arc.mass;
    tab.t.resize(kKnots);
    tab.t.front() = arc.lo;
    tab.t.back() = arc.hi;
    for (int k = 1; k + 1 < kKnots; ++k) {
      const double target = arc.mass * k / (kKnots - 1);
      double lo = arc.lo, hi = arc.hi;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (arc_mass_below(arc, mid) < target ? lo : hi) = mid;
      }
      tab.t[k] = 0.5 * (lo + hi);
    }

    // Fritsch-Carlson slopes on the uniform mass grid keep the interpolant
    // monotone, so samples never leave the arc.
    const double h = arc.mass / (kKnots - 1);
    std::vector<double> delta(kKnots - 1);
    for (int k = 0; k + 1 < kKnots; ++k) delta[k] = (tab.t[k + 1] - tab.t[k]) / h;
    tab.slope.resize(kKnots);
    tab.slope.front() = delta.front();
    tab.slope.back() = delta.back();
    for (int k = 1; k + 1 < kKnots; ++k) {
      if (delta[k - 1] <= 0.0 || delta[k] <= 0.0)
        tab.slope[k] = 0.0;
      else
        tab.slope[k] = 2.0 * delta[k - 1] * delta[k] / (delta[k - 1] + delta[k]);
    }
    tables_.push_back(std::move(tab));
    before += arc.mass;
  }
}

double FluxDensity::quantile(double u) const {
  u = std::clamp(u, 0.0, std::nextafter(1.0, 0.0));
  const InverseTable* tab = &tables_.back();
  for (const InverseTable& t : tables_) {
    if (u < t.mass_before + t.mass) {
      tab = &t;
      break;
    }
  }
  const double local = std::clamp(u - tab->mass_before, 0.0, tab->mass);
  const double h = tab->mass / (kKnots - 1);
  const double pos = local / h;
  const int k = std::min(static_cast<int>(pos), kKnots - 2);
  const double s = pos - k;
  const double t0 = tab->t[k], t1 = tab->t[k + 1];
  const double m0 = tab->slope[k] * h, m1 = tab->slope[k + 1] * h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * t0 + (s3 - 2 * s2 + s) * m0 +
         (-2 * s3 + 3 * s2) * t1 + (s3 - s2) * m1;
}

double FluxDensity::derivative_bound() const {
  double d = 0.0;
  for (const DensityArc& arc : arcs_) {
    const double w = arc.hi - arc.lo;
    const double d0 = arc.amplitude;
    // max |d/dt cos^4| = (4 pi/w) max |cos^3 sin| = (4 pi/w) (3 sqrt 3 / 16)
    const double d1 = arc.amplitude * (4.0 * kPi / w) * (3.0 * std::sqrt(3.0) / 16.0);
    // max |d^2/dt^2 cos^4| attained at the bump center
    const double d2 = arc.amplitude * 4.0 * kPi * kPi / (w * w);
    d = std::max({d, d0, d1, d2});
  }
  return d;
}

std::string FluxDensity::config_json() const {
  nlohmann::json j;
  j["b"] = b_;
  j["profile"] = "cos4";
  j["mode"] = mode_ == DensityMode::symmetric ? "symmetric" : "single_arc";
  return j.dump();
}

FluxDensity FluxDensity::from_config_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("profile", "cos4") != std::string("cos4"))
    throw std::invalid_argument("flux density: unknown profile");
  const std::string mode = j.value("mode", "symmetric");
  if (mode != "symmetric" && mode != "single_arc")
    throw std::invalid_argument("flux density: unknown mode");
  return bump(j.at("b").get<double>(), mode == "symmetric"
                                           ? DensityMode::symmetric
                                           : DensityMode::single_arc);
}

AssumptionReport validate_assumption(const FluxDensity& v, int grid_points) {
  AssumptionReport r;
  r.b = v.b();
  const double step = kTwoPi / grid_points;
  double mass = 0.0, dmax = 0.0, margin = kPi;
  bool nonneg = true, in_band = true;
  for (int i = 0; i < grid_points; ++i) {
    const double t = -kPi + (i + 0.5) * step;
    const double p = v.pdf(t);
    mass += p * step;
    if (p < 0.0) nonneg = false;
    if (p > 1e-14) {
      if (!in_flux_band(t, v.b())) in_band = false;
      margin = std::min(margin,
                        std::min(torus_distance(t, 0.0), torus_distance(t, kPi)) - v.b());
    }
    const double p1 = (v.pdf(t + step) - v.pdf(t - step)) / (2.0 * step);
    const double p2 = (v.pdf(t + step) - 2.0 * p + v.pdf(t - step)) / (step * step);
    dmax = std::max({dmax, p, std::abs(p1), std::abs(p2)});
  }
  r.total_mass = mass;
  r.derivative_bound = dmax;
  r.band_margin = margin;
  r.nonnegative = nonneg;
  r.normalized = std::abs(mass - 1.0) < 1e-6;
  r.supported_in_band = in_band;
  r.ok = r.nonnegative && r.normalized && r.supported_in_band;
  return r;
}

DisorderSample sample_fluxes(const FluxDensity& v, const BoxRegion& box,
                             std::uint64_t master_seed, std::int64_t sample_index) {
  DisorderSample out{FluxField(box), master_seed, sample_index};
  for (int p = 0; p < box.plaquet_count(); ++p) {
    const std::uint64_t bits = detail::counter_hash(
        master_seed, static_cast<std::uint64_t>(sample_index),
        static_cast<std::uint64_t>(p));
    out.fluxes.set_at(p, v.quantile(detail::uniform01(bits)));
  }
  return out;
}

}  // namespace fluxlab
