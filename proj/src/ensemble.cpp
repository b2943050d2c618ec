#include "fluxlab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fluxlab/hamiltonian.hpp"
#include "fluxlab/io.hpp"
#include "fluxlab/parallel.hpp"
#include "fluxlab/torus.hpp"
#include "json.hpp"

namespace fluxlab {

std::string EnsembleConfig::to_json() const {
  nlohmann::json j;
  j["L_list"] = L_list;
  j["E_grid"] = E_grid;
  j["eta_grid"] = eta_grid;
  j["samples"] = samples;
  j["density"] = {{"b", b},
                  {"profile", "cos4"},
                  {"mode", mode == DensityMode::symmetric ? "symmetric"
                                                          : "single_arc"}};
  j["E_star"] = E_star;
  j["master_seed"] = master_seed;
  j["workers"] = workers;
  j["gauge_variant"] = gauge_variant;
  return j.dump(2);
}

void validate_window_config(const EnsembleConfig& config) {
  if (!(config.E_star < critical_energy()))
    throw std::invalid_argument(
        "window config: E_star must stay below 4 - sqrt(8) ~ 1.1716");
  if (config.samples <= 0)
    throw std::invalid_argument("window config: samples must be positive");
  for (const double E : config.E_grid) {
    for (const double eta : config.eta_grid) {
      if (eta <= 0.0)
        throw std::invalid_argument("window config: eta must be positive");
      const bool low = E + eta / 2.0 <= config.E_star;
      const bool high = E - eta / 2.0 >= 8.0 - config.E_star;
      if (!low && !high)
        throw std::invalid_argument(
            "window config: [E - eta/2, E + eta/2] must satisfy "
            "E + eta/2 <= E_star, or mirrored E - eta/2 >= 8 - E_star");
    }
  }
}

namespace {

struct MeanStderr {
  double mean = 0.0, stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr m;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return m;
  for (const double x : xs) m.mean += x;
  m.mean /= n;
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (const double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.stderr_ = std::sqrt(ss / (n * (n - 1.0)));
  return m;
}

}  // namespace

WegnerTable wegner_experiment(const EnsembleConfig& config) {
  validate_window_config(config);
  const FluxDensity density = config.density();
  WegnerTable table;

  for (const int L : config.L_list) {
    const BoxRegion box = BoxRegion::centered(L);
    const auto task = [&](long s) {
      const DisorderSample dis =
          sample_fluxes(density, box, config.master_seed, s);
      const SpectrumResult spec =
          eigendecompose(assemble(dis.fluxes, config.gauge_variant));
      std::vector<double> counts;
      counts.reserve(config.E_grid.size() * config.eta_grid.size());
      for (const double E : config.E_grid)
        for (const double eta : config.eta_grid)
          counts.push_back(count_in_window(spec, E, eta));
      return counts;
    };
    const auto got =
        run_indexed<std::vector<double>>(config.samples, config.workers, task);
    if (!got.completed)
      throw NumericalError("wegner_experiment: sample task kept failing");

    int slot = 0;
    for (const double E : config.E_grid) {
      for (const double eta : config.eta_grid) {
        std::vector<double> xs;
        xs.reserve(config.samples);
        for (const auto& counts : got.results) xs.push_back(counts[slot]);
        const MeanStderr m = mean_stderr(xs);
        table.rows.push_back(
            {L, E, eta, m.mean, m.stderr_, static_cast<long>(xs.size())});
        ++slot;
      }
    }
  }
  return table;
}

WegnerFit fit_wegner_constant(const WegnerTable& table) {
  WegnerFit fit;
  double sxy = 0.0, sxx = 0.0;
  for (const WegnerRow& r : table.rows) {
    const double L8 = std::pow(static_cast<double>(r.L), 8.0);
    const double x = r.eta * L8;
    sxy += x * r.mean_count;
    sxx += x * x;
    fit.C_envelope = std::max(fit.C_envelope, r.mean_count / x);
  }
  fit.C_least_squares = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.min_slack = std::numeric_limits<double>::infinity();
  for (const WegnerRow& r : table.rows) {
    const double x = r.eta * std::pow(static_cast<double>(r.L), 8.0);
    fit.min_slack = std::min(fit.min_slack, fit.C_envelope * x - r.mean_count);
  }
  if (table.rows.empty()) fit.min_slack = 0.0;
  return fit;
}

std::string wegner_csv(const WegnerTable& table) {
  std::vector<std::string> rows;
  for (const WegnerRow& r : table.rows)
    rows.push_back(std::to_string(r.L) + "," + format_double(r.E) + "," +
                   format_double(r.eta) + "," + format_double(r.mean_count) +
                   "," + format_double(r.std_error) + "," +
                   std::to_string(r.samples));
  return csv_table("L,E,eta,mean_count,std_error,samples", rows);
}

IDSCurve ids_estimate(const EnsembleConfig& config) {
  if (config.L_list.empty())
    throw std::invalid_argument("ids_estimate: empty L list");
  if (config.E_grid.empty())
    throw std::invalid_argument("ids_estimate: empty energy grid");
  std::vector<int> Ls = config.L_list;
  std::sort(Ls.begin(), Ls.end());
  Ls.erase(std::unique(Ls.begin(), Ls.end()), Ls.end());

  IDSCurve curve;
  curve.L_hi = Ls.back();
  curve.L_lo = Ls.size() >= 2 ? Ls[Ls.size() - 2] : 0;
  curve.samples = config.samples;
  curve.E = config.E_grid;

  const FluxDensity density = config.density();
  const auto fractions = [&](int L) {
    const BoxRegion box = BoxRegion::centered(L);
    const double n = box.site_count();
    const auto task = [&](long s) {
      const DisorderSample dis =
          sample_fluxes(density, box, config.master_seed, s);
      const SpectrumResult spec =
          eigendecompose(assemble(dis.fluxes, config.gauge_variant));
      std::vector<double> fr(config.E_grid.size());
      for (std::size_t i = 0; i < config.E_grid.size(); ++i) {
        const auto* begin = spec.eigenvalues.data();
        const auto* end = begin + spec.eigenvalues.size();
        fr[i] = static_cast<double>(
                    std::upper_bound(begin, end, config.E_grid[i]) - begin) / n;
      }
      return fr;
    };
    const auto got =
        run_indexed<std::vector<double>>(config.samples, config.workers, task);
    if (!got.completed)
      throw NumericalError("ids_estimate: sample task kept failing");
    std::vector<double> mean(config.E_grid.size(), 0.0);
    for (const auto& fr : got.results)
      for (std::size_t i = 0; i < fr.size(); ++i) mean[i] += fr[i];
    for (double& m : mean) m /= config.samples;
    return mean;
  };

  curve.k_hi = fractions(curve.L_hi);
  if (curve.L_lo > 0) {
    curve.k_lo = fractions(curve.L_lo);
    curve.drift.resize(curve.E.size());
    for (std::size_t i = 0; i < curve.E.size(); ++i)
      curve.drift[i] = curve.k_hi[i] - curve.k_lo[i];
  }
  return curve;
}

std::string ids_csv(const IDSCurve& curve) {
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < curve.E.size(); ++i) {
    std::string row = format_double(curve.E[i]) + "," +
                      format_double(curve.k_hi[i]);
    row += "," + (curve.k_lo.empty() ? "" : format_double(curve.k_lo[i]));
    row += "," + (curve.drift.empty() ? "" : format_double(curve.drift[i]));
    rows.push_back(row);
  }
  return csv_table("E,k_hat_L" + std::to_string(curve.L_hi) + ",k_hat_L" +
                       std::to_string(curve.L_lo) + ",drift",
                   rows);
}

std::vector<LifshitzRow> lifshitz_diagnostic(const IDSCurve& curve, double b) {
  const double E0 = spectral_bottom(b);
  std::vector<LifshitzRow> rows;
  for (std::size_t i = 0; i < curve.E.size(); ++i) {
    LifshitzRow r;
    r.E = curve.E[i];
    r.k_hat = curve.k_hi[i];
    if (r.k_hat <= 0.0) {
      r.reason = "empty counting fraction";
    } else if (r.k_hat >= 1.0) {
      r.reason = "counting fraction saturated";
    } else if (r.E <= E0) {
      r.reason = "at or below the deterministic edge";
    } else if (std::abs(std::log(r.E - E0)) < 1e-12) {
      r.reason = "unit distance from the edge";
    } else {
      const double inner = -std::log(r.k_hat);
      if (inner <= 0.0) {
        r.reason = "counting fraction too large";
      } else {
        r.ratio = std::log(inner) / std::log(r.E - E0);
        r.defined = true;
      }
    }
    rows.push_back(r);
  }
  return rows;
}

std::string lifshitz_csv(const std::vector<LifshitzRow>& rows) {
  std::vector<std::string> out;
  for (const LifshitzRow& r : rows)
    out.push_back(format_double(r.E) + "," + format_double(r.k_hat) + "," +
                  (r.defined ? format_double(r.ratio) : "") + "," +
                  (r.defined ? "yes" : r.reason));
  return csv_table("E,k_hat,ratio,defined", out);
}

double inverse_participation_ratio(const Eigen::VectorXcd& psi) {
  const double n2 = psi.squaredNorm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) s += std::norm(psi[i]) * std::norm(psi[i]);
  return s / (n2 * n2);
}

DecayFit fit_exponential_envelope(const Eigen::VectorXcd& psi,
                                  const BoxRegion& box) {
  DecayFit fit;
  int peak = 0;
  for (int i = 1; i < psi.size(); ++i)
    if (std::abs(psi[i]) > std::abs(psi[peak])) peak = i;
  const Site x0 = box.site_at(peak);

  // Only complete shells: rings clipped by the box edge mix the Dirichlet
  // suppression into the envelope and bias the slope.
  const int rmax = std::min(
      {x0.x1 - box.lo().x1, box.hi().x1 - x0.x1, x0.x2 - box.lo().x2,
       box.hi().x2 - x0.x2});
  std::vector<double> env(rmax + 1, 0.0);
  for (int i = 0; i < psi.size(); ++i) {
    const Site s = box.site_at(i);
    const int r = std::max(std::abs(s.x1 - x0.x1), std::abs(s.x2 - x0.x2));
    if (r <= rmax) env[r] = std::max(env[r], std::abs(psi[i]));
  }

  // The r = 0 shell is the peak itself, not part of the decaying tail; it
  // counts as a shell but stays out of the regression.
  std::vector<double> xs, ys;
  for (int r = 1; r <= rmax; ++r) {
    if (env[r] > env[0] * 1e-14) {
      xs.push_back(r);
      ys.push_back(std::log(env[r]));
    }
  }
  fit.shells = rmax + 1;
  if (fit.shells < 4 || xs.size() < 3) return fit;

  const double n = xs.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) return fit;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = intercept + slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  fit.rate = -slope;
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  fit.ok = true;
  return fit;
}

std::vector<LocalizationRow> localization_diagnostics(
    const EnsembleConfig& config, double window, int lowest, bool clean) {
  const FluxDensity density = config.density();
  const double E0 = clean ? 0.0 : spectral_bottom(config.b);
  const long samples = clean ? 1 : config.samples;
  std::vector<LocalizationRow> rows;

  for (const int L : config.L_list) {
    const BoxRegion box = BoxRegion::centered(L);
    const auto task = [&](long s) {
      FluxField flux(box);
      if (!clean)
        flux = sample_fluxes(density, box, config.master_seed, s).fluxes;
      const SpectrumResult spec =
          eigendecompose(assemble(flux, config.gauge_variant));
      std::vector<LocalizationRow> out;
      for (int k = 0; k < spec.eigenvalues.size(); ++k) {
        const double E = spec.eigenvalues[k];
        if (k >= lowest && E > E0 + window) break;
        LocalizationRow row;
        row.L = L;
        row.sample = s;
        row.k = k;
        row.energy = E;
        row.ipr = inverse_participation_ratio(spec.eigenvectors.col(k));
        const DecayFit fit =
            fit_exponential_envelope(spec.eigenvectors.col(k), box);
        row.decay_rate = fit.rate;
        row.fit_r2 = fit.r2;
        row.shells = fit.shells;
        row.fit_ok = fit.ok;
        out.push_back(row);
      }
      return out;
    };
    const auto got = run_indexed<std::vector<LocalizationRow>>(
        samples, config.workers, task);
    if (!got.completed)
      throw NumericalError("localization_diagnostics: sample task kept failing");
    for (const auto& part : got.results)
      rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

std::string localization_csv(const std::vector<LocalizationRow>& rows) {
  std::vector<std::string> out;
  for (const LocalizationRow& r : rows)
    out.push_back(std::to_string(r.L) + "," + std::to_string(r.sample) + "," +
                  std::to_string(r.k) + "," + format_double(r.energy) + "," +
                  format_double(r.ipr) + "," + format_double(r.decay_rate) +
                  "," + format_double(r.fit_r2) + "," +
                  std::to_string(r.shells) + "," + (r.fit_ok ? "1" : "0"));
  return csv_table("L,sample,k,energy,ipr,decay_rate,fit_r2,shells,fit_ok",
                   out);
}

}  // namespace fluxlab
