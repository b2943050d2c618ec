#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fluxlab/current.hpp"
#include "fluxlab/ensemble.hpp"
#include "fluxlab/hamiltonian.hpp"
#include "fluxlab/io.hpp"
#include "fluxlab/regularity.hpp"
#include "fluxlab/verify.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace fluxlab;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitVerification = 3;
constexpr int kExitNumerical = 4;

std::string default_out_dir() {
  const char* env = std::getenv("FLUXLAB_OUTDIR");
  return env && *env ? env : ".";
}

// Config file values fill in only the options the command line left alone.
template <typename T>
void merge_config(const json& cfg, const char* key, const CLI::Option* opt,
                  T& var) {
  if (opt != nullptr && opt->count() == 0 && cfg.contains(key))
    var = cfg.at(key).get<T>();
}

DensityMode parse_mode(const std::string& mode) {
  if (mode == "symmetric") return DensityMode::symmetric;
  if (mode == "single_arc") return DensityMode::single_arc;
  throw std::invalid_argument("mode must be symmetric or single_arc");
}

struct ManifestWriter {
  std::string out_dir;
  std::string prefix;
  std::string command;
  json config;
  std::vector<std::string> outputs;
  std::string started = iso8601_utc_now();

  std::string path(const std::string& suffix) const {
    return out_dir + "/" + prefix + suffix;
  }
  void wrote(const std::string& p) { outputs.push_back(p); }
  void finish() {
    json m;
    m["command"] = command;
    m["config"] = config;
    m["config_hash"] = hex64(fnv1a64(config.dump()));
    m["started"] = started;
    m["finished"] = iso8601_utc_now();
    m["outputs"] = outputs;
    const std::string p = path("_manifest.json");
    write_text_file(p, m.dump(2) + "\n");
    std::printf("manifest: %s\n", p.c_str());
  }
};

json ensemble_config_json(const EnsembleConfig& c) {
  return json::parse(c.to_json());
}

int cmd_spectrum(int L, double b, const std::string& mode_name,
                 std::uint64_t seed, std::int64_t sample_index, int variant,
                 const std::string& flux_file, bool zero_flux, bool dump_states,
                 bool dump_current, ManifestWriter& manifest, bool dry_run) {
  const BoxRegion box = BoxRegion::centered(L);
  manifest.config = {{"L", L},           {"b", b},
                     {"mode", mode_name}, {"seed", seed},
                     {"sample_index", sample_index}, {"gauge_variant", variant},
                     {"flux_file", flux_file}, {"zero_flux", zero_flux}};
  if (dry_run) {
    std::printf("would diagonalize a %d-site box and write %s\n",
                box.site_count(), manifest.path("_eigenvalues.csv").c_str());
    return kExitOk;
  }

  FluxField flux(box);
  if (!flux_file.empty())
    flux = FluxField::from_json(read_text_file(flux_file));
  else if (!zero_flux)
    flux = sample_fluxes(FluxDensity::bump(b, parse_mode(mode_name)), box, seed,
                         sample_index)
               .fluxes;
  if (!(flux.box() == box))
    throw std::invalid_argument("flux file box does not match --L");

  const VectorPotential A = assemble_potential(flux, variant);
  const SpectrumResult spec = eigendecompose(assemble(A));

  write_text_file(manifest.path("_eigenvalues.csv"),
                  spectrum_csv(sample_index, spec.eigenvalues));
  manifest.wrote(manifest.path("_eigenvalues.csv"));
  write_text_file(manifest.path("_flux.json"), flux.to_json() + "\n");
  manifest.wrote(manifest.path("_flux.json"));
  if (dump_states) {
    write_states_binary(manifest.path("_states.bin"), spec.eigenvectors);
    manifest.wrote(manifest.path("_states.bin"));
  }
  if (dump_current) {
    const ArrowField J = current_field(spec.eigenvectors.col(0), A);
    write_text_file(manifest.path("_current.csv"), current_csv(J));
    manifest.wrote(manifest.path("_current.csv"));
  }

  std::printf("sites %d  lambda_min %.12g  lambda_max %.12g  residual %.3e\n",
              box.site_count(), spec.eigenvalues[0],
              spec.eigenvalues[spec.eigenvalues.size() - 1], spec.max_residual);
  return kExitOk;
}

int cmd_verify(const std::vector<std::string>& suites, SuiteOptions opts,
               ManifestWriter& manifest, bool dry_run) {
  manifest.config = {{"suites", suites},
                     {"trials", opts.trials},
                     {"L_list", opts.L_list},
                     {"b", opts.b},
                     {"E_star", opts.E_star},
                     {"eps", opts.eps},
                     {"seed", opts.master_seed},
                     {"inject_bug", opts.inject_bug}};
  if (dry_run) {
    std::printf("would run %zu suites x %d trials\n", suites.size(), opts.trials);
    return kExitOk;
  }

  std::vector<SuiteResult> results;
  for (const std::string& name : suites) results.push_back(run_suite(name, opts));
  std::fputs(suite_report(results).c_str(), stdout);

  json jr = json::array();
  bool all_pass = true;
  for (const SuiteResult& r : results) {
    all_pass = all_pass && r.pass;
    jr.push_back({{"suite", r.name},
                  {"pass", r.pass},
                  {"worst_error", r.worst_error},
                  {"tolerance", r.tolerance},
                  {"checks", r.checks},
                  {"skipped", r.skipped},
                  {"failing_trial", r.failing_trial},
                  {"detail", r.detail}});
  }
  write_text_file(manifest.path("_verify.json"), jr.dump(2) + "\n");
  manifest.wrote(manifest.path("_verify.json"));
  return all_pass ? kExitOk : kExitVerification;
}

int cmd_wegner(const EnsembleConfig& config, ManifestWriter& manifest,
               bool dry_run) {
  manifest.config = ensemble_config_json(config);
  if (dry_run) {
    validate_window_config(config);
    std::printf("would run %d samples per box over %zu windows\n",
                config.samples,
                config.E_grid.size() * config.eta_grid.size());
    return kExitOk;
  }
  const WegnerTable table = wegner_experiment(config);
  const WegnerFit fit = fit_wegner_constant(table);

  write_text_file(manifest.path("_wegner.csv"), wegner_csv(table));
  manifest.wrote(manifest.path("_wegner.csv"));

  std::fputs("L,E,eta,mean_count,std_error\n", stdout);
  for (const WegnerRow& r : table.rows)
    std::printf("%d,%g,%g,%.6g,%.3g\n", r.L, r.E, r.eta, r.mean_count,
                r.std_error);
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (std::size_t j = 0; j < table.rows.size(); ++j) {
      const WegnerRow& a = table.rows[i];
      const WegnerRow& bb = table.rows[j];
      if (a.L == bb.L && a.E == bb.E && std::abs(bb.eta - 2.0 * a.eta) < 1e-12 &&
          a.mean_count > 0.0)
        std::printf("doubling L=%d E=%g eta %g->%g ratio %.3f\n", a.L, a.E,
                    a.eta, bb.eta, bb.mean_count / a.mean_count);
    }
  std::printf("C_least_squares %.6g  C_envelope %.6g  min_slack %.3g\n",
              fit.C_least_squares, fit.C_envelope, fit.min_slack);

  json jf = {{"C_least_squares", fit.C_least_squares},
             {"C_envelope", fit.C_envelope},
             {"min_slack", fit.min_slack}};
  write_text_file(manifest.path("_wegner_fit.json"), jf.dump(2) + "\n");
  manifest.wrote(manifest.path("_wegner_fit.json"));
  return kExitOk;
}

int cmd_ids(const EnsembleConfig& config, ManifestWriter& manifest,
            bool dry_run) {
  manifest.config = ensemble_config_json(config);
  if (dry_run) {
    std::printf("would estimate the counting fraction on %zu energies\n",
                config.E_grid.size());
    return kExitOk;
  }
  const IDSCurve curve = ids_estimate(config);
  write_text_file(manifest.path("_ids.csv"), ids_csv(curve));
  manifest.wrote(manifest.path("_ids.csv"));

  const auto rows = lifshitz_diagnostic(curve, config.b);
  write_text_file(manifest.path("_lifshitz.csv"), lifshitz_csv(rows));
  manifest.wrote(manifest.path("_lifshitz.csv"));

  bool monotone = true;
  for (std::size_t i = 1; i < curve.k_hi.size(); ++i)
    monotone = monotone && curve.k_hi[i] >= curve.k_hi[i - 1];
  std::printf("L=%d samples=%ld monotone=%s\n", curve.L_hi, curve.samples,
              monotone ? "yes" : "no");
  for (std::size_t i = 0; i < curve.E.size(); ++i)
    std::printf("E=%g k_hat=%.6g%s\n", curve.E[i], curve.k_hi[i],
                curve.drift.empty()
                    ? ""
                    : ("  drift=" + format_double(curve.drift[i])).c_str());
  return kExitOk;
}

int cmd_localize(const EnsembleConfig& config, double window, int lowest,
                 bool clean, ManifestWriter& manifest, bool dry_run) {
  manifest.config = ensemble_config_json(config);
  manifest.config["window"] = window;
  manifest.config["lowest"] = lowest;
  manifest.config["clean"] = clean;
  if (dry_run) {
    std::printf("would analyze the lowest %d eigenpairs per sample\n", lowest);
    return kExitOk;
  }
  const auto rows = localization_diagnostics(config, window, lowest, clean);
  write_text_file(manifest.path("_localization.csv"), localization_csv(rows));
  manifest.wrote(manifest.path("_localization.csv"));

  for (const int L : config.L_list) {
    double ipr_sum = 0.0;
    long n = 0, good_fits = 0;
    for (const LocalizationRow& r : rows) {
      if (r.L != L) continue;
      ipr_sum += r.ipr;
      ++n;
      if (r.fit_ok && r.fit_r2 > 0.9) ++good_fits;
    }
    if (n > 0)
      std::printf("L=%d rows=%ld mean_ipr=%.6g fits_r2>0.9 %ld/%ld\n", L, n,
                  ipr_sum / n, good_fits, n);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-flux lattice operator laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = default_out_dir();
  std::string config_file;
  bool dry_run = false;
  app.add_option("--out-dir", out_dir, "directory for output files");
  app.add_option("--config", config_file, "JSON file with option defaults");
  app.add_flag("--dry-run", dry_run, "print the plan, write nothing");

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "diagonalize one disorder sample");
  int sp_L = 4, sp_variant = 2;
  double sp_b = kPi / 4.0;
  std::string sp_mode = "symmetric", sp_flux_file, sp_prefix = "spectrum";
  std::uint64_t sp_seed = 1;
  std::int64_t sp_sample = 0;
  bool sp_zero = false, sp_states = false, sp_current = false;
  auto* sp_L_o = sp->add_option("--L", sp_L, "box half width");
  auto* sp_b_o = sp->add_option("--b", sp_b, "density band parameter");
  auto* sp_mode_o = sp->add_option("--mode", sp_mode, "symmetric|single_arc");
  auto* sp_seed_o = sp->add_option("--seed", sp_seed, "master seed");
  auto* sp_sample_o = sp->add_option("--sample-index", sp_sample, "sample index");
  auto* sp_variant_o = sp->add_option("--variant", sp_variant, "gauge variant 1..4");
  sp->add_option("--flux-file", sp_flux_file, "flux field JSON instead of sampling");
  sp->add_flag("--zero-flux", sp_zero, "use the flat field");
  sp->add_flag("--dump-states", sp_states, "write all eigenvectors (binary)");
  sp->add_flag("--dump-current", sp_current, "write the ground state current");
  sp->add_option("--prefix", sp_prefix, "output file prefix");

  // verify
  auto* vf = app.add_subcommand("verify", "run randomized identity suites");
  std::vector<std::string> vf_suites = suite_names();
  SuiteOptions vf_opts;
  std::string vf_prefix = "verify";
  auto* vf_suites_o = vf->add_option("--suite", vf_suites, "suite names (default: all)");
  auto* vf_trials_o = vf->add_option("--trials", vf_opts.trials, "instances per suite");
  auto* vf_L_o = vf->add_option("--L", vf_opts.L_list, "box half widths to cycle");
  auto* vf_b_o = vf->add_option("--b", vf_opts.b, "density band parameter");
  auto* vf_estar_o = vf->add_option("--E-star", vf_opts.E_star, "energy cap");
  auto* vf_eps_o = vf->add_option("--eps", vf_opts.eps, "small-neighbor threshold");
  auto* vf_seed_o = vf->add_option("--seed", vf_opts.master_seed, "master seed");
  vf->add_flag("--inject-bug", vf_opts.inject_bug, "negative control")->group("");
  vf->add_option("--prefix", vf_prefix, "output file prefix");

  // shared ensemble options builder
  const auto add_ensemble_options = [](CLI::App* cmd, EnsembleConfig& c,
                                       std::string& mode_name) {
    struct Opts {
      CLI::Option *L, *E, *eta, *samples, *b, *mode, *estar, *seed, *workers,
          *variant;
    } o{};
    o.L = cmd->add_option("--L", c.L_list, "box half widths");
    o.E = cmd->add_option("--E", c.E_grid, "window centers / energy grid");
    o.eta = cmd->add_option("--eta", c.eta_grid, "window widths");
    o.samples = cmd->add_option("--samples", c.samples, "disorder samples");
    o.b = cmd->add_option("--b", c.b, "density band parameter");
    o.mode = cmd->add_option("--mode", mode_name, "symmetric|single_arc");
    o.estar = cmd->add_option("--E-star", c.E_star, "energy cap");
    o.seed = cmd->add_option("--seed", c.master_seed, "master seed");
    o.workers = cmd->add_option("--workers", c.workers, "worker threads");
    o.variant = cmd->add_option("--variant", c.gauge_variant, "gauge variant");
    return o;
  };

  auto* wg = app.add_subcommand("wegner", "window counts vs eta and L");
  EnsembleConfig wg_cfg;
  wg_cfg.L_list = {4, 6};
  std::string wg_mode = "symmetric", wg_prefix = "run";
  const auto wg_o = add_ensemble_options(wg, wg_cfg, wg_mode);
  wg->add_option("--prefix", wg_prefix, "output file prefix");

  auto* id = app.add_subcommand("ids", "integrated counting fraction");
  EnsembleConfig id_cfg;
  id_cfg.L_list = {8, 10};
  id_cfg.E_grid.clear();
  std::string id_mode = "symmetric", id_prefix = "run";
  double id_emin = 0.0, id_emax = 8.0, id_estep = 0.25;
  const auto id_o = add_ensemble_options(id, id_cfg, id_mode);
  id->add_option("--E-min", id_emin, "grid start");
  id->add_option("--E-max", id_emax, "grid end");
  id->add_option("--E-step", id_estep, "grid step");
  id->add_option("--prefix", id_prefix, "output file prefix");

  auto* lc = app.add_subcommand("localize", "low eigenpair spread diagnostics");
  EnsembleConfig lc_cfg;
  lc_cfg.L_list = {6, 10};
  lc_cfg.b = 1.4;
  std::string lc_mode = "symmetric", lc_prefix = "run";
  double lc_window = 0.15;
  int lc_lowest = 5;
  bool lc_clean = false;
  const auto lc_o = add_ensemble_options(lc, lc_cfg, lc_mode);
  lc->add_option("--window", lc_window, "energy window above the edge");
  lc->add_option("--lowest", lc_lowest, "eigenpairs per sample");
  lc->add_flag("--clean", lc_clean, "zero flux comparison run");
  lc->add_option("--prefix", lc_prefix, "output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    json cfg = json::object();
    if (!config_file.empty()) cfg = json::parse(read_text_file(config_file));

    std::filesystem::create_directories(out_dir);

    if (*sp) {
      merge_config(cfg, "L", sp_L_o, sp_L);
      merge_config(cfg, "b", sp_b_o, sp_b);
      merge_config(cfg, "mode", sp_mode_o, sp_mode);
      merge_config(cfg, "seed", sp_seed_o, sp_seed);
      merge_config(cfg, "sample_index", sp_sample_o, sp_sample);
      merge_config(cfg, "gauge_variant", sp_variant_o, sp_variant);
      ManifestWriter m{out_dir, sp_prefix, "spectrum", {}, {}};
      const int rc = cmd_spectrum(sp_L, sp_b, sp_mode, sp_seed, sp_sample,
                                  sp_variant, sp_flux_file, sp_zero, sp_states,
                                  sp_current, m, dry_run);
      if (!dry_run) m.finish();
      return rc;
    }
    if (*vf) {
      merge_config(cfg, "suites", vf_suites_o, vf_suites);
      merge_config(cfg, "trials", vf_trials_o, vf_opts.trials);
      merge_config(cfg, "L_list", vf_L_o, vf_opts.L_list);
      merge_config(cfg, "b", vf_b_o, vf_opts.b);
      merge_config(cfg, "E_star", vf_estar_o, vf_opts.E_star);
      merge_config(cfg, "eps", vf_eps_o, vf_opts.eps);
      merge_config(cfg, "seed", vf_seed_o, vf_opts.master_seed);
      ManifestWriter m{out_dir, vf_prefix, "verify", {}, {}};
      const int rc = cmd_verify(vf_suites, vf_opts, m, dry_run);
      if (!dry_run) m.finish();
      return rc;
    }

    const auto run_ensemble = [&](CLI::App* cmd, EnsembleConfig& c,
                                  std::string& mode_name, const auto& opts) {
      merge_config(cfg, "L_list", opts.L, c.L_list);
      merge_config(cfg, "E_grid", opts.E, c.E_grid);
      merge_config(cfg, "eta_grid", opts.eta, c.eta_grid);
      merge_config(cfg, "samples", opts.samples, c.samples);
      merge_config(cfg, "b", opts.b, c.b);
      merge_config(cfg, "mode", opts.mode, mode_name);
      merge_config(cfg, "E_star", opts.estar, c.E_star);
      merge_config(cfg, "seed", opts.seed, c.master_seed);
      merge_config(cfg, "workers", opts.workers, c.workers);
      merge_config(cfg, "gauge_variant", opts.variant, c.gauge_variant);
      c.mode = parse_mode(mode_name);
      (void)cmd;
    };

    if (*wg) {
      run_ensemble(wg, wg_cfg, wg_mode, wg_o);
      ManifestWriter m{out_dir, wg_prefix, "wegner", {}, {}};
      const int rc = cmd_wegner(wg_cfg, m, dry_run);
      if (!dry_run) m.finish();
      return rc;
    }
    if (*id) {
      run_ensemble(id, id_cfg, id_mode, id_o);
      if (id_cfg.E_grid.empty())
        for (double e = id_emin; e <= id_emax + 1e-12; e += id_estep)
          id_cfg.E_grid.push_back(e);
      ManifestWriter m{out_dir, id_prefix, "ids", {}, {}};
      const int rc = cmd_ids(id_cfg, m, dry_run);
      if (!dry_run) m.finish();
      return rc;
    }
    if (*lc) {
      run_ensemble(lc, lc_cfg, lc_mode, lc_o);
      ManifestWriter m{out_dir, lc_prefix, "localize", {}, {}};
      const int rc = cmd_localize(lc_cfg, lc_window, lc_lowest, lc_clean, m,
                                  dry_run);
      if (!dry_run) m.finish();
      return rc;
    }
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitOk;
}
