#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fluxlab/torus.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(FLUXLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("fluxlab_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long line_count(const std::string& text) {
  return std::count(text.begin(), text.end(), '\n');
}

}  // namespace

TEST_CASE("spectrum run produces eigenvalues, fluxes, and a manifest") {
  const fs::path dir = fresh_dir("spectrum");
  const int code = run_cli("spectrum --L 2 --seed 5 --out-dir " + dir.string());
  CHECK(code == 0);

  const std::string csv = slurp(dir / "spectrum_eigenvalues.csv");
  CHECK(line_count(csv) == 1 + 25);  // header plus one row per site

  const nlohmann::json flux =
      nlohmann::json::parse(slurp(dir / "spectrum_flux.json"));
  const nlohmann::json manifest =
      nlohmann::json::parse(slurp(dir / "spectrum_manifest.json"));
  CHECK(manifest.at("command").get<std::string>() == "spectrum");
  CHECK(manifest.contains("config_hash"));
  CHECK(manifest.at("outputs").is_array());
  CHECK(manifest.at("outputs").size() >= 2);
  for (const auto& name : manifest.at("outputs"))
    CHECK(fs::exists(dir / name.get<std::string>()));
}

TEST_CASE("dry run plans without writing") {
  const fs::path dir = fresh_dir("dry");
  const int code =
      run_cli("--dry-run spectrum --L 2 --seed 5 --out-dir " + dir.string());
  CHECK(code == 0);
  CHECK(fs::is_empty(dir));
}

TEST_CASE("verification subcommand: clean pass and negative control") {
  const fs::path dir = fresh_dir("verify");
  const int code = run_cli("verify --suite gauge-invariance --trials 3 --L 2" +
                           std::string(" --out-dir ") + dir.string());
  CHECK(code == 0);
  const nlohmann::json report =
      nlohmann::json::parse(slurp(dir / "verify_verify.json"));
  REQUIRE(report.is_array());
  bool found = false;
  for (const auto& suite : report) {
    if (suite.at("suite").get<std::string>() == "gauge-invariance") {
      found = true;
      CHECK(suite.at("pass").get<bool>());
      CHECK(suite.at("worst_error").get<double>() <
            suite.at("tolerance").get<double>());
    }
  }
  CHECK(found);

  const fs::path dir2 = fresh_dir("verify_bug");
  const int bad =
      run_cli("verify --suite gauge-invariance --trials 3 --L 2 --inject-bug" +
              std::string(" --out-dir ") + dir2.string());
  CHECK(bad == 3);
}

TEST_CASE("window outside both admissible regimes is a usage error") {
  const fs::path dir = fresh_dir("badwindow");
  const int code = run_cli(
      "wegner --L 2 --E 0.98 --eta 0.1 --samples 2 --out-dir " + dir.string());
  CHECK(code == 2);
}

TEST_CASE("config file fills unset options, explicit flags win") {
  const fs::path dir = fresh_dir("config");
  const fs::path cfg = dir / "defaults.json";
  {
    std::ofstream out(cfg);
    out << R"({"L": 3, "seed": 5})";
  }

  // File alone: a box of half width 3 has 49 sites.
  int code = run_cli("--config " + cfg.string() + " spectrum --out-dir " +
                     dir.string() + " --prefix file");
  CHECK(code == 0);
  CHECK(line_count(slurp(dir / "file_eigenvalues.csv")) == 1 + 49);

  // Command line overrides the file: half width 2, 25 sites.
  code = run_cli("--config " + cfg.string() + " spectrum --L 2 --out-dir " +
                 dir.string() + " --prefix flag");
  CHECK(code == 0);
  CHECK(line_count(slurp(dir / "flag_eigenvalues.csv")) == 1 + 25);
}

TEST_CASE("worker count never changes the written tables") {
  const fs::path d1 = fresh_dir("wegner1");
  const fs::path d7 = fresh_dir("wegner7");
  const std::string common =
      "wegner --L 2 --E 0.5 --eta 0.1 --eta 0.2 --samples 6 --seed 11 ";
  CHECK(run_cli(common + "--workers 1 --out-dir " + d1.string()) == 0);
  CHECK(run_cli(common + "--workers 7 --out-dir " + d7.string()) == 0);
  CHECK(slurp(d1 / "run_wegner.csv") == slurp(d7 / "run_wegner.csv"));
  const std::string fit1 = slurp(d1 / "run_wegner_fit.json");
  CHECK(fit1 == slurp(d7 / "run_wegner_fit.json"));
  CHECK_FALSE(nlohmann::json::parse(fit1).empty());
}
