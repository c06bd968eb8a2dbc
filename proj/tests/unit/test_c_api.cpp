#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "spemb/spemb.h"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kConfig = R"(
manifold: circle
symbol: {type: plateau}
distributions:
  - {id: delta, name: delta}
smooth:
  - {id: cos1, name: trig_poly, terms: [{k: 1}]}
grid: {hi: 0.1, lo: 1.0e-5, count: 16}
)";

}  // namespace

TEST_SUITE("c_api") {

TEST_CASE("status names and version") {
  CHECK(std::string(spemb_version()) == "1.0.0");
  CHECK(std::string(spemb_status_name(SPEMB_OK)) == "ok");
  CHECK(std::string(spemb_status_name(SPEMB_ERR_CONFIG)) == "config");
  CHECK(std::string(spemb_status_name(SPEMB_ERR_ARGUMENT)) == "argument");
  CHECK(std::string(spemb_status_name(SPEMB_ERR_DOMAIN)) == "domain");
}

TEST_CASE("manifold handles") {
  spemb_manifold* m = nullptr;
  REQUIRE(spemb_manifold_create("circle", &m) == SPEMB_OK);
  CHECK(std::string(spemb_last_error()).empty());
  int dim = 0;
  CHECK(spemb_manifold_dim(m, &dim) == SPEMB_OK);
  CHECK(dim == 1);
  double ev = 0.0;
  CHECK(spemb_manifold_eigenvalue(m, 3, &ev) == SPEMB_OK);
  CHECK(ev == 4.0);
  size_t below = 0;
  CHECK(spemb_manifold_modes_below(m, 10.0, &below) == SPEMB_OK);
  CHECK(below == 7);
  int64_t count = 0;
  CHECK(spemb_weyl_count(m, 1.0e4, &count) == SPEMB_OK);
  CHECK(count == oracle::count_circle(1.0e4));
  double lead = 0.0;
  CHECK(spemb_weyl_asymptotic(m, 1.0e4, &lead) == SPEMB_OK);
  CHECK(lead == doctest::Approx(200.0));
  spemb_manifold_destroy(m);

  for (const char* name : {"torus2", "sphere-zonal"}) {
    spemb_manifold* h = nullptr;
    CHECK(spemb_manifold_create(name, &h) == SPEMB_OK);
    CHECK(spemb_manifold_dim(h, &dim) == SPEMB_OK);
    CHECK(dim == 2);
    spemb_manifold_destroy(h);
  }
  spemb_manifold* bad = nullptr;
  CHECK(spemb_manifold_create("klein", &bad) == SPEMB_ERR_CONFIG);
  CHECK(bad == nullptr);
  CHECK(!std::string(spemb_last_error()).empty());
  CHECK(spemb_manifold_create(nullptr, &bad) == SPEMB_ERR_ARGUMENT);
  CHECK(spemb_manifold_dim(nullptr, &dim) == SPEMB_ERR_ARGUMENT);
  spemb_manifold_destroy(nullptr);
}

TEST_CASE("symbol handles") {
  spemb_symbol* heat = nullptr;
  REQUIRE(spemb_symbol_heat(&heat) == SPEMB_OK);
  double v = 0.0;
  CHECK(spemb_symbol_evaluate(heat, 2.0, &v) == SPEMB_OK);
  CHECK(v == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(spemb_symbol_derivative(heat, 3, 2.0, &v) == SPEMB_OK);
  CHECK(v == doctest::Approx(-std::exp(-2.0)).epsilon(1e-14));
  CHECK(spemb_symbol_evaluate(heat, -1.0, &v) == SPEMB_ERR_DOMAIN);
  CHECK(spemb_symbol_derivative(heat, -1, 1.0, &v) != SPEMB_OK);

  spemb_symbol* plateau = nullptr;
  REQUIRE(spemb_symbol_plateau(1.0, 1, 9.0, &plateau) == SPEMB_OK);
  CHECK(spemb_symbol_evaluate(plateau, 0.5, &v) == SPEMB_OK);
  CHECK(v == 1.0);
  CHECK(spemb_symbol_evaluate(plateau, 50.0, &v) == SPEMB_OK);
  CHECK(v == 0.0);
  spemb_symbol* bad = nullptr;
  CHECK(spemb_symbol_plateau(-1.0, 1, 9.0, &bad) != SPEMB_OK);
  CHECK(bad == nullptr);

  spemb_symbol* taylor = nullptr;
  REQUIRE(spemb_symbol_taylor(2, &taylor) == SPEMB_OK);
  CHECK(spemb_symbol_evaluate(taylor, 1.0, &v) == SPEMB_OK);
  CHECK(v == doctest::Approx(2.0 * std::exp(-1.0)));
  spemb_symbol* zero = nullptr;
  REQUIRE(spemb_symbol_zero(&zero) == SPEMB_OK);
  CHECK(spemb_symbol_evaluate(zero, 0.0, &v) == SPEMB_OK);
  CHECK(v == 0.0);
  for (auto* s : {heat, plateau, taylor, zero}) spemb_symbol_destroy(s);
}

TEST_CASE("coefficients through the C boundary") {
  spemb_manifold* m = nullptr;
  spemb_symbol* heat = nullptr;
  REQUIRE(spemb_manifold_create("circle", &m) == SPEMB_OK);
  REQUIRE(spemb_symbol_heat(&heat) == SPEMB_OK);
  spemb_coeffs* delta = nullptr;
  REQUIRE(spemb_catalog(m, R"({"name": "delta", "x0": 0})", 41, &delta) == SPEMB_OK);
  size_t size = 0;
  CHECK(spemb_coeffs_size(delta, &size) == SPEMB_OK);
  CHECK(size == 41);
  double norm = 0.0;
  CHECK(spemb_sobolev_norm(delta, -1.0, &norm) == SPEMB_OK);
  const double expect = oracle::circle_delta_sobolev_sq([](double) { return 1.0; }, 0.0, -1.0, 20);
  CHECK(norm * norm == doctest::Approx(expect).epsilon(1e-13));

  spemb_coeffs* smoothed = nullptr;
  REQUIRE(spemb_apply_symbol(heat, 0.01, delta, &smoothed) == SPEMB_OK);
  CHECK(spemb_sobolev_norm(smoothed, 0.0, &norm) == SPEMB_OK);
  const double expect0 = oracle::circle_delta_sobolev_sq([](double x) { return std::exp(-x); }, 0.01, 0.0, 20);
  CHECK(norm * norm == doctest::Approx(expect0).epsilon(1e-13));
  double re = 0.0, im = 0.0;
  CHECK(spemb_coeffs_get(delta, 0, &re, &im) == SPEMB_OK);
  CHECK(re == doctest::Approx(1.0 / std::sqrt(2.0 * oracle::kPi)));
  CHECK(im == 0.0);
  CHECK(spemb_coeffs_get(delta, 41, &re, &im) == SPEMB_ERR_ARGUMENT);
  CHECK(spemb_apply_symbol(heat, -1.0, delta, &smoothed) != SPEMB_OK);

  spemb_coeffs* bad = nullptr;
  CHECK(spemb_catalog(m, R"({"name": "unicorn"})", 41, &bad) == SPEMB_ERR_CONFIG);
  CHECK(spemb_catalog(m, "{not json", 41, &bad) == SPEMB_ERR_CONFIG);
  CHECK(bad == nullptr);
  spemb_coeffs_destroy(smoothed);
  spemb_coeffs_destroy(delta);
  spemb_symbol_destroy(heat);
  spemb_manifold_destroy(m);
}

TEST_CASE("configs and runs") {
  spemb_config* cfg = nullptr;
  REQUIRE(spemb_config_parse(kConfig, 0, &cfg) == SPEMB_OK);
  char hash[17];
  CHECK(spemb_config_hash(cfg, hash, sizeof hash) == SPEMB_OK);
  CHECK(std::strlen(hash) == 16);
  char small[8];
  CHECK(spemb_config_hash(cfg, small, sizeof small) == SPEMB_ERR_ARGUMENT);

  const fs::path root = fs::temp_directory_path() / "spemb_c_api";
  fs::remove_all(root);
  const std::string out = (root / "run").string();
  CHECK(spemb_config_set(cfg, "output", out.c_str()) == SPEMB_OK);
  char same[17];
  spemb_config_hash(cfg, same, sizeof same);
  CHECK(std::string(hash) == same);
  CHECK(spemb_config_set(cfg, "seed", "9") == SPEMB_OK);
  spemb_config_hash(cfg, same, sizeof same);
  CHECK(std::string(hash) != same);
  CHECK(spemb_config_set(cfg, "seed", "nine") == SPEMB_ERR_CONFIG);
  CHECK(spemb_config_set(cfg, "colour", "red") == SPEMB_ERR_CONFIG);

  int code = -1;
  CHECK(spemb_run(cfg, "embed", nullptr, nullptr, &code) == SPEMB_OK);
  CHECK(code == 0);
  CHECK(fs::exists(fs::path(out) / "rates_delta.csv"));
  CHECK(spemb_run(cfg, "verify", "isometry", nullptr, &code) == SPEMB_OK);
  CHECK(code == 0);
  CHECK(spemb_run(cfg, "verify", nullptr, nullptr, &code) == SPEMB_ERR_CONFIG);
  CHECK(spemb_run(cfg, "embed", nullptr, "cond3", &code) == SPEMB_ERR_CONFIG);
  CHECK(spemb_run(cfg, "dance", nullptr, nullptr, &code) == SPEMB_ERR_CONFIG);
  CHECK(spemb_run(nullptr, "embed", nullptr, nullptr, &code) == SPEMB_ERR_ARGUMENT);
  CHECK(spemb_report(root.string().c_str(), &code) == SPEMB_OK);
  CHECK(code == 0);
  CHECK(fs::exists(root / "report.md"));
  const std::string report = slurp(root / "report.md");
  CHECK(spemb_report(root.string().c_str(), &code) == SPEMB_OK);
  CHECK(slurp(root / "report.md") == report);
  const std::string empty = (root / "empty").string();
  fs::create_directories(empty);
  CHECK(spemb_report(empty.c_str(), &code) == SPEMB_ERR_CONFIG);
  spemb_config_destroy(cfg);

  spemb_config* bad = nullptr;
  CHECK(spemb_config_parse("manifold: circle\nfoo: 1\n", 0, &bad) == SPEMB_ERR_CONFIG);
  CHECK(std::string(spemb_last_error()).find("foo") != std::string::npos);
  CHECK(spemb_config_parse(R"({"manifold": "circle"})", 1, &bad) == SPEMB_OK);
  spemb_config_destroy(bad);
  CHECK(spemb_config_load("/nonexistent.yaml", &bad) == SPEMB_ERR_CONFIG);
  spemb_config* loaded = nullptr;
  CHECK(spemb_config_load(SPEMB_TEST_CONFIG_DIR "/circle_plateau.yaml", &loaded) == SPEMB_OK);
  spemb_config_destroy(loaded);
}

}  // TEST_SUITE
