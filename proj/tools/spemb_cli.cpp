#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "spemb/spemb.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitOther = 3;

int fail(spemb_status st) {
  std::cerr << "error (" << spemb_status_name(st) << "): " << spemb_last_error() << "\n";
  return st == SPEMB_ERR_CONFIG || st == SPEMB_ERR_ARGUMENT ? kExitConfig : kExitOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral embeddings of distributions into generalized function algebras"};
  app.require_subcommand(1);
  app.set_version_flag("--version", spemb_version());

  std::string config;
  std::string out;
  std::string seed;
  std::string grid;
  std::string battery;
  std::string expect_fail;
  unsigned jobs = 1;
  app.add_option("--config", config, "Experiment config (YAML, or JSON by extension)");
  app.add_option("--out", out, "Output directory (overrides the config)");
  app.add_option("--seed", seed, "Seed for random catalog entries without their own seed");
  app.add_option("--grid", grid, "Epsilon grid as hi:lo:count");
  app.add_option("--battery", battery, "Seminorm battery, e.g. H0-8,C0-4");
  app.add_option("--expect-fail", expect_fail, "Condition group (or property) expected to fail");
  app.add_option("--jobs", jobs, "Worker threads; 0 uses every core")->check(CLI::NonNegativeNumber);

  auto* spectrum = app.add_subcommand("spectrum", "Weyl counting table")->fallthrough();
  auto* embed = app.add_subcommand("embed", "Embed the catalog and fit seminorm rates")->fallthrough();
  auto* verify = app.add_subcommand("verify", "Run one property suite")->fallthrough();
  std::string property;
  verify->add_option("property", property, "special|order|mult|isometry|regularity|support|singsupp|staged")
      ->required()
      ->check(CLI::IsMember({"special", "order", "mult", "isometry", "regularity", "support", "singsupp", "staged"}));
  auto* report = app.add_subcommand("report", "Collate manifests and verdicts of a run directory")->fallthrough();
  std::string report_dir;
  report->add_option("dir", report_dir, "Run directory (defaults to --out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  spemb_set_jobs(jobs);

  if (report->parsed()) {
    const std::string dir = report_dir.empty() ? out : report_dir;
    if (dir.empty()) {
      std::cerr << "error (config): report needs a directory\n";
      return kExitConfig;
    }
    int code = 0;
    const spemb_status st = spemb_report(dir.c_str(), &code);
    return st == SPEMB_OK ? code : fail(st);
  }

  if (config.empty()) {
    std::cerr << "error (config): --config is required\n";
    return kExitConfig;
  }
  spemb_config* cfg = nullptr;
  spemb_status st = spemb_config_load(config.c_str(), &cfg);
  if (st != SPEMB_OK) return fail(st);
  const std::pair<const char*, std::string*> overrides[] = {
      {"output", &out}, {"seed", &seed}, {"grid", &grid}, {"battery", &battery}};
  for (const auto& [key, value] : overrides) {
    if (value->empty()) continue;
    st = spemb_config_set(cfg, key, value->c_str());
    if (st != SPEMB_OK) {
      spemb_config_destroy(cfg);
      return fail(st);
    }
  }
  const char* verb = spectrum->parsed() ? "spectrum" : embed->parsed() ? "embed" : "verify";
  int code = 0;
  st = spemb_run(cfg, verb, property.c_str(), expect_fail.empty() ? nullptr : expect_fail.c_str(), &code);
  spemb_config_destroy(cfg);
  if (st != SPEMB_OK) return fail(st);
  if (code != 0) std::cerr << verb << (property.empty() ? "" : " " + property) << ": property failed\n";
  return code;
}
