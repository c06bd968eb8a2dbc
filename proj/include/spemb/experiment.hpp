#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spemb/verifier.hpp"

namespace spemb {

inline constexpr const char* kToolVersion = "1.0.0";

struct SymbolConfig {
  std::string type = "plateau";  // plateau | heat | taylor | zero | admissible
  double t = 1.0;
  int order = 2;  // taylor
  TaperShape shape;
  Schedule schedule;
  int level = 0;  // admissible: 0 is the limit symbol, l > 0 the staged net
};

struct IsometryConfig {
  std::string type = "identity";
  double angle = 0.0;
  Point shift{};
};

struct SingSuppCase {
  std::string target;
  DistributionSpec cutoff;
};

struct VerifyConfig {
  std::vector<IsometryConfig> isometries;    // empty: the manifold's group
  std::vector<std::string> support_targets;  // empty: every compactly supported distribution
  std::vector<double> support_distances{1.0, 2.0};
  std::vector<SingSuppCase> singsupp;
  std::string mult_f;  // empty: first smooth entry
  std::string mult_g;
  std::vector<int> staged_levels{1, 2};
  std::optional<std::string> expect_order;  // integer or "special"
};

struct SpectrumConfig {
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::size_t points = 41;
};

struct ExperimentConfig {
  std::string manifold = "circle";
  SymbolConfig symbol;
  std::vector<DistributionSpec> distributions;
  std::vector<DistributionSpec> smooth;
  std::vector<bool> explicit_seed;  // per distribution, then per smooth entry
  std::optional<SeminormBattery> battery;
  GridPolicy grid;
  std::uint64_t seed = 1;
  std::string output = "out";
  std::optional<PerturbSchedule> perturb;
  SpectrumConfig spectrum;
  VerifyConfig verify;
};

// YAML unless the file ends in .json. Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, bool json);

// Command-line overrides; empty fields leave the config as is.
struct Overrides {
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> grid;     // hi:lo:count
  std::optional<std::string> battery;  // e.g. H0-8,C0-4
};
void apply_overrides(ExperimentConfig& cfg, const Overrides& ov);

// One catalog entry from JSON text, e.g. {"name": "delta", "x0": 0}.
DistributionSpec parse_distribution_text(const std::string& json_text);

SeminormBattery parse_battery(const std::string& text);
GridPolicy parse_grid(const std::string& text);

// Canonical form with defaults filled in; its FNV-1a hash names the run.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

SymbolNet build_symbol_net(const SymbolConfig& cfg);

const std::vector<std::string>& verify_properties();

// Each returns the process exit code (0 pass, 1 property failure); errors throw.
int cmd_spectrum(const ExperimentConfig& cfg);
int cmd_embed(const ExperimentConfig& cfg);
int cmd_verify(const ExperimentConfig& cfg, const std::string& property,
               const std::optional<std::string>& expect_fail = std::nullopt);
int cmd_report(const std::string& dir);

// Exit code of a verdict under an optional expected failing condition group
// (or the property name for any failure).
int verdict_exit_code(const VerdictReport& rep, const std::optional<std::string>& expect_fail);

std::string verdict_json(const VerdictReport& rep, const std::optional<std::string>& expect_fail = std::nullopt);

}  // namespace spemb
