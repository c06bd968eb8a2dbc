#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spemb/catalog.hpp"
#include "spemb/meter.hpp"

namespace spemb {

struct NamedRate {
  std::string seminorm;
  RateEstimate rate;
};

struct ConditionResult {
  std::string id;     // group:input[:detail]
  std::string group;  // cond1, cond2, ...
  std::string input;
  bool pass = false;
  std::string verdict;
  std::vector<NamedRate> rates;
  std::optional<double> metric;
  std::string detail;
};

struct VerdictReport {
  std::string property;
  std::string manifold;
  std::string symbol;
  std::vector<std::string> inputs;
  std::vector<ConditionResult> conditions;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, std::string>> summary;  // headline results, key order kept

  bool pass() const;
  std::vector<std::string> groups() const;
  bool group_pass(const std::string& group) const;
};

struct VerifyOptions {
  FitPolicy fit;
  std::optional<PerturbSchedule> perturb;
};

// Catalog coefficients at the cutoff the net needs over the grid.
SpectralCoefficients catalog_for_net(const SymbolNet& net, const ManifoldPtr& man, const DistributionSpec& spec,
                                     const EpsilonGrid& grid);
CoefficientNet embed_entry(const SymbolNet& net, const SpectralCoefficients& u, const EpsilonGrid& grid,
                           const VerifyOptions& opts);

std::map<std::string, RateEstimate> embed_rates(const CoefficientNet& net, const SeminormBattery& battery,
                                                const FitPolicy& policy);
// Rates of T_eps u - u; floor relative to the seminorms of u.
std::map<std::string, RateEstimate> defect_rates(const CoefficientNet& net, const SpectralCoefficients& u,
                                                 const SeminormBattery& battery, const FitPolicy& policy);

VerdictReport check_special_embedding(const SymbolNet& net, const ManifoldPtr& man,
                                      const std::vector<DistributionSpec>& distributions,
                                      const std::vector<DistributionSpec>& smooth, const SeminormBattery& battery,
                                      const EpsilonGrid& grid, const VerifyOptions& opts = {});

struct EmbeddingOrder {
  bool special = false;
  int k = 0;
  double min_slope = 0.0;
  std::map<std::string, std::map<std::string, RateEstimate>> tables;  // smooth id -> seminorm -> rate
  std::string describe() const { return special ? "special" : std::to_string(k); }
};

EmbeddingOrder classify_embedding_order(const SymbolNet& net, const ManifoldPtr& man,
                                        const std::vector<DistributionSpec>& smooth, const SeminormBattery& battery,
                                        const EpsilonGrid& grid, const VerifyOptions& opts = {});

struct MultiplicativityResult {
  std::map<std::string, RateEstimate> table;
  std::vector<double> max_abs_defect;  // per eps, largest coefficient of the defect
};

MultiplicativityResult multiplicativity_defect(const SymbolNet& net, const ManifoldPtr& man, const DistributionSpec& f,
                                               const DistributionSpec& g, const SeminormBattery& battery,
                                               const EpsilonGrid& grid, const VerifyOptions& opts = {});

VerdictReport check_isometry_invariance(const SymbolNet& net, const ManifoldPtr& man, const Isometry& iso,
                                        const std::vector<DistributionSpec>& distributions, const EpsilonGrid& grid);

enum class Regularity { smooth, non_smooth, indeterminate };
std::string to_string(Regularity r);

struct GInfinityResult {
  Regularity verdict = Regularity::indeterminate;
  std::vector<int> orders;
  std::vector<double> profile;  // N_j
  double trend_slope = 0.0;
  double range = 0.0;
  std::map<std::string, RateEstimate> rates;
  std::vector<std::string> notes;
};

GInfinityResult g_infinity_test(const CoefficientNet& net, const std::vector<int>& sobolev_orders,
                                const FitPolicy& policy = {});
// Floor relative to a per-sample reference series per "H<j>" id.
GInfinityResult g_infinity_test(const CoefficientNet& net, const std::vector<int>& sobolev_orders,
                                const FitPolicy& policy,
                                const std::map<std::string, std::vector<double>>& floor_reference);

struct SupportProbe {
  double distance = 0.0;
  RateEstimate rate;
  double pre_floor_slope = 0.0;
  bool pass = false;
};

std::vector<SupportProbe> support_localization(const SymbolNet& net, const ManifoldPtr& man, const DistributionSpec& u,
                                               const std::vector<double>& distances, const EpsilonGrid& grid,
                                               const VerifyOptions& opts = {});

struct SingularSupportResult {
  Regularity expected = Regularity::indeterminate;
  GInfinityResult regularity;
  bool pass = false;
};

SingularSupportResult singular_support_test(const SymbolNet& net, const ManifoldPtr& man, const DistributionSpec& u,
                                            const DistributionSpec& cutoff, const std::vector<int>& sobolev_orders,
                                            const EpsilonGrid& grid, const VerifyOptions& opts = {});

struct StagedLevelResult {
  int level = 0;
  std::map<std::string, SharpValuation> sharp;  // p<p>a<alpha>
  VerdictReport special;
};

std::vector<StagedLevelResult> check_staged(const SymbolSequence& seq, const std::vector<int>& levels,
                                            const ManifoldPtr& man, const std::vector<DistributionSpec>& distributions,
                                            const std::vector<DistributionSpec>& smooth, const SeminormBattery& battery,
                                            const EpsilonGrid& grid, const VerifyOptions& opts = {});

}  // namespace spemb
