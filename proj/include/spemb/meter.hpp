#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spemb/net.hpp"

namespace spemb {

inline constexpr double kNumericFloor = 1e-13;
inline constexpr double kOrderCap = 12.0;  // N_max

struct FitPolicy {
  std::size_t window = 12;
  std::size_t min_samples = 8;
  double floor = kNumericFloor;
  double n_max = kOrderCap;
  double preasymptotic_gap = 0.3;
  std::size_t terminal = 4;
};

enum class VerdictKind { order, negligible };

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  std::optional<double> r_squared;
  std::size_t window_lo = 0;  // grid indices, inclusive
  std::size_t window_hi = 0;
  std::size_t above_floor = 0;
  bool floor_hit = false;
  bool preasymptotic = false;
  double first_half_slope = 0.0;
  double second_half_slope = 0.0;
  std::optional<double> terminal_slope;
  VerdictKind verdict = VerdictKind::order;
  double n_max = kOrderCap;

  bool negligible() const noexcept { return verdict == VerdictKind::negligible; }
  // Fitted order, or n_max for negligible nets.
  double order() const noexcept { return negligible() ? n_max : slope; }
  std::string verdict_string() const;
};

// Floor relative to the coarsest (first) sample.
RateEstimate fit_order(std::span<const double> eps, std::span<const double> values, const FitPolicy& policy = {});
// Floor relative to a single reference magnitude.
RateEstimate fit_order(std::span<const double> eps, std::span<const double> values, const FitPolicy& policy,
                       double reference);
// Floor relative to a per-sample reference.
RateEstimate fit_order(std::span<const double> eps, std::span<const double> values, const FitPolicy& policy,
                       std::span<const double> references);

// True when the net is demonstrably not O(eps^q).
bool not_O(const RateEstimate& r, double q);

enum class NetClass { moderate, negligible, neither };
std::string to_string(NetClass c);

struct Classification {
  NetClass kind = NetClass::neither;
  std::map<std::string, RateEstimate> table;
};

Classification classify_net(const std::map<std::string, RateEstimate>& battery);

// Seminorm battery on spectral frames.
struct SeminormBattery {
  std::vector<int> sobolev_orders{0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> sup_orders{0, 1, 2, 3, 4};
  std::size_t grid_resolution = 0;

  static SeminormBattery defaults(const SpectralManifold& man);
  void validate(const SpectralManifold& man) const;
  std::vector<std::string> ids() const;
};

// id -> value, ids as in SeminormBattery::ids() ("H<j>", "C<a>").
std::map<std::string, double> evaluate_battery(const SpectralCoefficients& c, const SeminormBattery& battery);

// Per-seminorm value series over a net of frames.
std::map<std::string, std::vector<double>> battery_series(const std::vector<SpectralCoefficients>& frames,
                                                          const SeminormBattery& battery);

struct SharpValuation {
  double value = 0.0;
  RateEstimate estimate;
};

std::map<std::string, SharpValuation> sharp_distance(const CoefficientNet& a, const CoefficientNet& b,
                                                     const SeminormBattery& battery, const FitPolicy& policy = {});

struct SymbolSeminorm {
  int p = 0;
  int alpha = 0;
  std::string id() const { return "p" + std::to_string(p) + "a" + std::to_string(alpha); }
};

std::map<std::string, SharpValuation> sharp_distance(const SymbolNet& a, const SymbolNet& b, const EpsilonGrid& grid,
                                                     const std::vector<SymbolSeminorm>& seminorms,
                                                     const FitPolicy& policy = {});

// Valuation of a scalar net.
SharpValuation valuation(std::span<const double> eps, std::span<const double> values, const FitPolicy& policy = {});

struct GridPolicy {
  std::optional<double> hi;
  std::optional<double> lo;
  std::optional<std::size_t> count;
};

struct DesignedGrid {
  EpsilonGrid grid;
  std::vector<std::string> warnings;
};

DesignedGrid grid_designer(const GridPolicy& policy, const SpectralManifold& man,
                           const SymbolNet* net = nullptr, double mode_budget = 4e6);

// Rate table: seminorm, slope, r2, window_lo, window_hi, floor_hit, verdict
std::string rates_csv(const std::map<std::string, RateEstimate>& table, const std::string& quantity = "");
std::string rates_csv_header();

}  // namespace spemb
