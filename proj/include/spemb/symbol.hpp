#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spemb/jet.hpp"

namespace spemb {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  int samples = 2048;
};

// Transition F = 1 / (1 + exp(1/(1-s)^p - 1/s^p)), s = (x - t)/((end - 1) t).
struct TaperShape {
  int exponent = 2;
  double end_ratio = 10.0;
};

class SymbolImpl {
 public:
  virtual ~SymbolImpl() = default;
  virtual Jet jet(double x, int order) const = 0;
  virtual std::optional<double> plateau_radius() const { return std::nullopt; }
  // Beyond this point |F| stays below 1e-16 sup |F|.
  virtual double tail_radius() const = 0;
  // Regions where the symbol varies on scales finer than the log grid.
  virtual std::vector<Interval> features() const { return {}; }
  virtual std::string describe() const = 0;
};

class SchwartzSymbol {
 public:
  explicit SchwartzSymbol(std::shared_ptr<const SymbolImpl> impl);

  double evaluate(double x) const;
  double derivative(int order, double x) const;
  Jet jet(double x, int order) const;
  std::optional<double> plateau_radius() const { return impl_->plateau_radius(); }
  double tail_radius() const { return impl_->tail_radius(); }
  std::vector<Interval> features() const { return impl_->features(); }
  std::string describe() const { return impl_->describe(); }

  // Sampled bound B with |x^p F^(alpha)(x)| <= B.
  double decay_bound(int p, int alpha) const;

 private:
  std::shared_ptr<const SymbolImpl> impl_;
};

SchwartzSymbol plateau_symbol(double t, const TaperShape& shape = {});
SchwartzSymbol heat_symbol();
// e^{-x} sum_{j < order} x^j / j!; order 1 is the heat symbol.
SchwartzSymbol taylor_symbol(int order);
SchwartzSymbol zero_symbol();
SchwartzSymbol difference(const SchwartzSymbol& a, const SchwartzSymbol& b);
// x -> F(eps x), 0 < eps <= 1.
SchwartzSymbol scale(const SchwartzSymbol& f, double eps);

// sup over the sample grid of |x^p F^(alpha)(x)|; density multiplies the
// number of samples.
double symbol_seminorm(const SchwartzSymbol& f, int p, int alpha, int density = 1);

// x, F(x), F'(x)
std::string symbol_table_csv(const SchwartzSymbol& f, const std::vector<double>& xs);

enum class ScheduleKind { constant, log, exp_sqrt_log, power };

struct Schedule {
  ScheduleKind kind = ScheduleKind::log;
  double value = 1.0;  // constant radius or power exponent

  double t(double n) const;
  std::string describe() const;
};

class AdmissibleCore;

class SymbolSequence {
 public:
  explicit SymbolSequence(std::shared_ptr<const AdmissibleCore> core);

  const Schedule& schedule() const;
  double radius(std::uint64_t n) const;
  SchwartzSymbol member(std::uint64_t n) const;
  SchwartzSymbol limit() const;
  // F_n - F
  SchwartzSymbol tail(std::uint64_t n) const;

  // n * rho(F_n - F) maximized over the tested range, keyed "p<p>a<alpha>".
  const std::map<std::string, double>& rate_constants() const;
  // Largest measured m^2 rho(h_m) over the battery; bounded by the design constant.
  double increment_constant() const;
  double design_constant() const;
  // First n past which t_n > n^{-alpha}, keyed by alpha.
  const std::map<double, std::uint64_t>& schedule_thresholds() const;
  std::uint64_t tested_range() const;
  bool same_as(const SymbolSequence& other) const noexcept { return core_ == other.core_; }

 private:
  std::shared_ptr<const AdmissibleCore> core_;
};

SymbolSequence admissible_from_schedule(const Schedule& schedule, const TaperShape& shape = {});

// Smallest integer strictly greater than eps^{-l}.
std::uint64_t k_index(int l, double eps);

SchwartzSymbol staged_symbol(const SymbolSequence& seq, int l, double eps);

}  // namespace spemb
