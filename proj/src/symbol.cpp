#include "spemb/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "spemb/error.hpp"
#include "spemb/util.hpp"

namespace spemb {

namespace {

constexpr double kExpCap = 700.0;
constexpr int kBatteryOrder = 6;

Jet zero_jet(int order) { return Jet(order, 0.0); }

// 1 / (1 + exp(1/(1-s)^p - 1/s^p)) on 0 < s < 1.
Jet taper_jet(const Jet& s, int p) {
  const int order = s.order();
  const double sv = s.value();
  if (sv <= 0.0) return Jet(order, 1.0);
  if (sv >= 1.0) return zero_jet(order);
  const double ev = 1.0 / std::pow(1.0 - sv, p) - 1.0 / std::pow(sv, p);
  if (ev < -kExpCap) return Jet(order, 1.0);
  if (ev > kExpCap) return zero_jet(order);
  const Jet one(order, 1.0);
  const Jet e = one / ipow(one - s, p) - one / ipow(s, p);
  // The exponential is only taken of nonpositive values so its jet cannot overflow.
  if (ev > 0.0) {
    const Jet w = exp(-e);
    return w / (one + w);
  }
  return one / (one + exp(e));
}

class PlateauImpl final : public SymbolImpl {
 public:
  PlateauImpl(double t, TaperShape shape) : t_(t), shape_(shape) {}

  Jet jet(double x, int order) const override {
    if (x <= t_) return Jet(order, 1.0);
    if (x >= shape_.end_ratio * t_) return zero_jet(order);
    const Jet s = (Jet::variable(order, x) - t_) / ((shape_.end_ratio - 1.0) * t_);
    return taper_jet(s, shape_.exponent);
  }
  std::optional<double> plateau_radius() const override { return t_; }
  double tail_radius() const override { return shape_.end_ratio * t_; }
  std::vector<Interval> features() const override { return {{t_, shape_.end_ratio * t_}}; }
  std::string describe() const override { return "plateau(t=" + format_double(t_) + ")"; }

 private:
  double t_;
  TaperShape shape_;
};

class TaylorImpl final : public SymbolImpl {
 public:
  explicit TaylorImpl(int order) : order_(order) {
    double lo = 0.0;
    double hi = 2000.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (value(mid) > 1e-16 ? lo : hi) = mid;
    }
    tail_ = hi;
  }

  Jet jet(double x, int order) const override {
    const Jet v = Jet::variable(order, x);
    Jet poly(order, 0.0);
    Jet term(order, 1.0);
    for (int j = 0; j < order_; ++j) {
      poly += term;
      term = term * v / static_cast<double>(j + 1);
    }
    return exp(-v) * poly;
  }
  double tail_radius() const override { return tail_; }
  std::vector<Interval> features() const override { return {{0.0, tail_}}; }
  std::string describe() const override {
    return order_ == 1 ? std::string("heat") : "taylor(k=" + std::to_string(order_) + ")";
  }

 private:
  double value(double x) const {
    double poly = 0.0;
    double term = 1.0;
    for (int j = 0; j < order_; ++j) {
      poly += term;
      term *= x / (j + 1);
    }
    return std::exp(-x) * poly;
  }

  int order_;
  double tail_ = 0.0;
};

class ZeroImpl final : public SymbolImpl {
 public:
  Jet jet(double, int order) const override { return zero_jet(order); }
  double tail_radius() const override { return 0.0; }
  std::string describe() const override { return "zero"; }
};

class DifferenceImpl final : public SymbolImpl {
 public:
  DifferenceImpl(SchwartzSymbol a, SchwartzSymbol b) : a_(std::move(a)), b_(std::move(b)) {}
  Jet jet(double x, int order) const override { return a_.jet(x, order) - b_.jet(x, order); }
  double tail_radius() const override { return std::max(a_.tail_radius(), b_.tail_radius()); }
  std::vector<Interval> features() const override {
    auto f = a_.features();
    for (const auto& i : b_.features()) f.push_back(i);
    return f;
  }
  std::string describe() const override { return a_.describe() + " - " + b_.describe(); }

 private:
  SchwartzSymbol a_;
  SchwartzSymbol b_;
};

class ScaledImpl final : public SymbolImpl {
 public:
  ScaledImpl(SchwartzSymbol f, double eps) : f_(std::move(f)), eps_(eps) {}
  Jet jet(double x, int order) const override {
    Jet j = f_.jet(eps_ * x, order);
    double e = 1.0;
    for (int k = 1; k <= j.order(); ++k) {
      e *= eps_;
      j.coeff(k) *= e;
    }
    return j;
  }
  std::optional<double> plateau_radius() const override {
    const auto t = f_.plateau_radius();
    if (!t) return std::nullopt;
    return *t / eps_;
  }
  double tail_radius() const override { return f_.tail_radius() / eps_; }
  std::vector<Interval> features() const override {
    auto f = f_.features();
    for (auto& i : f) {
      i.lo /= eps_;
      i.hi /= eps_;
    }
    return f;
  }
  std::string describe() const override { return f_.describe() + " at eps=" + format_double(eps_); }

 private:
  SchwartzSymbol f_;
  double eps_;
};

std::vector<double> sample_points(const SchwartzSymbol& f, int density) {
  std::vector<double> pts;
  pts.push_back(0.0);
  const double hi = std::max(1e6, 4.0 * f.tail_radius());
  const double lo = 1e-12;
  const int per_decade = 64 * density;
  const double decades = std::log10(hi / lo);
  const int n = static_cast<int>(std::ceil(decades * per_decade));
  for (int i = 0; i <= n; ++i) pts.push_back(lo * std::pow(10.0, decades * i / n));
  for (const auto& iv : f.features()) {
    const int m = iv.samples * density;
    for (int i = 0; i <= m; ++i) pts.push_back(iv.lo + (iv.hi - iv.lo) * i / m);
  }
  return pts;
}

double ipow_d(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

SchwartzSymbol::SchwartzSymbol(std::shared_ptr<const SymbolImpl> impl) : impl_(std::move(impl)) {
  if (!impl_) throw Error(ErrorCode::internal, "empty symbol");
}

double SchwartzSymbol::evaluate(double x) const { return jet(x, 0).value(); }

double SchwartzSymbol::derivative(int order, double x) const {
  if (order < 0 || order > Jet::kMaxOrder) throw Error(ErrorCode::domain, "derivative order out of range");
  return jet(x, order).derivative(order);
}

Jet SchwartzSymbol::jet(double x, int order) const {
  if (!(x >= 0.0)) throw Error(ErrorCode::domain, "symbols are defined on [0, inf)");
  return impl_->jet(x, order);
}

double SchwartzSymbol::decay_bound(int p, int alpha) const {
  return symbol_seminorm(*this, p, alpha, 2) * (1.0 + 1e-2) + 1e-300;
}

SchwartzSymbol plateau_symbol(double t, const TaperShape& shape) {
  if (!(t > 0.0)) throw Error(ErrorCode::domain, "plateau radius must be positive");
  if (shape.exponent < 1 || !(shape.end_ratio > 1.0)) throw Error(ErrorCode::config, "invalid taper shape");
  return SchwartzSymbol(std::make_shared<PlateauImpl>(t, shape));
}

SchwartzSymbol heat_symbol() { return taylor_symbol(1); }

SchwartzSymbol taylor_symbol(int order) {
  if (order < 1 || order > 12) throw Error(ErrorCode::config, "taylor symbol order must be in 1..12");
  return SchwartzSymbol(std::make_shared<TaylorImpl>(order));
}

SchwartzSymbol zero_symbol() { return SchwartzSymbol(std::make_shared<ZeroImpl>()); }

SchwartzSymbol difference(const SchwartzSymbol& a, const SchwartzSymbol& b) {
  return SchwartzSymbol(std::make_shared<DifferenceImpl>(a, b));
}

SchwartzSymbol scale(const SchwartzSymbol& f, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::domain, "scale parameter must lie in (0, 1]");
  return SchwartzSymbol(std::make_shared<ScaledImpl>(f, eps));
}

double symbol_seminorm(const SchwartzSymbol& f, int p, int alpha, int density) {
  if (p < 0 || alpha < 0 || alpha > Jet::kMaxOrder) throw Error(ErrorCode::domain, "seminorm order out of range");
  double best = 0.0;
  for (double x : sample_points(f, density)) {
    const double v = std::fabs(ipow_d(x, p) * f.jet(x, alpha).derivative(alpha));
    if (v > best) best = v;
  }
  return best;
}

std::string symbol_table_csv(const SchwartzSymbol& f, const std::vector<double>& xs) {
  std::ostringstream os;
  os << "x,F,dF\n";
  for (double x : xs) {
    const Jet j = f.jet(x, 1);
    os << format_double(x) << ',' << format_double(j.value()) << ',' << format_double(j.derivative(1)) << '\n';
  }
  return os.str();
}

double Schedule::t(double n) const {
  switch (kind) {
    case ScheduleKind::constant: return value;
    case ScheduleKind::log: return 1.0 / std::log(n + std::exp(1.0));
    case ScheduleKind::exp_sqrt_log: return std::exp(-std::sqrt(std::log(n)));
    case ScheduleKind::power: return std::pow(n, -value);
  }
  return value;
}

std::string Schedule::describe() const {
  switch (kind) {
    case ScheduleKind::constant: return "constant(" + format_double(value) + ")";
    case ScheduleKind::log: return "log";
    case ScheduleKind::exp_sqrt_log: return "exp_sqrt_log";
    case ScheduleKind::power: return "power(" + format_double(value) + ")";
  }
  return "?";
}

// Telescoping construction: F = F_1 - sum_m h_m, where h_m is a bump of
// height A_m on the annulus (t_{m+1}, t_m) and F_n keeps only m < n.
class AdmissibleCore {
 public:
  AdmissibleCore(Schedule schedule, TaperShape shape)
      : schedule_(schedule), shape_(shape), base_(plateau_symbol(schedule_.t(1), shape)) {
    if (schedule_.kind == ScheduleKind::power) {
      throw Error(ErrorCode::config, "schedule " + schedule_.describe() + " decays polynomially; not admissible");
    }
    check_schedule();
    bump_sup_ = bump_derivative_sups();
    const double w1 = width(1);
    design_ = 0.1;
    amp_scale_ = w1 > 0.0 ? design_ / q(w1) : 0.0;
  }

  const Schedule& schedule() const { return schedule_; }
  const TaperShape& shape() const { return shape_; }
  const SchwartzSymbol& base() const { return base_; }
  double t(std::uint64_t n) const { return schedule_.t(static_cast<double>(n)); }
  double width(std::uint64_t m) const { return t(m) - t(m + 1); }
  double amplitude(std::uint64_t m) const {
    if (amp_scale_ == 0.0) return 0.0;
    const double md = static_cast<double>(m);
    return amp_scale_ * q(width(m)) / (md * md);
  }
  // Bound on m^2 rho(h_m) for every battery seminorm.
  double design_constant() const { return amp_scale_; }
  const std::map<double, std::uint64_t>& thresholds() const { return thresholds_; }

  // Annulus index m with t_{m+1} <= x < t_m, or 0.
  std::uint64_t annulus(double x) const {
    if (amp_scale_ == 0.0 || !(x < t(1)) || !(x > 0.0)) return 0;
    constexpr std::uint64_t kTop = std::uint64_t{1} << 53;
    if (t(kTop) > x) return 0;
    std::uint64_t lo = 1;    // t_lo > x
    std::uint64_t hi = kTop; // t_hi <= x
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (t(mid) > x ? lo : hi) = mid;
    }
    return lo;
  }

  Jet bump(std::uint64_t m, double x, int order) const {
    const double w = width(m);
    const double a = amplitude(m);
    if (!(w > 0.0) || a == 0.0) return zero_jet(order);
    const Jet s = (Jet::variable(order, x) - t(m + 1)) / w;
    Jet b = bump_jet(s);
    b *= a;
    return b;
  }

  // h_m with the first `from` annuli excluded (from = 1 keeps all).
  Jet tail_jet(double x, int order, std::uint64_t from) const {
    const std::uint64_t m = annulus(x);
    if (m == 0 || m < from) return zero_jet(order);
    return bump(m, x, order);
  }

  std::vector<Interval> annuli(std::uint64_t from, std::uint64_t count) const {
    std::vector<Interval> out;
    if (amp_scale_ == 0.0) return out;
    for (std::uint64_t m = from; m < from + count; ++m) {
      if (!(width(m) > 0.0)) break;
      out.push_back({t(m + 1), t(m), 128});
    }
    return out;
  }

  double increment_seminorm(std::uint64_t m, int p, int alpha) const {
    const double lo = t(m + 1);
    const double w = width(m);
    if (!(w > 0.0)) return 0.0;
    double best = 0.0;
    constexpr int kSamples = 128;
    for (int i = 1; i < kSamples; ++i) {
      const double x = lo + w * i / kSamples;
      const Jet j = bump(m, x, alpha);
      best = std::max(best, std::fabs(ipow_d(x, p) * j.derivative(alpha)));
    }
    return best;
  }

  void compute_rates() const {
    std::call_once(rates_once_, [this] {
      constexpr std::uint64_t kRange = 1000;
      constexpr std::uint64_t kProbe = 1100;
      double inc = 0.0;
      for (int p = 0; p <= kBatteryOrder; ++p) {
        for (int a = 0; a <= kBatteryOrder; ++a) {
          std::vector<double> rho(kProbe + 2, 0.0);
          for (std::uint64_t m = 1; m <= kProbe; ++m) {
            rho[m] = increment_seminorm(m, p, a);
            inc = std::max(inc, rho[m] * static_cast<double>(m) * static_cast<double>(m));
          }
          // rho(F_n - F) = max_{m >= n} rho(h_m), annuli being disjoint
          double suffix = 0.0;
          double c = 0.0;
          for (std::uint64_t n = kProbe; n >= 1; --n) {
            suffix = std::max(suffix, rho[n]);
            if (n <= kRange) c = std::max(c, static_cast<double>(n) * suffix);
          }
          rates_["p" + std::to_string(p) + "a" + std::to_string(a)] = c;
        }
      }
      increment_ = inc;
    });
  }

  const std::map<std::string, double>& rates() const {
    compute_rates();
    return rates_;
  }
  double increment() const {
    compute_rates();
    return increment_;
  }

 private:
  static Jet bump_jet(const Jet& s) {
    const int order = s.order();
    const double sv = s.value();
    if (!(sv > 0.0 && sv < 1.0)) return zero_jet(order);
    const double uv = sv * (1.0 - sv);
    if (1.0 / uv > kExpCap) return zero_jet(order);
    const Jet one(order, 1.0);
    const Jet u = s * (one - s);
    return exp(4.0 - one / u);
  }

  static std::vector<double> bump_derivative_sups() {
    std::vector<double> sup(kBatteryOrder + 1, 0.0);
    constexpr int kSamples = 20000;
    for (int i = 1; i < kSamples; ++i) {
      const Jet j = bump_jet(Jet::variable(kBatteryOrder, static_cast<double>(i) / kSamples));
      for (int a = 0; a <= kBatteryOrder; ++a) sup[a] = std::max(sup[a], std::fabs(j.derivative(a)));
    }
    // Sampling may miss the true peaks slightly.
    for (auto& v : sup) v *= 1.05;
    return sup;
  }

  double q(double w) const {
    double best = INFINITY;
    double wp = 1.0;
    for (int a = 0; a <= kBatteryOrder; ++a) {
      best = std::min(best, wp / bump_sup_[a]);
      wp *= w;
    }
    return best;
  }

  void check_schedule() {
    std::vector<double> probes;
    for (int n = 1; n <= 1000; ++n) probes.push_back(n);
    for (int i = 1; i <= 240; ++i) probes.push_back(1000.0 * std::pow(10.0, i / 20.0));
    for (double alpha : {0.25, 0.5, 1.0}) {
      auto good = [&](double n) { return schedule_.t(n) > std::pow(n, -alpha); };
      std::size_t last_bad = probes.size();
      for (std::size_t i = 0; i < probes.size(); ++i) {
        if (!good(probes[i])) last_bad = i;
      }
      if (last_bad + 1 == probes.size()) {
        throw Error(ErrorCode::config, "schedule " + schedule_.describe() + " violates t_n > n^-alpha; not admissible");
      }
      std::uint64_t threshold = 1;
      if (last_bad < probes.size()) {
        // Bisect the integer crossing between the last failing probe and the next one.
        auto lo = static_cast<std::uint64_t>(probes[last_bad]);
        auto hi = static_cast<std::uint64_t>(std::ceil(probes[last_bad + 1]));
        while (hi - lo > 1) {
          const std::uint64_t mid = lo + (hi - lo) / 2;
          (good(static_cast<double>(mid)) ? hi : lo) = mid;
        }
        threshold = hi;
      }
      thresholds_[alpha] = threshold;
    }
    for (std::size_t i = 1; i < probes.size(); ++i) {
      if (schedule_.t(probes[i]) > schedule_.t(probes[i - 1]) || !(schedule_.t(probes[i]) > 0.0)) {
        throw Error(ErrorCode::config, "schedule must be positive and nonincreasing");
      }
    }
  }

  Schedule schedule_;
  TaperShape shape_;
  SchwartzSymbol base_;
  std::vector<double> bump_sup_;
  double amp_scale_ = 0.0;
  double design_ = 0.0;
  std::map<double, std::uint64_t> thresholds_;
  mutable std::once_flag rates_once_;
  mutable std::map<std::string, double> rates_;
  mutable double increment_ = 0.0;
};

namespace {

class MemberImpl final : public SymbolImpl {
 public:
  // n = 0 denotes the limit.
  MemberImpl(std::shared_ptr<const AdmissibleCore> core, std::uint64_t n) : core_(std::move(core)), n_(n) {}

  Jet jet(double x, int order) const override {
    Jet j = core_->base().jet(x, order);
    const std::uint64_t m = core_->annulus(x);
    if (m != 0 && (n_ == 0 || m < n_)) j -= core_->bump(m, x, order);
    return j;
  }
  std::optional<double> plateau_radius() const override {
    if (n_ == 0 && core_->design_constant() > 0.0) return std::nullopt;
    return core_->t(n_ == 0 ? 1 : n_);
  }
  double tail_radius() const override { return core_->base().tail_radius(); }
  std::vector<Interval> features() const override {
    auto f = core_->base().features();
    const std::uint64_t count = n_ == 0 ? 64 : std::min<std::uint64_t>(n_ - 1, 64);
    for (const auto& a : core_->annuli(1, count)) f.push_back(a);
    return f;
  }
  std::string describe() const override {
    const std::string s = "admissible(" + core_->schedule().describe() + ")";
    return n_ == 0 ? s : s + "[n=" + std::to_string(n_) + "]";
  }

 private:
  std::shared_ptr<const AdmissibleCore> core_;
  std::uint64_t n_;
};

class TailImpl final : public SymbolImpl {
 public:
  TailImpl(std::shared_ptr<const AdmissibleCore> core, std::uint64_t n) : core_(std::move(core)), n_(n) {}
  Jet jet(double x, int order) const override { return core_->tail_jet(x, order, n_); }
  double tail_radius() const override { return core_->t(1); }
  std::vector<Interval> features() const override { return core_->annuli(n_, 8); }
  std::string describe() const override {
    return "admissible(" + core_->schedule().describe() + ") tail from n=" + std::to_string(n_);
  }

 private:
  std::shared_ptr<const AdmissibleCore> core_;
  std::uint64_t n_;
};

}  // namespace

SymbolSequence::SymbolSequence(std::shared_ptr<const AdmissibleCore> core) : core_(std::move(core)) {}

const Schedule& SymbolSequence::schedule() const { return core_->schedule(); }
double SymbolSequence::radius(std::uint64_t n) const { return core_->t(n); }

SchwartzSymbol SymbolSequence::member(std::uint64_t n) const {
  if (n == 0) throw Error(ErrorCode::domain, "sequence members start at n = 1");
  return SchwartzSymbol(std::make_shared<MemberImpl>(core_, n));
}

SchwartzSymbol SymbolSequence::limit() const { return SchwartzSymbol(std::make_shared<MemberImpl>(core_, 0)); }

SchwartzSymbol SymbolSequence::tail(std::uint64_t n) const {
  if (n == 0) throw Error(ErrorCode::domain, "sequence members start at n = 1");
  return SchwartzSymbol(std::make_shared<TailImpl>(core_, n));
}

const std::map<std::string, double>& SymbolSequence::rate_constants() const { return core_->rates(); }
double SymbolSequence::increment_constant() const { return core_->increment(); }
double SymbolSequence::design_constant() const { return core_->design_constant(); }
const std::map<double, std::uint64_t>& SymbolSequence::schedule_thresholds() const { return core_->thresholds(); }
std::uint64_t SymbolSequence::tested_range() const { return 1000; }

SymbolSequence admissible_from_schedule(const Schedule& schedule, const TaperShape& shape) {
  return SymbolSequence(std::make_shared<const AdmissibleCore>(schedule, shape));
}

std::uint64_t k_index(int l, double eps) {
  if (l < 1) throw Error(ErrorCode::domain, "stage level must be >= 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::domain, "eps must lie in (0, 1]");
  double v = std::pow(eps, -static_cast<double>(l));
  if (!(v <= 0x1.0p62)) throw Error(ErrorCode::domain, "k_index overflow: eps^-l exceeds 2^62");
  // Grid values such as 0.1 are not exact binary fractions; powers that land
  // within rounding of an integer are taken to be that integer.
  const double r = std::round(v);
  if (std::fabs(v - r) <= 1e-9 * std::max(1.0, v)) v = r;
  return static_cast<std::uint64_t>(std::floor(v)) + 1;
}

SchwartzSymbol staged_symbol(const SymbolSequence& seq, int l, double eps) {
  return scale(seq.member(k_index(l, eps)), eps);
}

}  // namespace spemb
