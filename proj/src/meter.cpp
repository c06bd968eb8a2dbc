#include "spemb/meter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spemb/error.hpp"
#include "spemb/util.hpp"

namespace spemb {

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y, std::size_t lo, std::size_t hi) {
  const double n = static_cast<double>(hi - lo + 1);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  if (syy > 0.0) {
    double res = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      const double e = y[i] - (f.intercept + f.slope * x[i]);
      res += e * e;
    }
    f.r2 = std::clamp(1.0 - res / syy, 0.0, 1.0);
  }
  return f;
}

}  // namespace

std::string RateEstimate::verdict_string() const {
  if (negligible()) return "negligible_up_to(" + format_double(n_max) + ")";
  return "order(" + format_double(slope) + ")";
}

RateEstimate fit_order(std::span<const double> eps, std::span<const double> values, const FitPolicy& policy) {
  // Relative to the coarsest sample: a growing net never meets the floor.
  const double ref = values.empty() ? 0.0 : values.front();
  return fit_order(eps, values, policy, ref);
}

RateEstimate fit_order(std::span<const double> eps, std::span<const double> values, const FitPolicy& policy,
                       double reference) {
  std::vector<double> refs(values.size(), reference);
  return fit_order(eps, values, policy, std::span<const double>(refs));
}

RateEstimate fit_order(std::span<const double> eps, std::span<const double> values, const FitPolicy& policy,
                       std::span<const double> references) {
  const std::size_t n = values.size();
  if (eps.size() != n || references.size() != n) throw Error(ErrorCode::data, "rate fit inputs differ in length");
  if (n == 0) throw Error(ErrorCode::data, "rate fit needs samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0.0)) throw Error(ErrorCode::data, "eps samples must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw Error(ErrorCode::data, "eps samples must descend");
    if (std::isnan(values[i]) || values[i] < 0.0 || std::isinf(values[i])) {
      throw Error(ErrorCode::data, "net values must be finite and nonnegative");
    }
  }
  RateEstimate r;
  r.n_max = policy.n_max;

  std::size_t above = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (values[i] <= policy.floor * references[i]) {
      above = i;
      break;
    }
  }
  r.above_floor = above;
  r.floor_hit = above < n;
  if (!r.floor_hit && n < policy.min_samples) {
    throw Error(ErrorCode::data, "rate fit needs at least " + std::to_string(policy.min_samples) + " samples above floor");
  }
  if (above == 0) {
    r.verdict = VerdictKind::negligible;
    return r;
  }

  std::vector<double> lx(above), ly(above);
  for (std::size_t i = 0; i < above; ++i) {
    lx[i] = std::log(eps[i]);
    ly[i] = std::log(values[i]);
  }
  r.window_hi = above - 1;
  r.window_lo = above > policy.window ? above - policy.window : 0;
  const std::size_t len = r.window_hi - r.window_lo + 1;
  if (len >= 2) {
    const LineFit f = least_squares(lx, ly, r.window_lo, r.window_hi);
    r.slope = f.slope;
    r.intercept = f.intercept;
    r.r_squared = f.r2;
  }
  if (len >= 4) {
    const std::size_t mid = r.window_lo + len / 2;
    r.first_half_slope = least_squares(lx, ly, r.window_lo, mid - 1).slope;
    r.second_half_slope = least_squares(lx, ly, mid, r.window_hi).slope;
    r.preasymptotic = std::fabs(r.second_half_slope - r.first_half_slope) > policy.preasymptotic_gap;
  } else {
    r.first_half_slope = r.second_half_slope = r.slope;
  }

  if (r.floor_hit && len < policy.window) {
    r.verdict = VerdictKind::negligible;
    return r;
  }
  if (r.slope >= policy.n_max) {
    r.verdict = VerdictKind::negligible;
    return r;
  }
  if (r.floor_hit) {
    // A full window ended at the floor: the net left the representable range.
    // It is negligible when its decay reached N_max at the end or was still
    // steepening; a steady power law that merely crosses the floor is not.
    const std::size_t m = std::min(policy.terminal, above);
    if (m >= 2) r.terminal_slope = least_squares(lx, ly, above - m, above - 1).slope;
    const bool steep_end = r.terminal_slope && *r.terminal_slope >= policy.n_max;
    const bool steepening = r.second_half_slope - r.first_half_slope > policy.preasymptotic_gap;
    if (steep_end || steepening) {
      r.verdict = VerdictKind::negligible;
      return r;
    }
  }
  r.verdict = VerdictKind::order;
  return r;
}

bool not_O(const RateEstimate& r, double q) {
  return !r.negligible() && r.r_squared && *r.r_squared >= 0.98 && r.slope < q - 0.1;
}

std::string to_string(NetClass c) {
  switch (c) {
    case NetClass::moderate: return "moderate";
    case NetClass::negligible: return "negligible";
    case NetClass::neither: return "neither";
  }
  return "neither";
}

Classification classify_net(const std::map<std::string, RateEstimate>& battery) {
  if (battery.empty()) throw Error(ErrorCode::data, "empty seminorm battery");
  Classification c;
  c.table = battery;
  bool all_negligible = true;
  bool all_finite = true;
  for (const auto& [id, r] : battery) {
    if (!r.negligible()) all_negligible = false;
    if (!std::isfinite(r.order())) all_finite = false;
  }
  c.kind = all_negligible ? NetClass::negligible : (all_finite ? NetClass::moderate : NetClass::neither);
  return c;
}

SeminormBattery SeminormBattery::defaults(const SpectralManifold& man) {
  SeminormBattery b;
  if (man.kind() == ManifoldKind::sphere_zonal) b.sup_orders = {0};
  return b;
}

void SeminormBattery::validate(const SpectralManifold& man) const {
  if (sobolev_orders.empty() && sup_orders.empty()) throw Error(ErrorCode::config, "seminorm battery is empty");
  for (std::size_t i = 1; i < sobolev_orders.size(); ++i) {
    if (sobolev_orders[i] <= sobolev_orders[i - 1]) throw Error(ErrorCode::config, "Sobolev orders must be sorted");
  }
  for (std::size_t i = 1; i < sup_orders.size(); ++i) {
    if (sup_orders[i] <= sup_orders[i - 1]) throw Error(ErrorCode::config, "sup orders must be sorted");
  }
  for (int j : sobolev_orders) {
    if (std::abs(j) > 32) throw Error(ErrorCode::config, "Sobolev order out of range");
  }
  for (int a : sup_orders) {
    if (a < 0 || a > 8) throw Error(ErrorCode::config, "sup derivative order out of range");
    if (a > 0 && man.kind() == ManifoldKind::sphere_zonal) {
      throw Error(ErrorCode::unsupported, "sup derivative seminorms are not available on the sphere");
    }
  }
}

std::vector<std::string> SeminormBattery::ids() const {
  std::vector<std::string> out;
  for (int j : sobolev_orders) out.push_back("H" + std::to_string(j));
  for (int a : sup_orders) out.push_back("C" + std::to_string(a));
  return out;
}

std::map<std::string, double> evaluate_battery(const SpectralCoefficients& c, const SeminormBattery& battery) {
  std::map<std::string, double> out;
  for (int j : battery.sobolev_orders) out["H" + std::to_string(j)] = sobolev_norm(c, j);
  for (int a : battery.sup_orders) out["C" + std::to_string(a)] = sup_seminorm(c, a, battery.grid_resolution);
  return out;
}

std::map<std::string, std::vector<double>> battery_series(const std::vector<SpectralCoefficients>& frames,
                                                          const SeminormBattery& battery) {
  std::vector<std::map<std::string, double>> per(frames.size());
  parallel_for(frames.size(), [&](std::size_t i) { per[i] = evaluate_battery(frames[i], battery); });
  std::map<std::string, std::vector<double>> out;
  for (const auto& id : battery.ids()) {
    auto& v = out[id];
    v.reserve(frames.size());
    for (const auto& m : per) v.push_back(m.at(id));
  }
  return out;
}

SharpValuation valuation(std::span<const double> eps, std::span<const double> values, const FitPolicy& policy) {
  SharpValuation s;
  s.estimate = fit_order(eps, values, policy);
  s.value = s.estimate.order();
  return s;
}

std::map<std::string, SharpValuation> sharp_distance(const CoefficientNet& a, const CoefficientNet& b,
                                                     const SeminormBattery& battery, const FitPolicy& policy) {
  if (a.grid.samples() != b.grid.samples()) throw Error(ErrorCode::data, "sharp distance needs a common grid");
  std::vector<SpectralCoefficients> diff;
  diff.reserve(a.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) diff.push_back(subtract(a.frames[i], b.frames[i]));
  const auto dv = battery_series(diff, battery);
  const auto rv = battery_series(a.frames, battery);
  std::map<std::string, SharpValuation> out;
  for (const auto& [id, v] : dv) {
    SharpValuation s;
    s.estimate = fit_order(a.grid.samples(), v, policy, std::span<const double>(rv.at(id)));
    s.value = s.estimate.order();
    out[id] = s;
  }
  return out;
}

std::map<std::string, SharpValuation> sharp_distance(const SymbolNet& a, const SymbolNet& b, const EpsilonGrid& grid,
                                                     const std::vector<SymbolSeminorm>& seminorms,
                                                     const FitPolicy& policy) {
  std::map<std::string, SharpValuation> out;
  for (const auto& sn : seminorms) {
    std::vector<double> v(grid.size()), ref(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
      v[i] = symbol_seminorm(a.difference_at(b, grid[i]), sn.p, sn.alpha);
      ref[i] = symbol_seminorm(a.at(grid[i]), sn.p, sn.alpha);
    });
    SharpValuation s;
    s.estimate = fit_order(grid.samples(), v, policy, std::span<const double>(ref));
    s.value = s.estimate.order();
    out[sn.id()] = s;
  }
  return out;
}

DesignedGrid grid_designer(const GridPolicy& policy, const SpectralManifold& man, const SymbolNet* net,
                           double mode_budget) {
  const bool torus = man.kind() == ManifoldKind::torus2;
  constexpr double kTorusFloor = 1e-4;
  DesignedGrid out;
  const double hi = policy.hi.value_or(1e-1);
  double lo = policy.lo.value_or(torus ? kTorusFloor : 1e-6);
  const std::size_t count = policy.count.value_or(torus ? 16 : 26);
  if (count < 8) throw Error(ErrorCode::config, "eps grid needs at least 8 points");
  if (!(hi > lo && lo > 0.0 && hi <= 1.0)) throw Error(ErrorCode::config, "invalid eps range");
  if (torus && lo < kTorusFloor) {
    out.warnings.push_back("torus eps grid floored at 1e-4");
    lo = kTorusFloor;
    if (!(hi > lo)) throw Error(ErrorCode::config, "invalid eps range after torus floor");
  }
  out.grid = EpsilonGrid::geometric(hi, lo, count);
  if (net) {
    const double projected = static_cast<double>(man.modes_below(net->tail_radius(lo)));
    if (projected > mode_budget) {
      out.warnings.push_back("projected mode count " + format_double(projected) + " exceeds budget " +
                             format_double(mode_budget));
    }
  }
  return out;
}

std::string rates_csv_header() { return "seminorm,slope,r2,window_lo,window_hi,floor_hit,verdict\n"; }

std::string rates_csv(const std::map<std::string, RateEstimate>& table, const std::string& quantity) {
  std::ostringstream os;
  for (const auto& [id, r] : table) {
    os << (quantity.empty() ? id : quantity + ":" + id) << ',' << format_double(r.slope) << ','
       << (r.r_squared ? format_double(*r.r_squared) : std::string()) << ',' << r.window_lo << ',' << r.window_hi << ','
       << (r.floor_hit ? "true" : "false") << ',' << r.verdict_string() << '\n';
  }
  return os.str();
}

}  // namespace spemb
