#include <cmath>
#include <functional>

#include "doctest.h"
#include "spemb/catalog.hpp"
#include "spemb/error.hpp"
#include "spemb/meter.hpp"
#include "spemb/verifier.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace spemb;
using oracle::kPi;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::internal;
}

const EpsilonGrid& default_grid() {
  static const EpsilonGrid g = EpsilonGrid::geometric(1e-1, 1e-6, 26);
  return g;
}

std::vector<double> power(const std::vector<double>& eps, double p, double c = 1.0) {
  std::vector<double> v;
  for (double e : eps) v.push_back(c * std::pow(e, p));
  return v;
}

}  // namespace

TEST_SUITE("asymptotic_meter") {

TEST_CASE("fit_order examples") {
  const auto& e = default_grid().samples();
  auto r = fit_order(e, power(e, 3.0));
  CHECK(r.slope == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(*r.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.verdict == VerdictKind::order);
  auto c = fit_order(e, power(e, 0.0));
  CHECK(std::abs(c.slope) < 1e-12);
  std::vector<double> heat;
  for (double x : e) heat.push_back((1.0 - std::exp(-x)) * std::sqrt(kPi));
  CHECK(fit_order(e, heat).slope == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fit_order floors and errors") {
  const auto& e = default_grid().samples();
  std::vector<double> zeros(e.size(), 0.0);
  auto z = fit_order(e, zeros);
  CHECK(z.negligible());
  CHECK(!z.r_squared);
  CHECK(z.order() == kOrderCap);
  std::vector<double> neg(e.size(), 1.0);
  neg[3] = -1.0;
  CHECK(code_of([&] { fit_order(e, neg); }) == ErrorCode::data);
  CHECK(code_of([&] { fit_order(std::vector<double>(e.begin(), e.begin() + 5), std::vector<double>(5, 1.0)); }) ==
        ErrorCode::data);
  // Steep decay: order at least N_max is negligible.
  CHECK(fit_order(e, power(e, 13.0)).negligible());
  // A steady power law that crosses the floor is still an order.
  auto crossing = fit_order(e, power(e, 2.8));
  CHECK(crossing.floor_hit);
  CHECK(crossing.verdict == VerdictKind::order);
  CHECK(crossing.slope == doctest::Approx(2.8).epsilon(1e-9));
  // Floor reached before the window fills.
  auto early = power(e, 1.0);
  for (std::size_t i = 6; i < early.size(); ++i) early[i] = 0.0;
  CHECK(fit_order(e, early).negligible());
}

TEST_CASE("property: exact power data recovers the exponent") {
  gen::Source src(41);
  for (int rep = 0; rep < 300; ++rep) {
    const double p = src.uniform(-4.0, 1.9);
    const double c = src.log_uniform(1e-3, 1e3);
    const std::size_t n = static_cast<std::size_t>(src.integer(8, 40));
    const auto e = oracle::geometric(src.uniform(0.05, 1.0), src.log_uniform(1e-7, 1e-3), n);
    auto r = fit_order(e, power(e, p, c));
    REQUIRE(r.slope == doctest::Approx(p).epsilon(1e-6).scale(1.0));
    REQUIRE(!r.preasymptotic);
  }
}

TEST_CASE("property: scaling a net leaves slopes unchanged") {
  gen::Source src(42);
  const auto& e = default_grid().samples();
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v;
    const double p = src.uniform(-3.0, 3.0);
    for (double x : e) v.push_back(std::pow(x, p) * (1.0 + 0.3 * std::sin(src.uniform(0, 6.28))));
    const double c = src.log_uniform(1e-4, 1e4);
    std::vector<double> w;
    for (double x : v) w.push_back(c * x);
    auto a = fit_order(e, v);
    auto b = fit_order(e, w);
    REQUIRE(b.slope == doctest::Approx(a.slope).epsilon(1e-9).scale(1.0));
    REQUIRE(b.intercept - a.intercept == doctest::Approx(std::log(c)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("not_O verdicts") {
  const auto& e = default_grid().samples();
  auto r = fit_order(e, power(e, -0.5));
  CHECK(not_O(r, 0.0));
  CHECK(!not_O(r, -0.55));
  CHECK(!not_O(fit_order(e, std::vector<double>(e.size(), 0.0)), 5.0));
}

TEST_CASE("classify_net") {
  const auto& e = default_grid().samples();
  std::map<std::string, RateEstimate> zero{{"H0", fit_order(e, std::vector<double>(e.size(), 0.0))}};
  CHECK(classify_net(zero).kind == NetClass::negligible);
  std::map<std::string, RateEstimate> mixed{{"H0", fit_order(e, power(e, 1.0))}, {"H1", zero.at("H0")}};
  CHECK(classify_net(mixed).kind == NetClass::moderate);
  CHECK(code_of([] { classify_net({}); }) == ErrorCode::data);
}

TEST_CASE("plateau delta profile against direct summation") {
  auto m = make_manifold("circle");
  auto net = SymbolNet::plain(plateau_symbol(1.0));
  const auto& grid = default_grid();
  auto bat = SeminormBattery::defaults(*m);
  auto d = catalog_for_net(net, m, {.id = "d", .name = "delta"}, grid);
  auto rates = embed_rates(embed(net, grid, d), bat, {});
  CHECK(classify_net(rates).kind == NetClass::moderate);
  auto F = [](double x) { return plateau_symbol(1.0).evaluate(x); };
  for (int j = 0; j <= 3; ++j) {
    std::vector<double> brute;
    for (double eps : grid.samples()) brute.push_back(std::sqrt(oracle::circle_delta_sobolev_sq(F, eps, j, 4000)));
    const std::vector<double> tail(grid.samples().end() - 12, grid.samples().end());
    const std::vector<double> btail(brute.end() - 12, brute.end());
    const double oracle_slope = oracle::loglog_slope(tail, btail);
    CHECK(oracle_slope == doctest::Approx(-(2.0 * j + 1.0) / 4.0).epsilon(0.05 / ((2.0 * j + 1.0) / 4.0)));
    CHECK(rates.at("H" + std::to_string(j)).slope == doctest::Approx(oracle_slope).epsilon(1e-6));
  }
}

TEST_CASE("property: differentiation costs order") {
  auto m = make_manifold("circle");
  const auto& grid = default_grid();
  auto bat = SeminormBattery::defaults(*m);
  bat.sup_orders.clear();
  std::vector<DistributionSpec> suite{{.id = "d", .name = "delta"},
                                      {.id = "dp", .name = "delta_derivative", .x0 = {1.0, 0}},
                                      {.id = "saw", .name = "sawtooth"},
                                      {.id = "n1", .name = "sobolev_noise", .s = -1.5, .seed = 3},
                                      {.id = "n2", .name = "sobolev_noise", .s = 1.2, .seed = 4}};
  for (const auto& net : {SymbolNet::plain(plateau_symbol(1.0)), SymbolNet::plain(heat_symbol())}) {
    for (const auto& u : suite) {
      auto rates = embed_rates(embed(net, grid, catalog_for_net(net, m, u, grid)), bat, {});
      for (std::size_t j = 0; j + 1 < bat.sobolev_orders.size(); ++j) {
        const double a = rates.at("H" + std::to_string(j)).order();
        const double b = rates.at("H" + std::to_string(j + 1)).order();
        REQUIRE(b <= a + 0.05);
      }
    }
  }
}

TEST_CASE("property: verdicts survive negligible perturbations") {
  auto m = make_manifold("circle");
  const auto& grid = default_grid();
  auto bat = SeminormBattery::defaults(*m);
  auto net = SymbolNet::plain(plateau_symbol(1.0));
  std::vector<DistributionSpec> suite{{.id = "d", .name = "delta"},
                                      {.id = "saw", .name = "sawtooth"},
                                      {.id = "n", .name = "sobolev_noise", .s = -1.0, .seed = 5},
                                      {.id = "p", .name = "poisson_smooth", .r = 0.5}};
  gen::Source src(43);
  for (const auto& u : suite) {
    auto c = catalog_for_net(net, m, u, grid);
    auto cn = embed(net, grid, c);
    PerturbSchedule ps{.amplitude = src.uniform(0.5, 2.0), .cap = 40, .rank = static_cast<std::size_t>(src.integer(2, 12))};
    auto pn = perturb_with_negligible(cn, ps);
    auto a = classify_net(embed_rates(cn, bat, {}));
    auto b = classify_net(embed_rates(pn, bat, {}));
    CHECK(a.kind == b.kind);
    for (const auto& [id, r] : a.table) {
      CHECK(r.verdict == b.table.at(id).verdict);
      CHECK(std::abs(r.order() - b.table.at(id).order()) <= 0.02);
    }
    if (describe_distribution(*m, u).smooth) {
      auto da = classify_net(defect_rates(cn, c, bat, {}));
      auto db = classify_net(defect_rates(pn, c, bat, {}));
      CHECK(da.kind == NetClass::negligible);
      CHECK(db.kind == NetClass::negligible);
    }
  }
}

TEST_CASE("defect of a smooth function under the plateau is negligible") {
  auto m = make_manifold("circle");
  const auto& grid = default_grid();
  auto net = SymbolNet::plain(plateau_symbol(1.0));
  auto bat = SeminormBattery::defaults(*m);
  for (const auto& f : {DistributionSpec{.id = "p", .name = "poisson_smooth", .r = 0.5},
                        DistributionSpec{.id = "p9", .name = "poisson_smooth", .r = 0.9},
                        DistributionSpec{.id = "b", .name = "bump", .outer = 0.5}}) {
    auto u = catalog_for_net(net, m, f, grid);
    CHECK(classify_net(defect_rates(embed(net, grid, u), u, bat, {})).kind == NetClass::negligible);
  }
}

TEST_CASE("sharp distances") {
  auto m = make_manifold("circle");
  const auto& grid = default_grid();
  auto net = SymbolNet::plain(plateau_symbol(1.0));
  auto bat = SeminormBattery::defaults(*m);
  auto cn = embed(net, grid, catalog_for_net(net, m, {.id = "d", .name = "delta"}, grid));
  for (const auto& [id, v] : sharp_distance(cn, cn, bat)) CHECK(v.value >= kOrderCap);
  auto seq = admissible_from_schedule({});
  auto lim = SymbolNet::limit(seq);
  std::vector<SymbolSeminorm> sn{{0, 0}, {1, 0}};
  auto s2 = sharp_distance(SymbolNet::staged(seq, 2), lim, grid, sn);
  CHECK(s2.at("p0a0").value >= 1.8);
  CHECK(s2.at("p1a0").value >= 0.8);
  auto s1 = sharp_distance(SymbolNet::staged(seq, 1), lim, grid, sn);
  CHECK(s1.at("p0a0").value >= 0.8);
}

TEST_CASE("property: valuations are superadditive under products") {
  gen::Source src(44);
  const auto& e = default_grid().samples();
  for (int rep = 0; rep < 200; ++rep) {
    const double a = src.uniform(-2.0, 4.0);
    const double b = src.uniform(-2.0, 4.0);
    // Power laws with slow log-periodic wobble, as seen in lattice sums.
    const double wa = src.uniform(0.0, 0.3), pa = src.uniform(0.0, 6.28);
    const double wb = src.uniform(0.0, 0.3), pb = src.uniform(0.0, 6.28);
    std::vector<double> x, y, xy;
    for (double t : e) {
      const double u = std::pow(t, a) * (1.0 + 0.1 * std::sin(wa * std::log(t) + pa));
      const double v = std::pow(t, b) * (1.0 + 0.1 * std::sin(wb * std::log(t) + pb));
      x.push_back(u);
      y.push_back(v);
      xy.push_back(u * v);
    }
    const double vx = valuation(e, x).value;
    const double vy = valuation(e, y).value;
    const double vxy = valuation(e, xy).value;
    REQUIRE(vxy >= std::min(vx + vy, kOrderCap) - 0.1);
  }
}

TEST_CASE("grid designer") {
  auto c = make_manifold("circle");
  auto g = grid_designer({}, *c).grid;
  CHECK(g.size() == 26);
  CHECK(g[0] == doctest::Approx(1e-1));
  CHECK(g.smallest() == doctest::Approx(1e-6));
  auto t = grid_designer({}, *make_manifold("torus2"));
  CHECK(t.grid.smallest() == doctest::Approx(1e-4));
  auto s = grid_designer({}, *make_manifold("sphere-zonal")).grid;
  CHECK(s.smallest() == doctest::Approx(1e-6));
  CHECK(code_of([&] { grid_designer({.hi = 0.1, .lo = 1e-3, .count = 2}, *c); }) == ErrorCode::config);
  CHECK(code_of([&] { grid_designer({.hi = 1e-3, .lo = 1e-1, .count = 10}, *c); }) == ErrorCode::config);
  auto net = SymbolNet::plain(plateau_symbol(1.0));
  auto big = grid_designer({.hi = 0.1, .lo = 1e-9, .count = 10}, *c, &net, 1e3);
  CHECK(!big.warnings.empty());
}

TEST_CASE("battery evaluation and csv") {
  auto m = make_manifold("circle");
  auto bat = SeminormBattery::defaults(*m);
  CHECK(bat.ids().size() == 14);
  auto u = distribution_catalog(m, {.id = "c", .name = "trig_poly", .terms = {{2, 0, "cos", 1.0}}}, 5);
  auto v = evaluate_battery(u, bat);
  CHECK(v.at("H2") == doctest::Approx(std::sqrt(kPi) * 5.0).epsilon(1e-14));
  CHECK(v.at("C3") == doctest::Approx(8.0).epsilon(1e-12));
  auto s = make_manifold("sphere-zonal");
  CHECK(SeminormBattery::defaults(*s).sup_orders == std::vector<int>{0});
  CHECK(code_of([&] { bat.validate(*s); }) == ErrorCode::unsupported);
  const auto& e = default_grid().samples();
  std::map<std::string, RateEstimate> tab{{"H0", fit_order(e, power(e, 1.0))}};
  CHECK(rates_csv_header() == "seminorm,slope,r2,window_lo,window_hi,floor_hit,verdict\n");
  CHECK(rates_csv(tab, "embed").rfind("embed:H0,", 0) == 0);
}

}  // TEST_SUITE
