#include <cmath>
#include <functional>

#include "doctest.h"
#include "spemb/catalog.hpp"
#include "spemb/error.hpp"
#include "spemb/meter.hpp"
#include "spemb/net.hpp"
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

const DistributionSpec kCos{.id = "cos", .name = "trig_poly", .terms = {{1, 0, "cos", 1.0}}};
const DistributionSpec kDelta{.id = "delta", .name = "delta"};

std::vector<Point> circle_points(std::size_t G) {
  std::vector<Point> p(G);
  for (std::size_t i = 0; i < G; ++i) p[i] = {2.0 * kPi * static_cast<double>(i) / static_cast<double>(G), 0.0};
  return p;
}

}  // namespace

TEST_SUITE("calculus_net") {

TEST_CASE("epsilon grids") {
  auto g = EpsilonGrid::geometric(1e-1, 1e-6, 26);
  REQUIRE(g.size() == 26);
  CHECK(g[0] == doctest::Approx(1e-1));
  CHECK(g.smallest() == doctest::Approx(1e-6));
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] < g[i - 1]);
    CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]).epsilon(1e-12));
  }
  CHECK(code_of([] { EpsilonGrid({0.1, 0.2}); }) == ErrorCode::config);
  CHECK(code_of([] { EpsilonGrid({0.1, 0.01, 0.009}); }) == ErrorCode::config);
  CHECK(code_of([] { EpsilonGrid({2.0, 0.1}); }) == ErrorCode::config);
}

TEST_CASE("apply_symbol examples") {
  auto m = make_manifold("circle");
  auto u = distribution_catalog(m, kCos, 5);
  auto plateau = SymbolNet::plain(plateau_symbol(1.0));
  auto v = apply_symbol(plateau, 0.5, u);
  for (std::size_t n = 0; n < 5; ++n) CHECK(v[n] == u[n]);
  auto heat = SymbolNet::plain(heat_symbol());
  auto w = apply_symbol(heat, 1.0, u);
  CHECK(w[1].real() == doctest::Approx(std::exp(-1.0) * std::sqrt(kPi)).epsilon(1e-15));
}

TEST_CASE("plateau applied to delta against direct summation") {
  auto m = make_manifold("circle");
  auto net = SymbolNet::plain(plateau_symbol(1.0));
  const double eps = 1e-4;
  auto d = distribution_catalog(m, kDelta, required_cutoff(net, *m, EpsilonGrid({1e-3, eps})));
  auto v = apply_symbol(net, eps, d);
  for (std::size_t n = 0; n < v.cutoff(); ++n) {
    if (m->eigenvalue(n) < 1e4) REQUIRE(v[n] == d[n]);
  }
  auto F = [](double x) { return plateau_symbol(1.0).evaluate(x); };
  for (double j : {0.0, 1.0, 2.0}) {
    const double ref = std::sqrt(oracle::circle_delta_sobolev_sq(F, eps, j, 400));
    CHECK(sobolev_norm(v, j) == doctest::Approx(ref).epsilon(1e-11));
  }
}

TEST_CASE("embed examples") {
  auto m = make_manifold("circle");
  auto grid = EpsilonGrid::geometric(0.5, 1e-3, 10);
  auto plateau = SymbolNet::plain(plateau_symbol(1.0));
  auto zero = embed(plateau, grid, distribution_catalog(m, {.id = "z", .name = "zero"}, 9));
  for (const auto& f : zero.frames) CHECK(sobolev_norm(f, 0) == 0.0);
  auto u = distribution_catalog(m, kCos, 5);
  auto cn = embed(plateau, grid, u);
  for (const auto& f : cn.frames)
    for (std::size_t n = 0; n < 5; ++n) CHECK(f[n] == u[n]);
  auto heat = embed(SymbolNet::plain(heat_symbol()), grid, u);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(sobolev_norm(heat.frames[i], 0) == doctest::Approx(std::exp(-grid[i]) * std::sqrt(kPi)).epsilon(1e-14));
  }
}

TEST_CASE("mode counts") {
  auto m = make_manifold("circle");
  auto f = plateau_symbol(1.0);
  CHECK(mode_count_N_eps(f, *m, 1e-4) == 199);
  CHECK(mode_count_N_eps(f, *m, 1.0) == 1);
  CHECK(mode_count_N_eps(f, *m, 1e-2) == 19);
  CHECK(code_of([&] { mode_count_N_eps(heat_symbol(), *m, 0.1); }) == ErrorCode::domain);
}

TEST_CASE("property: mode count follows the Weyl bound") {
  auto m = make_manifold("circle");
  auto f = plateau_symbol(1.0);
  for (double eps : oracle::geometric(1e-3, 1e-9, 25)) {
    const double r = static_cast<double>(mode_count_N_eps(f, *m, eps)) * std::sqrt(eps);
    CHECK(std::abs(r - 2.0) <= 0.05 * 2.0);
  }
}

TEST_CASE("kernel synthesis reproduces the spectral action") {
  auto m = make_manifold("circle");
  gen::Source src(31);
  const std::size_t G = 96;
  const auto pts = circle_points(G);
  for (const auto& net : {SymbolNet::plain(plateau_symbol(1.0)), SymbolNet::plain(heat_symbol())}) {
    const double eps = 0.1;
    auto k = kernel_synthesize(net, eps, *m, pts, pts);
    auto u = src.field(m, 25, 0.5);
    auto want = synthesize(apply_symbol(net, eps, u), pts);
    auto samples = synthesize(u, pts);
    double scale = 0.0;
    for (auto& w : want) scale = std::max(scale, std::abs(w));
    for (std::size_t i = 0; i < G; ++i) {
      double s = 0.0;
      double row = 0.0;
      for (std::size_t j = 0; j < G; ++j) {
        s += k(i, j) * samples[j].real();
        row += k(i, j);
      }
      s *= 2.0 * kPi / G;
      row *= 2.0 * kPi / G;
      REQUIRE(std::abs(s - want[i].real()) <= 1e-8 * scale);
      REQUIRE(row == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("kernel acts as identity on the plateau band") {
  auto m = make_manifold("circle");
  auto net = SymbolNet::plain(plateau_symbol(1.0));
  const std::size_t G = 256;
  const auto pts = circle_points(G);
  auto k = kernel_synthesize(net, 0.01, *m, pts, pts);
  gen::Source src(32);
  auto u = src.field(m, 19, 0.0);  // |n| <= 9, inside lambda < 100
  auto vals = synthesize(u, pts);
  for (std::size_t i = 0; i < G; i += 5) {
    double s = 0.0;
    for (std::size_t j = 0; j < G; ++j) s += k(i, j) * vals[j].real();
    CHECK(s * 2.0 * kPi / G == doctest::Approx(vals[i].real()).epsilon(1e-10).scale(1.0));
  }
  CHECK(code_of([&] { kernel_synthesize(net, 1e-4, *m, pts, pts); }) == ErrorCode::resolution);
}

TEST_CASE("heat kernel trace") {
  auto m = make_manifold("circle");
  auto net = SymbolNet::plain(heat_symbol());
  const std::size_t G = 128;
  const auto pts = circle_points(G);
  auto k = kernel_synthesize(net, 0.1, *m, pts, pts);
  double tr = 0.0;
  for (std::size_t i = 0; i < G; ++i) tr += k(i, i);
  tr *= 2.0 * kPi / G;
  CHECK(tr == doctest::Approx(oracle::circle_heat_trace(0.1)).epsilon(1e-12));
}

TEST_CASE("operator norms") {
  auto m = make_manifold("circle");
  auto plateau = SymbolNet::plain(plateau_symbol(1.0));
  auto heat = SymbolNet::plain(heat_symbol());
  for (double eps : {0.5, 0.01, 1e-5}) {
    CHECK(operator_norm(plateau, eps, *m, 0) == 1.0);
    CHECK(operator_norm(heat, eps, *m, 0) == 1.0);
    CHECK(operator_norm_diff(plateau, plateau, eps, *m, 0) == 0.0);
  }
  // H^{-2} source: the plateau edge dominates, about 1 + t/eps
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const double v = operator_norm(plateau, eps, *m, -2);
    CHECK(v >= 1.0 + 0.99 / eps - 2.0 * std::sqrt(1.0 / eps));
    CHECK(v <= 10.0 / eps + 1.0);
  }
  auto grid = EpsilonGrid::geometric(1e-1, 1e-6, 26);
  for (int j = 1; j <= 3; ++j) {
    auto on = operator_norm_net(plateau, grid, *m, -2.0 * j);
    CHECK(oracle::loglog_slope(grid.samples(), on.values) >= -j * 1.05);
    auto r = fit_order(grid.samples(), on.values);
    CHECK(r.slope == doctest::Approx(-j).epsilon(0.05));
  }
}

TEST_CASE("operator norm difference against pointwise comparison") {
  auto m = make_manifold("circle");
  auto a = SymbolNet::plain(plateau_symbol(1.0));
  auto b = SymbolNet::plain(plateau_symbol(2.0));
  for (double eps : {0.3, 0.05, 0.01}) {
    double want = 0.0;
    for (std::int64_t n = 0; n * n * eps < 25.0; ++n) {
      const double lam = static_cast<double>(n * n);
      want = std::max(want, std::abs(plateau_symbol(1.0).evaluate(eps * lam) - plateau_symbol(2.0).evaluate(eps * lam)));
    }
    CHECK(operator_norm_diff(a, b, eps, *m, 0) == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("property: operator norm bounds every input") {
  gen::Source src(33);
  auto m = make_manifold("circle");
  for (int rep = 0; rep < 200; ++rep) {
    const double eps = src.log_uniform(1e-4, 0.5);
    const double k = src.uniform(-4.0, 4.0);
    auto net = rep % 2 ? SymbolNet::plain(plateau_symbol(src.uniform(0.5, 2.0))) : SymbolNet::plain(heat_symbol());
    auto u = src.field(m, static_cast<std::size_t>(src.integer(3, 400)), src.uniform(-1.0, 2.0));
    const double lhs = sobolev_norm(apply_symbol(net, eps, u), 0);
    const double bound = operator_norm(net, eps, *m, k) * sobolev_norm(u, k);
    REQUIRE(lhs <= bound * (1.0 + 1e-12));
    REQUIRE(operator_norm(net, eps, *m, k) <= kernel_norm_bound(net, eps, *m, k) * (1.0 + 1e-12));
  }
}

TEST_CASE("perturbation by a negligible net") {
  auto m = make_manifold("circle");
  auto net = SymbolNet::plain(plateau_symbol(1.0));
  auto grid = EpsilonGrid::geometric(1e-1, 1e-6, 26);
  auto d = distribution_catalog(m, kDelta, required_cutoff(net, *m, grid));
  auto cn = embed(net, grid, d);
  auto same = perturb_with_negligible(cn, {.amplitude = 0.0});
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(same.frames[i].coeffs() == cn.frames[i].coeffs());
  auto pert = perturb_with_negligible(cn);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    a.push_back(sobolev_norm(cn.frames[i], 0));
    b.push_back(sobolev_norm(pert.frames[i], 0));
  }
  CHECK(std::abs(fit_order(grid.samples(), a).slope - fit_order(grid.samples(), b).slope) < 0.01);
  PerturbSchedule ps;
  CHECK(ps.exponent(1e-2) == 10);
  CHECK(ps.exponent(1e-6) == 40);
}

TEST_CASE("pushforward") {
  auto m = make_manifold("circle");
  auto grid = EpsilonGrid::geometric(0.5, 1e-3, 10);
  auto heat = SymbolNet::plain(heat_symbol());
  auto u = distribution_catalog(m, kCos, 5);
  auto cn = embed(heat, grid, u);
  auto id = pushforward(cn, LinearMap::identity());
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(id.frames[i].coeffs() == cn.frames[i].coeffs());
  auto half = pushforward(cn, LinearMap::multiplier(1.0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(half.frames[i][1].real() == doctest::Approx(std::sqrt(2.0) * cn.frames[i][1].real()).epsilon(1e-15));
  }
  // Diagonal operators commute: multiplier then symbol equals symbol then multiplier.
  gen::Source src(34);
  auto v = src.field(m, 61, 1.0);
  auto lhs = embed(heat, grid, apply_map(v, LinearMap::multiplier(3.0)));
  auto rhs = pushforward(embed(heat, grid, v), LinearMap::multiplier(3.0));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    REQUIRE(lhs.frames[i].cutoff() == rhs.frames[i].cutoff());
    for (std::size_t n = 0; n < lhs.frames[i].cutoff(); ++n) {
      CHECK(std::abs(lhs.frames[i][n] - rhs.frames[i][n]) <= 4.5e-16 * std::abs(rhs.frames[i][n]));
    }
  }
  auto pts = circle_points(7);
  auto vals = pushforward_points(cn, pts);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t q = 0; q < pts.size(); ++q) {
      CHECK(vals[i][q].real() == doctest::Approx(std::exp(-grid[i]) * std::cos(pts[q].x)).scale(1.0).epsilon(1e-14));
    }
  }
  auto rot = pushforward(cn, LinearMap::of_isometry(Isometry::reflection()));
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rot.frames[i][1] == cn.frames[i][1]);
}

TEST_CASE("frames csv") {
  auto m = make_manifold("circle");
  auto cn = embed(SymbolNet::plain(heat_symbol()), EpsilonGrid({0.5, 0.25}), distribution_catalog(m, kCos, 3));
  const std::string csv = net_csv(cn);
  CHECK(csv.rfind("epsilon,mode,re,im\n", 0) == 0);
  CHECK(csv == net_csv(cn));
}

}  // TEST_SUITE
