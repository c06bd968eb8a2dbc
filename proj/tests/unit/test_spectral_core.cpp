#include <cmath>
#include <vector>

#include "doctest.h"
#include "spemb/catalog.hpp"
#include "spemb/coefficients.hpp"
#include "spemb/error.hpp"
#include "spemb/manifold.hpp"
#include "spemb/quadrature.hpp"
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

DistributionSpec trig(std::int32_t k, const char* kind, double amp = 1.0) {
  return {.id = "t", .name = "trig_poly", .terms = {{k, 0, kind, amp}}};
}

}  // namespace

TEST_SUITE("spectral_core") {

TEST_CASE("circle eigenvalues") {
  auto m = make_manifold("circle");
  const std::vector<double> want{0, 1, 1, 4, 4};
  for (std::size_t n = 0; n < 5; ++n) CHECK(m->eigenvalue(n) == want[n]);
  const auto brute = oracle::circle_eigenvalues(501);
  for (std::size_t n = 0; n < brute.size(); ++n) REQUIRE(m->eigenvalue(n) == brute[n]);
}

TEST_CASE("torus eigenvalues with multiplicity") {
  auto m = make_manifold("torus2");
  for (std::size_t n = 0; n < 5; ++n) CHECK(m->eigenvalue(n) == (n == 0 ? 0.0 : 1.0));
  const auto brute = oracle::torus_eigenvalues(2000);
  for (std::size_t n = 0; n < brute.size(); ++n) REQUIRE(m->eigenvalue(n) == brute[n]);
}

TEST_CASE("zonal sphere eigenvalues") {
  auto m = make_manifold("sphere-zonal");
  CHECK(m->eigenvalue(3) == 12.0);
  for (std::size_t l = 0; l < 50; ++l) CHECK(m->eigenvalue(l) == static_cast<double>(l * (l + 1)));
}

TEST_CASE("unknown manifold is a config error") {
  CHECK(code_of([] { make_manifold("klein"); }) == ErrorCode::config);
}

TEST_CASE("weyl counts") {
  auto c = make_manifold("circle");
  auto t = make_manifold("torus2");
  auto s = make_manifold("sphere-zonal");
  CHECK(c->weyl_count(100) == 19);
  CHECK(c->weyl_count(0) == 0);
  CHECK(t->weyl_count(2) == 5);
  for (double lam : {0.5, 1.0, 1.5, 7.0, 50.0, 99.9, 1000.0, 12345.6}) {
    CHECK(c->weyl_count(lam) == oracle::count_circle(lam));
    CHECK(t->weyl_count(lam) == oracle::count_torus(lam));
    CHECK(s->weyl_count(lam) == oracle::count_sphere(lam));
  }
}

TEST_CASE("weyl leading terms") {
  auto c = make_manifold("circle");
  auto t = make_manifold("torus2");
  auto s = make_manifold("sphere-zonal");
  CHECK(c->weyl_asymptotic(100) == doctest::Approx(20.0).epsilon(1e-14));
  CHECK(c->weyl_asymptotic(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(t->weyl_asymptotic(1e4) == doctest::Approx(kPi * 1e4).epsilon(1e-14));
  CHECK(s->weyl_asymptotic(100) == doctest::Approx(100.0).epsilon(1e-14));
}

TEST_CASE("modes_below matches the mode table") {
  for (const char* name : {"circle", "torus2", "sphere-zonal"}) {
    auto m = make_manifold(name);
    for (double lam : {0.5, 1.0, 2.0, 10.0, 30.5, 100.0}) {
      const std::size_t n = m->modes_below(lam);
      if (n > 0) CHECK(m->eigenvalue(n - 1) < lam);
      CHECK(m->eigenvalue(n) >= lam);
    }
  }
}

TEST_CASE("analysis of trigonometric functions") {
  auto m = make_manifold("circle");
  auto c = analyze(m, [](const Point& p) { return std::cos(p.x); }, 5);
  CHECK(c[1].real() == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  for (std::size_t n : {0, 2, 3, 4}) CHECK(std::abs(c[n]) < 1e-14);
  auto one = analyze(m, [](const Point&) { return 1.0; }, 5);
  CHECK(one[0].real() == doctest::Approx(std::sqrt(2.0 * kPi)).epsilon(1e-13));
  auto s3 = analyze(m, [](const Point& p) { return std::sin(3.0 * p.x); }, 13);
  CHECK(m->eigenvalue(6) == 9.0);
  CHECK(s3[6].real() == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
}

TEST_CASE("analysis agrees with trapezoid inner products") {
  auto m = make_manifold("circle");
  auto f = [](double x) { return std::exp(std::cos(x)) * std::sin(2.0 * x + 0.3); };
  auto c = analyze(m, [&](const Point& p) { return f(p.x); }, 41, 512);
  for (std::size_t n = 0; n < 41; ++n) {
    const double ref = oracle::circle_inner(f, [&](double x) { return m->eigenfunction(n, {x, 0}); });
    CHECK(c[n].real() == doctest::Approx(ref).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("sobolev norms of cos") {
  auto m = make_manifold("circle");
  auto c = distribution_catalog(m, trig(1, "cos"), 5);
  CHECK(sobolev_norm(c, 0) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-14));
  CHECK(sobolev_norm(c, 1) == doctest::Approx(std::sqrt(2.0 * kPi)).epsilon(1e-14));
  CHECK(sobolev_norm(distribution_catalog(m, {.id = "z", .name = "zero"}, 9), 3) == 0.0);
}

TEST_CASE("sup seminorms") {
  auto m = make_manifold("circle");
  auto c = distribution_catalog(m, trig(1, "cos"), 5);
  CHECK(sup_seminorm(c, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sup_seminorm(c, 1) == doctest::Approx(1.0).epsilon(1e-12));
  auto s3 = distribution_catalog(m, trig(3, "sin"), 9);
  CHECK(sup_seminorm(s3, 2) == doctest::Approx(9.0).epsilon(1e-12));
  auto s = make_manifold("sphere-zonal");
  auto z = distribution_catalog(s, trig(2, "cos"), 5);
  CHECK(code_of([&] { sup_seminorm(z, 1); }) == ErrorCode::unsupported);
  CHECK(sup_seminorm(z, 0) > 0.0);
}

TEST_CASE("orthonormality by independent quadrature") {
  auto c = make_manifold("circle");
  for (std::size_t a = 0; a < 25; ++a) {
    for (std::size_t b = 0; b < 25; ++b) {
      const double ip = oracle::circle_inner([&](double x) { return c->eigenfunction(a, {x, 0}); },
                                             [&](double x) { return c->eigenfunction(b, {x, 0}); }, 256);
      REQUIRE(ip == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
    }
  }
  auto t = make_manifold("torus2");
  const std::size_t G = 48;
  const std::size_t K = 60;
  std::vector<double> vals(K * G * G);
  for (std::size_t n = 0; n < K; ++n)
    for (std::size_t i = 0; i < G; ++i)
      for (std::size_t j = 0; j < G; ++j)
        vals[(n * G + i) * G + j] = t->eigenfunction(n, {2 * kPi * i / G, 2 * kPi * j / G});
  const double w = 4 * kPi * kPi / (G * G);
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t b = 0; b < K; ++b) {
      double ip = 0.0;
      for (std::size_t q = 0; q < G * G; ++q) ip += vals[a * G * G + q] * vals[b * G * G + q];
      REQUIRE(ip * w == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
    }
  }
  // Sphere: composite Simpson in the colatitude with the sin weight.
  auto s = make_manifold("sphere-zonal");
  const int N = 4000;
  for (std::size_t a = 0; a < 12; ++a) {
    for (std::size_t b = 0; b < 12; ++b) {
      double ip = 0.0;
      for (int i = 0; i <= N; ++i) {
        const double th = kPi * i / N;
        const double wt = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        ip += wt * s->eigenfunction(a, {th, 0}) * s->eigenfunction(b, {th, 0}) * std::sin(th);
      }
      ip *= 2 * kPi * (kPi / N) / 3.0;
      REQUIRE(ip == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("property: parseval and round trip") {
  gen::Source src(11);
  for (const char* name : {"circle", "torus2", "sphere-zonal"}) {
    auto m = make_manifold(name);
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t K = static_cast<std::size_t>(src.integer(5, 60));
      auto u = src.field(m, K, src.uniform(0.0, 2.0));
      auto back = analyze(m, [&](const Point& p) { return synthesize(u, {p})[0].real(); }, K);
      double err = 0.0;
      for (std::size_t n = 0; n < K; ++n) err = std::max(err, std::abs(back[n] - u[n]));
      CHECK(err < 1e-12);
      // Parseval: L2 norm equals the coefficient norm; check against an
      // oversampled grid integral on the flat manifolds.
      if (m->kind() == ManifoldKind::circle) {
        const double l2 = std::sqrt(oracle::circle_inner([&](double x) { return synthesize(u, {{x, 0}})[0].real(); },
                                                         [&](double x) { return synthesize(u, {{x, 0}})[0].real(); },
                                                         256));
        CHECK(l2 == doctest::Approx(sobolev_norm(u, 0)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("property: grid synthesis agrees with pointwise synthesis") {
  gen::Source src(12);
  auto m = make_manifold("circle");
  for (int rep = 0; rep < 5; ++rep) {
    auto u = src.field(m, 31, 1.0);
    const std::size_t G = 64;
    auto g = synthesize_grid(u, G);
    for (std::size_t i = 0; i < G; i += 7) {
      CHECK(std::abs(g[i] - synthesize(u, {{2 * kPi * i / G, 0}})[0]) < 1e-12);
    }
  }
}

TEST_CASE("circle products are exact") {
  auto m = make_manifold("circle");
  auto c = distribution_catalog(m, trig(1, "cos"), 5);
  auto sq = multiply(c, c);
  // cos^2 = 1/2 + cos(2x)/2
  CHECK(sq[0].real() == doctest::Approx(0.5 * std::sqrt(2 * kPi)).epsilon(1e-14));
  CHECK(sq[3].real() == doctest::Approx(0.5 * std::sqrt(kPi)).epsilon(1e-14));
}

TEST_CASE("property: isometries preserve norms and eigenvalues") {
  gen::Source src(13);
  for (const char* name : {"circle", "torus2", "sphere-zonal"}) {
    auto m = make_manifold(name);
    for (const auto& g : m->isometry_group()) {
      auto u = src.field(m, 40, 1.0);
      auto v = apply_isometry(u, g);
      for (double j : {0.0, 1.0, 2.5}) CHECK(sobolev_norm(v, j) == doctest::Approx(sobolev_norm(u, j)).epsilon(1e-12));
      // pullback agrees with evaluation at the mapped point
      for (int q = 0; q < 5; ++q) {
        Point p{src.uniform(0.1, 3.0), src.uniform(0.1, 3.0)};
        if (m->kind() == ManifoldKind::circle) p.y = 0.0;
        const double lhs = synthesize(v, {p})[0].real();
        const double rhs = synthesize(u, {g.apply(p)})[0].real();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("rotating delta moves its support") {
  auto m = make_manifold("circle");
  DistributionSpec d0{.id = "d", .name = "delta"};
  DistributionSpec d1{.id = "d", .name = "delta", .x0 = {kPi / 2, 0}};
  auto moved = apply_isometry(distribution_catalog(m, d0, 41), Isometry::rotation(-kPi / 2));
  auto direct = distribution_catalog(m, d1, 41);
  for (std::size_t n = 0; n < 41; ++n) CHECK(std::abs(moved[n] - direct[n]) < 1e-12);
}

TEST_CASE("unsupported isometries are rejected") {
  auto s = make_manifold("sphere-zonal");
  auto u = distribution_catalog(s, trig(1, "cos"), 4);
  CHECK(code_of([&] { apply_isometry(u, Isometry::rotation(0.3)); }) == ErrorCode::unsupported);
  auto c = make_manifold("circle");
  auto v = distribution_catalog(c, trig(1, "cos"), 4);
  CHECK(code_of([&] { apply_isometry(v, Isometry::axis_swap()); }) == ErrorCode::unsupported);
}

TEST_CASE("catalog coefficients match their functions") {
  auto m = make_manifold("circle");
  DistributionSpec saw{.id = "saw", .name = "sawtooth"};
  auto c = distribution_catalog(m, saw, 21);
  for (std::size_t k = 1; k <= 10; ++k) {
    // <(pi - x)/2, sin(kx)/sqrt(pi)> = sqrt(pi)/k
    CHECK(c[2 * k].real() == doctest::Approx(std::sqrt(kPi) / k).epsilon(1e-14));
    CHECK(std::abs(c[2 * k - 1]) == 0.0);
  }
  DistributionSpec ps{.id = "p", .name = "poisson_smooth", .r = 0.5};
  auto p = distribution_catalog(m, ps, 41);
  auto fn = *catalog_function(*m, ps);
  for (std::size_t n = 0; n < 41; ++n) {
    const double ref = oracle::circle_inner([&](double x) { return fn({x, 0}); },
                                            [&](double x) { return m->eigenfunction(n, {x, 0}); }, 512);
    CHECK(p[n].real() == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("sobolev noise has the declared regularity") {
  auto m = make_manifold("circle");
  DistributionSpec nz{.id = "n", .name = "sobolev_noise", .s = 0.5, .seed = 7};
  auto a = distribution_catalog(m, nz, 4001);
  auto b = distribution_catalog(m, nz, 4001);
  for (std::size_t n = 0; n < 4001; ++n) REQUIRE(a[n] == b[n]);
  // Each frequency pair carries energy 2 (1 + k^2)^{-s - 1/2}, so H^{s'}
  // partial sums converge exactly when s' < s.
  for (std::size_t k = 1; k <= 2000; ++k) {
    const double e = std::norm(a[2 * k - 1]) + std::norm(a[2 * k]);
    REQUIRE(e == doctest::Approx(2.0 * std::pow(1.0 + k * k, -1.0)).epsilon(1e-12));
  }
  CHECK(std::abs(a[0]) == 1.0);
  DistributionSpec other = nz;
  other.seed = 8;
  CHECK(distribution_catalog(m, other, 11)[1] != a[1]);
}

TEST_CASE("catalog domain errors") {
  auto m = make_manifold("circle");
  CHECK(code_of([&] { distribution_catalog(m, {.id = "x", .name = "nope"}, 5); }) == ErrorCode::config);
  CHECK(code_of([&] { distribution_catalog(m, {.id = "p", .name = "poisson_smooth", .r = 1.5}, 5); }) ==
        ErrorCode::domain);
  auto s = make_manifold("sphere-zonal");
  CHECK(code_of([&] { distribution_catalog(s, {.id = "d", .name = "delta_derivative"}, 5); }) ==
        ErrorCode::unsupported);
  CHECK(code_of([&] { distribution_catalog(s, {.id = "d", .name = "delta", .x0 = {1.0, 0}}, 5); }) ==
        ErrorCode::domain);
}

TEST_CASE("gauss legendre integrates polynomials exactly") {
  auto gl = gauss_legendre(10);
  double sum = 0.0, x18 = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    sum += gl.weights[i];
    x18 += gl.weights[i] * std::pow(gl.nodes[i], 18);
  }
  CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x18 == doctest::Approx(2.0 / 19.0).epsilon(1e-13));
}

}  // TEST_SUITE
