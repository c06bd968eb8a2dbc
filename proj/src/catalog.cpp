#include "spemb/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "spemb/error.hpp"
#include "spemb/util.hpp"

namespace spemb {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);
constexpr std::size_t kCutoffGrid = std::size_t{1} << 15;

bool at_pole(const Point& p) { return std::fabs(p.x) < 1e-12 || std::fabs(p.x - kPi) < 1e-12; }

void require_point(const SpectralManifold& man, const Point& p, const std::string& what) {
  if (!man.contains(p)) throw Error(ErrorCode::domain, what + " lies off the manifold");
}

// Smooth step: 1 for d <= inner, 0 for d >= outer.
double smooth_step(double d, double inner, double outer) {
  if (d <= inner) return 1.0;
  if (d >= outer) return 0.0;
  const double s = (d - inner) / (outer - inner);
  const double a = std::exp(-1.0 / (1.0 - s));
  const double b = std::exp(-1.0 / s);
  return a / (a + b);
}

double legendre_at_zero(std::size_t n) {
  if (n % 2 == 1) return 0.0;
  double p = 1.0;
  for (std::size_t m = 0; m < n; m += 2) p *= -static_cast<double>(m + 1) / static_cast<double>(m + 2);
  return p;
}

void need_cutoff(std::size_t index, std::size_t K, const std::string& name) {
  if (index >= K) throw Error(ErrorCode::resolution, "cutoff too small for " + name);
}

std::vector<Complex> circle_cutoff_coeffs(const ManifoldPtr& man, const DistributionSpec& spec, std::size_t K) {
  const double inner = spec.name == "bump" ? 0.0 : spec.inner;
  const double outer = spec.outer;
  const Point c = spec.center;
  const PointFunction f = [&](const Point& p) { return smooth_step(man->distance(p, c), inner, outer); };
  const std::size_t full = kCutoffGrid / 2 - 1;
  SpectralCoefficients a = analyze(man, f, full, kCutoffGrid);
  double top = 0.0;
  for (const auto& v : a.coeffs()) top = std::max(top, std::abs(v));
  std::vector<Complex> out(K);
  for (std::size_t n = 0; n < std::min(K, full); ++n) {
    if (std::abs(a.coeffs()[n]) >= kCutoffTruncation * top) out[n] = a.coeffs()[n];
  }
  return out;
}

}  // namespace

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"delta",     "delta_derivative", "sawtooth", "sobolev_noise", "poisson_smooth",
                                                 "trig_poly", "cutoff",           "bump",     "zero"};
  return names;
}

DistributionInfo describe_distribution(const SpectralManifold& man, const DistributionSpec& spec) {
  DistributionInfo info;
  const double m = man.dim();
  const std::string& n = spec.name;
  if (n == "delta" || n == "delta_derivative") {
    info.sobolev = n == "delta" ? -m / 2.0 : -m / 2.0 - 1.0;
    info.singular_points = {spec.x0};
    info.compact_support = true;
    info.support_center = spec.x0;
  } else if (n == "sawtooth") {
    info.sobolev = 0.5;
    info.singular_points = {man.kind() == ManifoldKind::sphere_zonal ? Point{kPi / 2.0, 0.0} : Point{0.0, 0.0}};
  } else if (n == "sobolev_noise") {
    info.sobolev = spec.s;
    info.singular_everywhere = true;
  } else if (n == "poisson_smooth") {
    info.smooth = true;
  } else if (n == "trig_poly" || n == "zero") {
    info.smooth = true;
    info.bandlimited = true;
  } else if (n == "cutoff" || n == "bump") {
    info.smooth = true;
    info.compact_support = true;
    info.support_center = spec.center;
    info.support_radius = spec.outer;
  } else {
    throw Error(ErrorCode::config, "unknown catalog entry '" + n + "'");
  }
  return info;
}

SpectralCoefficients distribution_catalog(const ManifoldPtr& man, const DistributionSpec& spec, std::size_t K) {
  const DistributionInfo info = describe_distribution(*man, spec);
  const std::optional<double> sob = info.smooth ? std::optional<double>(std::numeric_limits<double>::infinity()) : info.sobolev;
  const ManifoldKind kind = man->kind();
  const std::string& name = spec.name;
  std::vector<Complex> a(K);
  if (K == 0) return SpectralCoefficients(man, std::move(a), sob);
  const auto t = man->modes(K);

  if (name == "delta" || name == "delta_derivative") {
    require_point(*man, spec.x0, name);
    const bool deriv = name == "delta_derivative";
    if (kind == ManifoldKind::sphere_zonal) {
      if (deriv) throw Error(ErrorCode::unsupported, "delta_derivative is not available on the zonal sphere");
      if (!at_pole(spec.x0)) throw Error(ErrorCode::domain, "zonal delta must sit at a pole");
      std::vector<double> phi(K);
      zonal_values(std::cos(spec.x0.x), K, phi.data());
      for (std::size_t l = 0; l < K; ++l) a[l] = phi[l];
    } else {
      const double c1 = kind == ManifoldKind::circle ? 1.0 / std::sqrt(kPi) : 1.0 / (kPi * kSqrt2);
      for (std::size_t n = 0; n < K; ++n) {
        if (t->kind[n] == ModeKind::constant) {
          a[n] = deriv ? 0.0 : man->eigenfunction(0, spec.x0);
          continue;
        }
        const double k1 = t->k1[n];
        const double ph = k1 * spec.x0.x + (kind == ManifoldKind::torus2 ? t->k2[n] * spec.x0.y : 0.0);
        const bool cosine = t->kind[n] == ModeKind::cosine;
        if (!deriv) {
          a[n] = (cosine ? std::cos(ph) : std::sin(ph)) * c1;
        } else {
          // <delta', phi> = -phi'(x0), derivative along the first coordinate
          a[n] = (cosine ? k1 * std::sin(ph) : -k1 * std::cos(ph)) * c1;
        }
      }
    }
  } else if (name == "sawtooth") {
    if (kind == ManifoldKind::sphere_zonal) {
      // Indicator of the upper hemisphere.
      for (std::size_t l = 0; l < K; ++l) {
        const double integral =
            l == 0 ? 1.0 : (legendre_at_zero(l - 1) - legendre_at_zero(l + 1)) / (2.0 * static_cast<double>(l) + 1.0);
        a[l] = 2.0 * kPi * std::sqrt((2.0 * static_cast<double>(l) + 1.0) / (4.0 * kPi)) * integral;
      }
    } else {
      // (pi - x)/2 on (0, 2 pi) = sum sin(kx)/k
      const double scale = kind == ManifoldKind::circle ? std::sqrt(kPi) : kPi * kSqrt2;
      for (std::size_t n = 0; n < K; ++n) {
        if (t->kind[n] == ModeKind::sine && t->k2[n] == 0) a[n] = scale / t->k1[n];
      }
    }
  } else if (name == "sobolev_noise") {
    std::mt19937_64 rng(spec.seed);
    const double expo = -spec.s / 2.0 - man->dim() / 4.0;
    if (kind == ManifoldKind::sphere_zonal) {
      for (std::size_t l = 0; l < K; ++l) {
        const double mag = std::pow(1.0 + t->lambda[l], expo);
        a[l] = (rng() >> 63) ? -mag : mag;
      }
    } else {
      const double mag0 = 1.0;
      a[0] = (rng() >> 63) ? -mag0 : mag0;
      for (std::size_t n = 1; n < K; ++n) {
        if (t->kind[n] != ModeKind::cosine) continue;
        const double mag = std::pow(1.0 + t->lambda[n], expo);
        const double phase = 2.0 * kPi * unit_double(rng());
        a[n] = kSqrt2 * mag * std::cos(phase);
        if (n + 1 < K) a[n + 1] = kSqrt2 * mag * std::sin(phase);
      }
    }
  } else if (name == "poisson_smooth") {
    if (!(spec.r > 0.0 && spec.r < 1.0)) throw Error(ErrorCode::domain, "poisson_smooth needs 0 < r < 1");
    const double lr = std::log(spec.r);
    const double cutoff = std::log(kPoissonTruncation);
    for (std::size_t n = 0; n < K; ++n) {
      double expo = 0.0;
      double scale = 0.0;
      switch (kind) {
        case ManifoldKind::circle:
          if (t->kind[n] == ModeKind::sine) continue;
          expo = t->k1[n];
          scale = n == 0 ? std::sqrt(2.0 * kPi) : 2.0 * std::sqrt(kPi);
          break;
        case ManifoldKind::torus2:
          if (t->kind[n] == ModeKind::sine) continue;
          expo = std::abs(t->k1[n]) + std::abs(t->k2[n]);
          scale = n == 0 ? 2.0 * kPi : kSqrt2 * 2.0 * kPi;
          break;
        case ManifoldKind::sphere_zonal:
          expo = static_cast<double>(n);
          scale = std::sqrt(4.0 * kPi * (2.0 * static_cast<double>(n) + 1.0));
          break;
      }
      if (expo * lr < cutoff) continue;
      a[n] = scale * std::exp(expo * lr);
    }
  } else if (name == "trig_poly") {
    for (const auto& term : spec.terms) {
      if (term.kind != "cos" && term.kind != "sin") throw Error(ErrorCode::config, "trig_poly term kind must be cos or sin");
      const bool cosine = term.kind == "cos";
      if (kind == ManifoldKind::sphere_zonal) {
        if (term.k1 < 0) throw Error(ErrorCode::config, "trig_poly degree must be nonnegative");
        const auto l = static_cast<std::size_t>(term.k1);
        need_cutoff(l, K, name);
        a[l] += term.amp * std::sqrt(4.0 * kPi / (2.0 * term.k1 + 1.0));
        continue;
      }
      std::int32_t q1 = term.k1;
      std::int32_t q2 = kind == ManifoldKind::torus2 ? term.k2 : 0;
      double sign = 1.0;
      if (q1 < 0 || (q1 == 0 && q2 < 0)) {
        q1 = -q1;
        q2 = -q2;
        sign = cosine ? 1.0 : -1.0;
      }
      if (q1 == 0 && q2 == 0) {
        if (cosine) a[0] += term.amp * (kind == ManifoldKind::circle ? std::sqrt(2.0 * kPi) : 2.0 * kPi);
        continue;
      }
      const double scale = kind == ManifoldKind::circle ? std::sqrt(kPi) : kPi * kSqrt2;
      std::int64_t idx;
      if (kind == ManifoldKind::circle) {
        idx = 2 * static_cast<std::int64_t>(q1) - 1;
      } else {
        const double lam = static_cast<double>(q1) * q1 + static_cast<double>(q2) * q2;
        if (man->modes_below(lam + 0.5) > K) throw Error(ErrorCode::resolution, "cutoff too small for trig_poly");
        idx = t->find(q1, q2);
      }
      const auto target = static_cast<std::size_t>(idx) + (cosine ? 0 : 1);
      need_cutoff(target, K, name);
      a[target] += sign * term.amp * scale;
    }
  } else if (name == "cutoff" || name == "bump") {
    if (kind != ManifoldKind::circle) throw Error(ErrorCode::unsupported, name + " is available on the circle only");
    const double inner = name == "bump" ? 0.0 : spec.inner;
    if (!(spec.outer > inner) || inner < 0.0 || spec.outer > kPi) {
      throw Error(ErrorCode::config, name + " needs 0 <= inner < outer <= pi");
    }
    a = circle_cutoff_coeffs(man, spec, K);
  } else if (name == "zero") {
    // all zero
  }
  return SpectralCoefficients(man, std::move(a), sob);
}

std::optional<PointFunction> catalog_function(const SpectralManifold& man, const DistributionSpec& spec) {
  const ManifoldKind kind = man.kind();
  const std::string& name = spec.name;
  if (name == "sawtooth") {
    if (kind == ManifoldKind::sphere_zonal) {
      return PointFunction([](const Point& p) {
        const double z = std::cos(p.x);
        return z > 0.0 ? 1.0 : (z < 0.0 ? 0.0 : 0.5);
      });
    }
    return PointFunction([](const Point& p) {
      const double x = p.x - 2.0 * kPi * std::floor(p.x / (2.0 * kPi));
      return x == 0.0 ? 0.0 : (kPi - x) / 2.0;
    });
  }
  if (name == "poisson_smooth") {
    const double r = spec.r;
    if (kind == ManifoldKind::sphere_zonal) {
      return PointFunction([r](const Point& p) {
        const double z = std::cos(p.x);
        return (1.0 - r * r) / std::pow(1.0 - 2.0 * r * z + r * r, 1.5);
      });
    }
    auto kernel = [r](double x) { return (1.0 - r * r) / (1.0 - 2.0 * r * std::cos(x) + r * r); };
    if (kind == ManifoldKind::circle) return PointFunction([kernel](const Point& p) { return kernel(p.x); });
    return PointFunction([kernel](const Point& p) { return kernel(p.x) * kernel(p.y); });
  }
  if (name == "trig_poly") {
    const auto terms = spec.terms;
    if (kind == ManifoldKind::sphere_zonal) {
      return PointFunction([terms](const Point& p) {
        std::size_t L = 0;
        for (const auto& t : terms) L = std::max<std::size_t>(L, static_cast<std::size_t>(t.k1) + 1);
        std::vector<double> phi(L);
        zonal_values(std::cos(p.x), L, phi.data());
        double s = 0.0;
        for (const auto& t : terms) s += t.amp * phi[static_cast<std::size_t>(t.k1)] * std::sqrt(4.0 * kPi / (2.0 * t.k1 + 1.0));
        return s;
      });
    }
    const bool torus = kind == ManifoldKind::torus2;
    return PointFunction([terms, torus](const Point& p) {
      double s = 0.0;
      for (const auto& t : terms) {
        const double ph = t.k1 * p.x + (torus ? t.k2 * p.y : 0.0);
        s += t.amp * (t.kind == "cos" ? std::cos(ph) : std::sin(ph));
      }
      return s;
    });
  }
  if (name == "zero") return PointFunction([](const Point&) { return 0.0; });
  if ((name == "cutoff" || name == "bump") && kind == ManifoldKind::circle) {
    const double inner = name == "bump" ? 0.0 : spec.inner;
    const double outer = spec.outer;
    const Point c = spec.center;
    const SpectralManifold* mp = &man;
    return PointFunction([=](const Point& p) { return smooth_step(mp->distance(p, c), inner, outer); });
  }
  return std::nullopt;
}

}  // namespace spemb
