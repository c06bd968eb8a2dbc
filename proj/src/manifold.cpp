#include "spemb/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "spemb/error.hpp"

namespace spemb {

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<ModeTable> circle_table(std::size_t count) {
  auto t = std::make_shared<ModeTable>();
  t->lambda.resize(count);
  t->k1.resize(count);
  t->k2.assign(count, 0);
  t->kind.resize(count);
  for (std::size_t n = 0; n < count; ++n) {
    const auto k = static_cast<std::int32_t>((n + 1) / 2);
    t->k1[n] = k;
    t->lambda[n] = static_cast<double>(k) * k;
    t->kind[n] = n == 0 ? ModeKind::constant : (n % 2 == 1 ? ModeKind::cosine : ModeKind::sine);
  }
  return t;
}

std::shared_ptr<ModeTable> sphere_table(std::size_t count) {
  auto t = std::make_shared<ModeTable>();
  t->lambda.resize(count);
  t->k1.resize(count);
  t->k2.assign(count, 0);
  t->kind.assign(count, ModeKind::zonal);
  for (std::size_t l = 0; l < count; ++l) {
    t->k1[l] = static_cast<std::int32_t>(l);
    t->lambda[l] = static_cast<double>(l) * static_cast<double>(l + 1);
  }
  return t;
}

struct LatticeEntry {
  std::int64_t norm;
  std::int32_t a;
  std::int32_t b;
  ModeKind kind;
};

std::shared_ptr<ModeTable> torus_table(std::size_t count, const SpectralManifold& man) {
  // Smallest integer bound whose closed disc holds `count` lattice points.
  auto bound = static_cast<std::int64_t>(static_cast<double>(count) / kPi + 2.0 * std::sqrt(static_cast<double>(count)) + 4.0);
  while (man.weyl_count(static_cast<double>(bound) + 0.5) < static_cast<std::int64_t>(count)) bound *= 2;
  const auto radius = static_cast<std::int32_t>(isqrt_below(static_cast<double>(bound) + 0.5));

  std::vector<LatticeEntry> entries;
  entries.reserve(static_cast<std::size_t>(man.weyl_count(static_cast<double>(bound) + 0.5)));
  entries.push_back({0, 0, 0, ModeKind::constant});
  for (std::int32_t a = 0; a <= radius; ++a) {
    const std::int64_t rest = bound - static_cast<std::int64_t>(a) * a;
    const auto bmax = static_cast<std::int32_t>(isqrt_below(static_cast<double>(rest) + 0.5));
    for (std::int32_t b = a == 0 ? 1 : -bmax; b <= bmax; ++b) {
      const std::int64_t nrm = static_cast<std::int64_t>(a) * a + static_cast<std::int64_t>(b) * b;
      entries.push_back({nrm, a, b, ModeKind::cosine});
      entries.push_back({nrm, a, b, ModeKind::sine});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const LatticeEntry& l, const LatticeEntry& r) {
    if (l.norm != r.norm) return l.norm < r.norm;
    if (l.a != r.a) return l.a < r.a;
    if (l.b != r.b) return l.b < r.b;
    return static_cast<int>(l.kind) < static_cast<int>(r.kind);
  });

  auto t = std::make_shared<ModeTable>();
  const std::size_t n = entries.size();
  t->lambda.resize(n);
  t->k1.resize(n);
  t->k2.resize(n);
  t->kind.resize(n);
  t->radius = radius;
  const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
  t->lookup.assign(side * side, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = entries[i];
    t->lambda[i] = static_cast<double>(e.norm);
    t->k1[i] = e.a;
    t->k2[i] = e.b;
    t->kind[i] = e.kind;
    if (e.kind != ModeKind::sine) {
      t->lookup[static_cast<std::size_t>(e.a + radius) * side + static_cast<std::size_t>(e.b + radius)] =
          static_cast<std::int32_t>(i);
    }
  }
  return t;
}

}  // namespace

std::int64_t ModeTable::find(std::int32_t a, std::int32_t b) const noexcept {
  if (lookup.empty() || a < -radius || a > radius || b < -radius || b > radius) return -1;
  const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
  return lookup[static_cast<std::size_t>(a + radius) * side + static_cast<std::size_t>(b + radius)];
}

std::int64_t isqrt_below(double v) {
  if (!(v > 0.0)) return -1;
  auto m = static_cast<std::int64_t>(std::sqrt(v));
  while (m > 0 && static_cast<double>(m) * static_cast<double>(m) >= v) --m;
  while (static_cast<double>(m + 1) * static_cast<double>(m + 1) < v) ++m;
  return m;
}

void zonal_values(double z, std::size_t count, double* out) {
  double pm = 0.0;
  double p = 1.0;
  for (std::size_t l = 0; l < count; ++l) {
    out[l] = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi)) * p;
    const double next = ((2.0 * l + 1.0) * z * p - static_cast<double>(l) * pm) / (static_cast<double>(l) + 1.0);
    pm = p;
    p = next;
  }
}

namespace {
std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}
}  // namespace

Isometry Isometry::identity() { return {}; }

Isometry Isometry::rotation(double angle) {
  Isometry g;
  g.name = "rotation(" + short_number(angle) + ")";
  g.shift = {angle, 0.0};
  return g;
}

Isometry Isometry::reflection() {
  Isometry g;
  g.name = "reflection";
  g.r[0][0] = -1;
  return g;
}

Isometry Isometry::translation(double a, double b) {
  Isometry g;
  g.name = "translation(" + short_number(a) + "," + short_number(b) + ")";
  g.shift = {a, b};
  return g;
}

Isometry Isometry::axis_swap() {
  Isometry g;
  g.name = "axis_swap";
  g.r[0][0] = 0;
  g.r[0][1] = 1;
  g.r[1][0] = 1;
  g.r[1][1] = 0;
  return g;
}

Isometry Isometry::reflect_x() {
  Isometry g;
  g.name = "reflect_x";
  g.r[0][0] = -1;
  return g;
}

Isometry Isometry::polar_rotation(double angle) {
  // Acts trivially on zonal functions; the angle is kept for reporting only.
  Isometry g;
  g.name = "polar_rotation(" + short_number(angle) + ")";
  g.polar = true;
  g.shift = {0.0, angle};
  return g;
}

Isometry Isometry::polar_reflection() {
  Isometry g;
  g.name = "polar_reflection";
  g.zonal_reflection = true;
  return g;
}

Point Isometry::apply(const Point& p) const {
  if (zonal_reflection) return {kPi - p.x, p.y};
  if (polar) return p;
  return {r[0][0] * p.x + r[0][1] * p.y + shift.x, r[1][0] * p.x + r[1][1] * p.y + shift.y};
}

SpectralManifold::SpectralManifold(ManifoldKind kind) : kind_(kind) {
  switch (kind) {
    case ManifoldKind::circle:
      name_ = "circle";
      dim_ = 1;
      volume_ = 2.0 * kPi;
      break;
    case ManifoldKind::torus2:
      name_ = "torus2";
      dim_ = 2;
      volume_ = 4.0 * kPi * kPi;
      break;
    case ManifoldKind::sphere_zonal:
      name_ = "sphere-zonal";
      dim_ = 2;
      volume_ = 4.0 * kPi;
      break;
  }
}

std::shared_ptr<const ModeTable> SpectralManifold::modes(std::size_t count) const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (table_ && table_->size() >= count) return table_;
  std::size_t want = std::max<std::size_t>(count, 64);
  if (table_) want = std::max(want, table_->size() + table_->size() / 2);
  switch (kind_) {
    case ManifoldKind::circle: table_ = circle_table(want); break;
    case ManifoldKind::sphere_zonal: table_ = sphere_table(want); break;
    case ManifoldKind::torus2: table_ = torus_table(want, *this); break;
  }
  return table_;
}

double SpectralManifold::eigenvalue(std::size_t n) const {
  switch (kind_) {
    case ManifoldKind::circle: {
      const double k = static_cast<double>((n + 1) / 2);
      return k * k;
    }
    case ManifoldKind::sphere_zonal:
      return static_cast<double>(n) * static_cast<double>(n + 1);
    case ManifoldKind::torus2:
      break;
  }
  return modes(n + 1)->lambda[n];
}

double SpectralManifold::eigenfunction(std::size_t n, const Point& p) const {
  switch (kind_) {
    case ManifoldKind::circle: {
      if (n == 0) return 1.0 / std::sqrt(2.0 * kPi);
      const double k = static_cast<double>((n + 1) / 2);
      return (n % 2 == 1 ? std::cos(k * p.x) : std::sin(k * p.x)) / std::sqrt(kPi);
    }
    case ManifoldKind::sphere_zonal: {
      std::vector<double> v(n + 1);
      zonal_values(std::cos(p.x), n + 1, v.data());
      return v[n];
    }
    case ManifoldKind::torus2: {
      const auto t = modes(n + 1);
      if (t->kind[n] == ModeKind::constant) return 1.0 / (2.0 * kPi);
      const double ph = t->k1[n] * p.x + t->k2[n] * p.y;
      return (t->kind[n] == ModeKind::cosine ? std::cos(ph) : std::sin(ph)) / (kPi * std::sqrt(2.0));
    }
  }
  return 0.0;
}

double SpectralManifold::eigenfunction_sup(std::size_t n) const {
  switch (kind_) {
    case ManifoldKind::circle:
      return n == 0 ? 1.0 / std::sqrt(2.0 * kPi) : 1.0 / std::sqrt(kPi);
    case ManifoldKind::torus2:
      return n == 0 ? 1.0 / (2.0 * kPi) : 1.0 / (kPi * std::sqrt(2.0));
    case ManifoldKind::sphere_zonal:
      return std::sqrt((2.0 * static_cast<double>(n) + 1.0) / (4.0 * kPi));
  }
  return 0.0;
}

std::size_t SpectralManifold::modes_below(double lam) const {
  if (!(lam > 0.0)) return 0;
  switch (kind_) {
    case ManifoldKind::circle:
    case ManifoldKind::torus2:
      return static_cast<std::size_t>(weyl_count(lam));
    case ManifoldKind::sphere_zonal: {
      auto l = static_cast<std::int64_t>((-1.0 + std::sqrt(1.0 + 4.0 * lam)) / 2.0);
      while (l > 0 && static_cast<double>(l) * static_cast<double>(l + 1) >= lam) --l;
      while (static_cast<double>(l + 1) * static_cast<double>(l + 2) < lam) ++l;
      return static_cast<std::size_t>(l + 1);
    }
  }
  return 0;
}

std::int64_t SpectralManifold::weyl_count(double lam) const {
  if (!(lam > 0.0)) return 0;
  switch (kind_) {
    case ManifoldKind::circle:
      return 2 * isqrt_below(lam) + 1;
    case ManifoldKind::torus2: {
      const std::int64_t r = isqrt_below(lam);
      std::int64_t total = 0;
      for (std::int64_t a = -r; a <= r; ++a) {
        total += 2 * isqrt_below(lam - static_cast<double>(a) * static_cast<double>(a)) + 1;
      }
      return total;
    }
    case ManifoldKind::sphere_zonal: {
      const auto l = static_cast<std::int64_t>(modes_below(lam));
      return l * l;
    }
  }
  return 0;
}

double SpectralManifold::weyl_asymptotic(double lam) const {
  const double m = dim_;
  return volume_ / (std::pow(4.0 * kPi, m / 2.0) * std::tgamma(m / 2.0 + 1.0)) * std::pow(lam, m / 2.0);
}

std::vector<Isometry> SpectralManifold::isometry_group() const {
  switch (kind_) {
    case ManifoldKind::circle:
      return {Isometry::identity(), Isometry::rotation(kPi / 2.0), Isometry::rotation(1.0), Isometry::reflection()};
    case ManifoldKind::torus2:
      return {Isometry::identity(), Isometry::translation(kPi / 2.0, 1.0), Isometry::axis_swap(),
              Isometry::reflect_x()};
    case ManifoldKind::sphere_zonal:
      return {Isometry::identity(), Isometry::polar_rotation(0.7), Isometry::polar_reflection()};
  }
  return {};
}

bool SpectralManifold::contains(const Point& p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  if (kind_ == ManifoldKind::sphere_zonal) return p.x >= 0.0 && p.x <= kPi;
  return true;
}

double SpectralManifold::distance(const Point& a, const Point& b) const {
  auto wrap = [](double d) {
    d = std::fmod(std::fabs(d), 2.0 * kPi);
    return std::min(d, 2.0 * kPi - d);
  };
  switch (kind_) {
    case ManifoldKind::circle:
      return wrap(a.x - b.x);
    case ManifoldKind::torus2:
      return std::hypot(wrap(a.x - b.x), wrap(a.y - b.y));
    case ManifoldKind::sphere_zonal:
      return std::fabs(a.x - b.x);
  }
  return 0.0;
}

ManifoldPtr make_manifold(ManifoldKind kind) { return std::make_shared<const SpectralManifold>(kind); }

ManifoldPtr make_manifold(std::string_view name) {
  if (name == "circle") return make_manifold(ManifoldKind::circle);
  if (name == "torus2") return make_manifold(ManifoldKind::torus2);
  if (name == "sphere-zonal") return make_manifold(ManifoldKind::sphere_zonal);
  throw Error(ErrorCode::config, "unknown manifold '" + std::string(name) + "'");
}

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::config: return "configuration error";
    case ErrorCode::data: return "data error";
    case ErrorCode::resolution: return "resolution error";
    case ErrorCode::unsupported: return "unsupported operation";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::internal: return "internal error";
  }
  return "error";
}

}  // namespace spemb
