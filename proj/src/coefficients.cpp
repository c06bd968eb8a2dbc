#include "spemb/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "spemb/error.hpp"
#include "spemb/quadrature.hpp"
#include "spemb/util.hpp"

namespace spemb {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

std::size_t wrap_index(std::int64_t k, std::size_t G) {
  const auto g = static_cast<std::int64_t>(G);
  return static_cast<std::size_t>(((k % g) + g) % g);
}

Complex ipow(std::int64_t k, int order) {
  Complex r{1.0, 0.0};
  const Complex ik{0.0, static_cast<double>(k)};
  for (int i = 0; i < order; ++i) r *= ik;
  return r;
}

// t^j for real j with an integer fast path.
double weight_pow(double base, double j) {
  if (j == std::floor(j) && std::fabs(j) <= 64) {
    const int n = static_cast<int>(j);
    double r = 1.0;
    for (int i = 0; i < std::abs(n); ++i) r *= base;
    return n >= 0 ? r : 1.0 / r;
  }
  return std::pow(base, j);
}

bool in_half_lattice(std::int32_t a, std::int32_t b) { return a > 0 || (a == 0 && b > 0); }

}  // namespace

SpectralCoefficients::SpectralCoefficients(ManifoldPtr manifold, std::vector<Complex> coeffs,
                                           std::optional<double> declared_sobolev)
    : manifold_(std::move(manifold)), coeffs_(std::move(coeffs)), declared_sobolev_(declared_sobolev) {
  if (!manifold_) throw Error(ErrorCode::internal, "coefficients without manifold");
}

std::int64_t SpectralCoefficients::bandwidth() const {
  // Trailing zero coefficients do not count.
  std::size_t used = coeffs_.size();
  while (used > 0 && coeffs_[used - 1] == Complex{}) --used;
  if (used == 0) return 0;
  switch (manifold_->kind()) {
    case ManifoldKind::circle:
      return static_cast<std::int64_t>(used / 2);
    case ManifoldKind::sphere_zonal:
      return static_cast<std::int64_t>(used - 1);
    case ManifoldKind::torus2: {
      const auto t = manifold_->modes(used);
      std::int64_t b = 0;
      for (std::size_t n = 0; n < used; ++n) {
        if (coeffs_[n] == Complex{}) continue;
        b = std::max<std::int64_t>(b, std::max(std::abs(t->k1[n]), std::abs(t->k2[n])));
      }
      return b;
    }
  }
  return 0;
}

SpectralCoefficients analyze(const ManifoldPtr& man, const PointFunction& f, std::size_t K,
                             std::size_t grid_points) {
  std::vector<Complex> a(K);
  if (K == 0) return SpectralCoefficients(man, std::move(a));
  switch (man->kind()) {
    case ManifoldKind::circle: {
      const std::size_t B = K / 2;
      const std::size_t G = grid_points ? grid_points : 4 * B + 1;
      if (G < 2 * B + 1) throw Error(ErrorCode::resolution, "analysis grid too coarse for cutoff");
      std::vector<Complex> s(G);
      for (std::size_t j = 0; j < G; ++j) s[j] = f({2.0 * kPi * static_cast<double>(j) / static_cast<double>(G), 0.0});
      detail::fft_1d(s, -1);
      const double inv = 1.0 / static_cast<double>(G);
      a[0] = std::sqrt(2.0 * kPi) * s[0].real() * inv;
      for (std::size_t n = 1; n < K; ++n) {
        const std::size_t k = (n + 1) / 2;
        const Complex ck = s[k] * inv;
        a[n] = (n % 2 == 1) ? 2.0 * std::sqrt(kPi) * ck.real() : -2.0 * std::sqrt(kPi) * ck.imag();
      }
      break;
    }
    case ManifoldKind::torus2: {
      const auto t = man->modes(K);
      std::size_t B = 0;
      for (std::size_t n = 0; n < K; ++n) {
        B = std::max<std::size_t>(B, static_cast<std::size_t>(std::max(std::abs(t->k1[n]), std::abs(t->k2[n]))));
      }
      const std::size_t G = grid_points ? grid_points : 4 * B + 1;
      if (G < 2 * B + 1) throw Error(ErrorCode::resolution, "analysis grid too coarse for cutoff");
      std::vector<Complex> s(G * G);
      for (std::size_t i = 0; i < G; ++i) {
        for (std::size_t j = 0; j < G; ++j) {
          s[i * G + j] = f({2.0 * kPi * static_cast<double>(i) / static_cast<double>(G),
                            2.0 * kPi * static_cast<double>(j) / static_cast<double>(G)});
        }
      }
      detail::fft_2d(s, G, G, -1);
      const double inv = 1.0 / static_cast<double>(G * G);
      for (std::size_t n = 0; n < K; ++n) {
        const Complex ck = s[wrap_index(t->k1[n], G) * G + wrap_index(t->k2[n], G)] * inv;
        switch (t->kind[n]) {
          case ModeKind::constant: a[n] = 2.0 * kPi * ck.real(); break;
          case ModeKind::cosine: a[n] = 2.0 * kSqrt2 * kPi * ck.real(); break;
          default: a[n] = -2.0 * kSqrt2 * kPi * ck.imag(); break;
        }
      }
      break;
    }
    case ManifoldKind::sphere_zonal: {
      const std::size_t nodes = grid_points ? grid_points : K + 1;
      if (nodes < K) throw Error(ErrorCode::resolution, "too few Gauss-Legendre nodes for cutoff");
      const GaussLegendre gl = gauss_legendre(nodes);
      std::vector<double> phi(K);
      std::vector<double> acc(K, 0.0);
      for (std::size_t i = 0; i < nodes; ++i) {
        const double fz = f({std::acos(gl.nodes[i]), 0.0}) * gl.weights[i];
        zonal_values(gl.nodes[i], K, phi.data());
        for (std::size_t l = 0; l < K; ++l) acc[l] += fz * phi[l];
      }
      for (std::size_t l = 0; l < K; ++l) a[l] = 2.0 * kPi * acc[l];
      break;
    }
  }
  return SpectralCoefficients(man, std::move(a));
}

std::vector<Complex> synthesize(const SpectralCoefficients& c, const std::vector<Point>& points) {
  const auto& man = c.manifold();
  const auto& a = c.coeffs();
  const std::size_t K = a.size();
  std::vector<Complex> out(points.size());
  switch (man.kind()) {
    case ManifoldKind::circle: {
      const double c0 = 1.0 / std::sqrt(2.0 * kPi);
      const double c1 = 1.0 / std::sqrt(kPi);
      for (std::size_t p = 0; p < points.size(); ++p) {
        Complex s = K ? a[0] * c0 : Complex{};
        for (std::size_t n = 1; n < K; ++n) {
          const double k = static_cast<double>((n + 1) / 2);
          s += a[n] * ((n % 2 == 1 ? std::cos(k * points[p].x) : std::sin(k * points[p].x)) * c1);
        }
        out[p] = s;
      }
      break;
    }
    case ManifoldKind::torus2: {
      const auto t = man.modes(K);
      const double c0 = 1.0 / (2.0 * kPi);
      const double c1 = 1.0 / (kPi * kSqrt2);
      for (std::size_t p = 0; p < points.size(); ++p) {
        Complex s{};
        for (std::size_t n = 0; n < K; ++n) {
          if (t->kind[n] == ModeKind::constant) {
            s += a[n] * c0;
            continue;
          }
          const double ph = t->k1[n] * points[p].x + t->k2[n] * points[p].y;
          s += a[n] * ((t->kind[n] == ModeKind::cosine ? std::cos(ph) : std::sin(ph)) * c1);
        }
        out[p] = s;
      }
      break;
    }
    case ManifoldKind::sphere_zonal: {
      std::vector<double> phi(K);
      for (std::size_t p = 0; p < points.size(); ++p) {
        zonal_values(std::cos(points[p].x), K, phi.data());
        Complex s{};
        for (std::size_t l = 0; l < K; ++l) s += a[l] * phi[l];
        out[p] = s;
      }
      break;
    }
  }
  return out;
}

std::vector<Complex> synthesize_grid(const SpectralCoefficients& c, std::size_t G, int dx, int dy) {
  const auto& man = c.manifold();
  const auto& a = c.coeffs();
  const auto B = static_cast<std::size_t>(c.bandwidth());
  if (G < 2 * B + 1) throw Error(ErrorCode::resolution, "synthesis grid too coarse for bandwidth");
  switch (man.kind()) {
    case ManifoldKind::circle: {
      const ExponentialView v = exponential_view(c);
      std::vector<Complex> s(G);
      const double norm = 1.0 / std::sqrt(2.0 * kPi);
      for (std::int64_t k = -v.band; k <= v.band; ++k) s[wrap_index(k, G)] += v.at(k) * ipow(k, dx) * norm;
      detail::fft_1d(s, +1);
      return s;
    }
    case ManifoldKind::torus2: {
      const auto t = man.modes(a.size());
      std::vector<Complex> s(G * G);
      const double norm = 1.0 / (2.0 * kPi);
      for (std::size_t n = 0; n < a.size(); ++n) {
        if (a[n] == Complex{}) continue;
        const std::int32_t k1 = t->k1[n];
        const std::int32_t k2 = t->k2[n];
        if (t->kind[n] == ModeKind::constant) {
          s[0] += (dx == 0 && dy == 0) ? a[n] * norm : Complex{};
          continue;
        }
        // a_c cos + a_s sin = c e_k + c' e_{-k} with c = (a_c - i a_s)/sqrt2
        const Complex cp = t->kind[n] == ModeKind::cosine ? a[n] / kSqrt2 : Complex(0.0, -1.0) * a[n] / kSqrt2;
        const Complex cm = t->kind[n] == ModeKind::cosine ? a[n] / kSqrt2 : Complex(0.0, 1.0) * a[n] / kSqrt2;
        s[wrap_index(k1, G) * G + wrap_index(k2, G)] += cp * ipow(k1, dx) * ipow(k2, dy) * norm;
        s[wrap_index(-k1, G) * G + wrap_index(-k2, G)] += cm * ipow(-k1, dx) * ipow(-k2, dy) * norm;
      }
      detail::fft_2d(s, G, G, +1);
      return s;
    }
    case ManifoldKind::sphere_zonal:
      break;
  }
  throw Error(ErrorCode::unsupported, "uniform grid synthesis is defined on the circle and torus only");
}

double sobolev_norm(const SpectralCoefficients& c, double j) {
  const auto& a = c.coeffs();
  if (a.empty()) return 0.0;
  const auto t = c.manifold().modes(a.size());
  double s = 0.0;
  double last_lambda = -1.0;
  double w = 1.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (t->lambda[n] != last_lambda) {
      last_lambda = t->lambda[n];
      w = weight_pow(1.0 + last_lambda, j);
    }
    s += w * std::norm(a[n]);
  }
  return std::sqrt(s);
}

std::size_t sup_grid_size(const SpectralManifold& man, std::int64_t bandwidth, std::size_t requested) {
  const auto B = static_cast<std::size_t>(bandwidth);
  switch (man.kind()) {
    case ManifoldKind::circle:
      return std::max(requested, next_pow2(std::max<std::size_t>(64, 8 * B + 1)));
    case ManifoldKind::torus2:
      return std::max(requested, next_pow2(std::max<std::size_t>(16, 2 * B + 1)));
    case ManifoldKind::sphere_zonal:
      return std::max(requested, 4 * B + 3);
  }
  return requested;
}

double sup_seminorm(const SpectralCoefficients& c, int alpha, std::size_t grid) {
  if (alpha < 0) throw Error(ErrorCode::domain, "negative derivative order");
  const auto& man = c.manifold();
  if (c.cutoff() == 0) return 0.0;
  const std::size_t G = sup_grid_size(man, c.bandwidth(), grid);
  double best = 0.0;
  switch (man.kind()) {
    case ManifoldKind::circle: {
      for (const auto& v : synthesize_grid(c, G, alpha, 0)) best = std::max(best, std::abs(v));
      return best;
    }
    case ManifoldKind::torus2: {
      for (int b1 = 0; b1 <= alpha; ++b1) {
        for (const auto& v : synthesize_grid(c, G, b1, alpha - b1)) best = std::max(best, std::abs(v));
      }
      return best;
    }
    case ManifoldKind::sphere_zonal: {
      if (alpha > 0) throw Error(ErrorCode::unsupported, "sup derivative seminorms are not available on the sphere");
      const std::size_t K = c.cutoff();
      std::vector<double> phi(K);
      for (std::size_t i = 0; i < G; ++i) {
        const double theta = kPi * static_cast<double>(i) / static_cast<double>(G - 1);
        zonal_values(std::cos(theta), K, phi.data());
        Complex s{};
        for (std::size_t l = 0; l < K; ++l) s += c.coeffs()[l] * phi[l];
        best = std::max(best, std::abs(s));
      }
      return best;
    }
  }
  return best;
}

double l2_distance(const SpectralCoefficients& a, const SpectralCoefficients& b) {
  const std::size_t n = std::max(a.cutoff(), b.cutoff());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

SpectralCoefficients subtract(const SpectralCoefficients& a, const SpectralCoefficients& b) {
  const std::size_t n = std::max(a.cutoff(), b.cutoff());
  std::vector<Complex> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  return SpectralCoefficients(a.manifold_ptr(), std::move(d));
}

SpectralCoefficients add(const SpectralCoefficients& a, const SpectralCoefficients& b) {
  const std::size_t n = std::max(a.cutoff(), b.cutoff());
  std::vector<Complex> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] + b[i];
  return SpectralCoefficients(a.manifold_ptr(), std::move(d));
}

SpectralCoefficients scaled(const SpectralCoefficients& a, double s) {
  std::vector<Complex> d = a.coeffs();
  for (auto& v : d) v *= s;
  return SpectralCoefficients(a.manifold_ptr(), std::move(d), a.declared_sobolev());
}

ExponentialView exponential_view(const SpectralCoefficients& c) {
  if (c.manifold().kind() != ManifoldKind::circle) {
    throw Error(ErrorCode::unsupported, "exponential view is defined on the circle only");
  }
  ExponentialView v;
  const std::size_t K = c.cutoff();
  v.band = static_cast<std::int64_t>(K / 2);
  v.c.assign(2 * static_cast<std::size_t>(v.band) + 1, Complex{});
  if (K == 0) return v;
  v.c[static_cast<std::size_t>(v.band)] = c[0];
  for (std::int64_t k = 1; k <= v.band; ++k) {
    const Complex ac = c[static_cast<std::size_t>(2 * k - 1)];
    const Complex as = c[static_cast<std::size_t>(2 * k)];
    const Complex i{0.0, 1.0};
    v.c[static_cast<std::size_t>(v.band + k)] = (ac - i * as) / kSqrt2;
    v.c[static_cast<std::size_t>(v.band - k)] = (ac + i * as) / kSqrt2;
  }
  return v;
}

SpectralCoefficients from_exponential_view(const ManifoldPtr& man, const ExponentialView& v) {
  std::vector<Complex> a(2 * static_cast<std::size_t>(v.band) + 1);
  a[0] = v.at(0);
  const Complex i{0.0, 1.0};
  for (std::int64_t k = 1; k <= v.band; ++k) {
    a[static_cast<std::size_t>(2 * k - 1)] = (v.at(k) + v.at(-k)) / kSqrt2;
    a[static_cast<std::size_t>(2 * k)] = i * (v.at(k) - v.at(-k)) / kSqrt2;
  }
  return SpectralCoefficients(man, std::move(a));
}

SpectralCoefficients multiply(const SpectralCoefficients& a, const SpectralCoefficients& b) {
  if (a.manifold_ptr().get() != b.manifold_ptr().get() && a.manifold().kind() != b.manifold().kind()) {
    throw Error(ErrorCode::domain, "product of coefficients on different manifolds");
  }
  const ManifoldPtr& man = a.manifold_ptr();
  if (a.cutoff() == 0 || b.cutoff() == 0) return SpectralCoefficients(man, {});
  switch (man->kind()) {
    case ManifoldKind::circle: {
      const ExponentialView va = exponential_view(a);
      const ExponentialView vb = exponential_view(b);
      std::vector<std::int64_t> ia, ib;
      for (std::int64_t k = -va.band; k <= va.band; ++k) if (va.at(k) != Complex{}) ia.push_back(k);
      for (std::int64_t k = -vb.band; k <= vb.band; ++k) if (vb.at(k) != Complex{}) ib.push_back(k);
      ExponentialView out;
      out.band = va.band + vb.band;
      out.c.assign(2 * static_cast<std::size_t>(out.band) + 1, Complex{});
      const double norm = 1.0 / std::sqrt(2.0 * kPi);
      for (std::int64_t k : ia) {
        const Complex ak = va.at(k) * norm;
        for (std::int64_t m : ib) out.c[static_cast<std::size_t>(k + m + out.band)] += ak * vb.at(m);
      }
      return from_exponential_view(man, out);
    }
    case ManifoldKind::torus2: {
      const std::int64_t Bp = a.bandwidth() + b.bandwidth();
      const std::size_t G = next_pow2(static_cast<std::size_t>(2 * Bp + 1));
      std::vector<Complex> fa = synthesize_grid(a, G);
      const std::vector<Complex> fb = synthesize_grid(b, G);
      for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
      detail::fft_2d(fa, G, G, -1);
      const std::size_t K = man->modes_below(2.0 * static_cast<double>(Bp * Bp) + 1.0);
      const auto t = man->modes(K);
      std::vector<Complex> out(K);
      const double inv = 1.0 / static_cast<double>(G * G);
      for (std::size_t n = 0; n < K; ++n) {
        if (std::abs(t->k1[n]) > Bp || std::abs(t->k2[n]) > Bp) continue;
        const Complex cp = fa[wrap_index(t->k1[n], G) * G + wrap_index(t->k2[n], G)] * inv;
        const Complex cm = fa[wrap_index(-t->k1[n], G) * G + wrap_index(-t->k2[n], G)] * inv;
        // grid sample values are u(x) = sum c_k e^{ikx}/(2 pi); invert the real-basis relation
        switch (t->kind[n]) {
          case ModeKind::constant: out[n] = 2.0 * kPi * cp; break;
          case ModeKind::cosine: out[n] = 2.0 * kPi * (cp + cm) / kSqrt2; break;
          default: out[n] = 2.0 * kPi * Complex(0.0, 1.0) * (cp - cm) / kSqrt2; break;
        }
      }
      return SpectralCoefficients(man, std::move(out));
    }
    case ManifoldKind::sphere_zonal: {
      const std::size_t La = a.cutoff() - 1;
      const std::size_t Lb = b.cutoff() - 1;
      const std::size_t K = La + Lb + 1;
      const GaussLegendre gl = gauss_legendre(K + 1);
      std::vector<double> phi(K);
      std::vector<Complex> acc(K);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        zonal_values(gl.nodes[i], K, phi.data());
        Complex ua{}, ub{};
        for (std::size_t l = 0; l <= La; ++l) ua += a.coeffs()[l] * phi[l];
        for (std::size_t l = 0; l <= Lb; ++l) ub += b.coeffs()[l] * phi[l];
        const Complex w = ua * ub * gl.weights[i];
        for (std::size_t l = 0; l < K; ++l) acc[l] += w * phi[l];
      }
      for (auto& v : acc) v *= 2.0 * kPi;
      return SpectralCoefficients(man, std::move(acc));
    }
  }
  return SpectralCoefficients(man, {});
}

SpectralCoefficients apply_isometry(const SpectralCoefficients& c, const Isometry& iso) {
  const ManifoldPtr& man = c.manifold_ptr();
  const auto& a = c.coeffs();
  const ManifoldKind kind = man->kind();
  if (kind == ManifoldKind::sphere_zonal) {
    const bool trivial = iso.r[0][0] == 1 && iso.r[0][1] == 0 && iso.r[1][0] == 0 && iso.r[1][1] == 1 &&
                         iso.shift.x == 0.0 && iso.shift.y == 0.0;
    if (!(trivial || iso.polar || iso.zonal_reflection)) {
      throw Error(ErrorCode::unsupported, "isometry '" + iso.name + "' is not supported on the zonal sphere");
    }
    std::vector<Complex> out = a;
    if (iso.zonal_reflection) {
      for (std::size_t l = 1; l < out.size(); l += 2) out[l] = -out[l];
    }
    return SpectralCoefficients(man, std::move(out), c.declared_sobolev());
  }
  if (iso.zonal_reflection || iso.polar) {
    throw Error(ErrorCode::unsupported, "isometry '" + iso.name + "' is only defined on the zonal sphere");
  }
  if (kind == ManifoldKind::circle && (iso.r[0][1] != 0 || std::abs(iso.r[0][0]) != 1 || iso.shift.y != 0.0)) {
    throw Error(ErrorCode::unsupported, "isometry '" + iso.name + "' is not supported on the circle");
  }
  for (const auto& row : iso.r) {
    if (std::abs(row[0]) + std::abs(row[1]) != 1) throw Error(ErrorCode::unsupported, "isometry is not a lattice map");
  }
  if (a.empty()) return SpectralCoefficients(man, {}, c.declared_sobolev());
  // Isometries permute within eigenspaces, so the cutoff is completed to the
  // end of the last eigenspace first.
  const std::size_t K = man->modes_below(man->eigenvalue(a.size() - 1) + 0.5);
  std::vector<Complex> in(K);
  std::copy(a.begin(), a.end(), in.begin());
  std::vector<Complex> out(K);
  const auto t = man->modes(K);
  out[0] = in[0];
  for (std::size_t n = 1; n < K; ++n) {
    if (t->kind[n] != ModeKind::cosine) continue;
    const std::int32_t k1 = t->k1[n];
    const std::int32_t k2 = t->k2[n];
    const Complex ac = in[n];
    const Complex as = in[n + 1];
    // k' = R^T k, phase k . b
    std::int32_t q1 = iso.r[0][0] * k1 + iso.r[1][0] * k2;
    std::int32_t q2 = iso.r[0][1] * k1 + iso.r[1][1] * k2;
    if (kind == ManifoldKind::circle) q2 = 0;
    const double theta = k1 * iso.shift.x + (kind == ManifoldKind::torus2 ? k2 * iso.shift.y : 0.0);
    const double ct = std::cos(theta);
    const double st = std::sin(theta);
    Complex nc = ac * ct + as * st;
    Complex ns = -ac * st + as * ct;
    if (!in_half_lattice(q1, q2)) {
      q1 = -q1;
      q2 = -q2;
      ns = -ns;
    }
    std::int64_t target;
    if (kind == ManifoldKind::circle) {
      target = 2 * static_cast<std::int64_t>(q1) - 1;
    } else {
      target = t->find(q1, q2);
    }
    if (target < 0 || static_cast<std::size_t>(target) + 1 >= K) {
      throw Error(ErrorCode::internal, "isometry image outside the mode table");
    }
    const auto ti = static_cast<std::size_t>(target);
    out[ti] = nc;
    out[ti + 1] = ns;
  }
  return SpectralCoefficients(man, std::move(out), c.declared_sobolev());
}

std::string coefficients_csv(const SpectralCoefficients& c) {
  std::ostringstream os;
  os << "index,eigenvalue,re,im\n";
  const auto t = c.manifold().modes(std::max<std::size_t>(c.cutoff(), 1));
  for (std::size_t n = 0; n < c.cutoff(); ++n) {
    os << n << ',' << format_double(t->lambda[n]) << ',' << format_double(c.coeffs()[n].real()) << ','
       << format_double(c.coeffs()[n].imag()) << '\n';
  }
  return os.str();
}

}  // namespace spemb
