#include "spemb/net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spemb/error.hpp"
#include "spemb/util.hpp"

namespace spemb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kMinimumCutoff = 64;

// phi_0..phi_{K-1} at p.
void mode_values(const SpectralManifold& man, const ModeTable& t, std::size_t K, const Point& p, double* out) {
  switch (man.kind()) {
    case ManifoldKind::sphere_zonal:
      zonal_values(std::cos(p.x), K, out);
      return;
    case ManifoldKind::circle:
    case ManifoldKind::torus2: {
      const bool circle = man.kind() == ManifoldKind::circle;
      const double c0 = circle ? 1.0 / std::sqrt(2.0 * kPi) : 1.0 / (2.0 * kPi);
      const double c1 = circle ? 1.0 / std::sqrt(kPi) : 1.0 / (kPi * std::sqrt(2.0));
      for (std::size_t n = 0; n < K; ++n) {
        if (t.kind[n] == ModeKind::constant) {
          out[n] = c0;
          continue;
        }
        const double ph = t.k1[n] * p.x + (circle ? 0.0 : t.k2[n] * p.y);
        out[n] = (t.kind[n] == ModeKind::cosine ? std::cos(ph) : std::sin(ph)) * c1;
      }
      return;
    }
  }
}

// Symbol values per mode, evaluated once per distinct eigenvalue.
std::vector<double> multiplier_values(const SchwartzSymbol& g, const ModeTable& t, std::size_t K) {
  std::vector<double> out(K);
  double last = -1.0;
  double v = 0.0;
  for (std::size_t n = 0; n < K; ++n) {
    if (t.lambda[n] != last) {
      last = t.lambda[n];
      v = g.evaluate(last);
    }
    out[n] = v;
  }
  return out;
}

std::size_t active_modes(const SymbolNet& net, double eps, const SpectralManifold& man) {
  return man.modes_below(net.tail_radius(eps));
}

}  // namespace

EpsilonGrid::EpsilonGrid(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw Error(ErrorCode::config, "an eps grid needs at least two samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!(samples_[i] > 0.0 && samples_[i] <= 1.0)) throw Error(ErrorCode::config, "eps samples must lie in (0, 1]");
    if (i > 0 && !(samples_[i] < samples_[i - 1])) throw Error(ErrorCode::config, "eps samples must strictly descend");
  }
  const double r0 = samples_[1] / samples_[0];
  for (std::size_t i = 2; i < samples_.size(); ++i) {
    if (std::fabs(samples_[i] / samples_[i - 1] / r0 - 1.0) > 1e-12) {
      throw Error(ErrorCode::config, "eps grid must be geometric");
    }
  }
}

EpsilonGrid EpsilonGrid::geometric(double hi, double lo, std::size_t count) {
  if (!(hi > lo && lo > 0.0 && hi <= 1.0)) throw Error(ErrorCode::config, "invalid eps range");
  if (count < 2) throw Error(ErrorCode::config, "an eps grid needs at least two samples");
  std::vector<double> s(count);
  const double step = std::log(lo / hi) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) s[i] = hi * std::exp(step * static_cast<double>(i));
  s.front() = hi;
  return EpsilonGrid(std::move(s));
}

SymbolNet::SymbolNet(SchwartzSymbol base, std::optional<SymbolSequence> seq, int level)
    : base_(std::move(base)), seq_(std::move(seq)), level_(level) {}

SymbolNet SymbolNet::plain(SchwartzSymbol f) { return SymbolNet(std::move(f), std::nullopt, 0); }

SymbolNet SymbolNet::staged(SymbolSequence seq, int level) {
  if (level < 1) throw Error(ErrorCode::config, "staged nets need a level >= 1");
  SchwartzSymbol lim = seq.limit();
  return SymbolNet(std::move(lim), std::move(seq), level);
}

SymbolNet SymbolNet::limit(SymbolSequence seq) {
  SchwartzSymbol lim = seq.limit();
  return SymbolNet(std::move(lim), std::move(seq), 0);
}

SchwartzSymbol SymbolNet::difference_at(const SymbolNet& other, double eps) const {
  if (seq_ && other.seq_ && seq_->same_as(*other.seq_)) {
    // F_k - F_j = (F_k - F) - (F_j - F); the limit has no tail.
    if (!other.is_staged() && !is_staged()) return scale(zero_symbol(), eps);
    if (!other.is_staged()) return scale(seq_->tail(member_index(eps)), eps);
    if (!is_staged()) return scale(difference(zero_symbol(), seq_->tail(other.member_index(eps))), eps);
    return scale(difference(seq_->tail(member_index(eps)), seq_->tail(other.member_index(eps))), eps);
  }
  return difference(at(eps), other.at(eps));
}

std::uint64_t SymbolNet::member_index(double eps) const {
  if (!is_staged()) throw Error(ErrorCode::domain, "plain nets have no member index");
  return k_index(level_, eps);
}

SchwartzSymbol SymbolNet::at(double eps) const {
  if (!is_staged()) return scale(base_, eps);
  return staged_symbol(*seq_, level_, eps);
}

double SymbolNet::tail_radius(double eps) const { return base_.tail_radius() / eps; }

std::string SymbolNet::describe() const {
  if (!is_staged()) return base_.describe();
  return "staged(l=" + std::to_string(level_) + ", " + base_.describe() + ")";
}

std::size_t required_cutoff(const SymbolNet& net, const SpectralManifold& man, const EpsilonGrid& grid) {
  return std::max(kMinimumCutoff, active_modes(net, grid.smallest(), man));
}

SpectralCoefficients apply_symbol(const SymbolNet& net, double eps, const SpectralCoefficients& u) {
  const SpectralManifold& man = u.manifold();
  const std::size_t K = std::min(u.cutoff(), active_modes(net, eps, man));
  std::vector<Complex> out(K);
  if (K > 0) {
    const auto t = man.modes(K);
    const std::vector<double> g = multiplier_values(net.at(eps), *t, K);
    for (std::size_t n = 0; n < K; ++n) out[n] = g[n] * u.coeffs()[n];
  }
  return SpectralCoefficients(u.manifold_ptr(), std::move(out));
}

CoefficientNet embed(const SymbolNet& net, const EpsilonGrid& grid, const SpectralCoefficients& u) {
  CoefficientNet out{grid, std::vector<SpectralCoefficients>(grid.size(), SpectralCoefficients(u.manifold_ptr(), {}))};
  parallel_for(grid.size(), [&](std::size_t i) { out.frames[i] = apply_symbol(net, grid[i], u); });
  return out;
}

std::size_t mode_count_N_eps(const SchwartzSymbol& f, const SpectralManifold& man, double eps) {
  const auto t = f.plateau_radius();
  if (!t) throw Error(ErrorCode::domain, "undefined plateau: symbol " + f.describe() + " has no plateau radius");
  if (!(eps > 0.0)) throw Error(ErrorCode::domain, "eps must be positive");
  return man.modes_below(*t / eps);
}

Matrix kernel_synthesize(const SymbolNet& net, double eps, const SpectralManifold& man, const std::vector<Point>& xs,
                         const std::vector<Point>& ys) {
  const std::size_t K = active_modes(net, eps, man);
  if (ys.size() < K) throw Error(ErrorCode::resolution, "kernel grid does not resolve the active modes");
  Matrix m{xs.size(), ys.size(), std::vector<double>(xs.size() * ys.size(), 0.0)};
  if (K == 0) return m;
  const auto t = man.modes(K);
  const std::vector<double> g = multiplier_values(net.at(eps), *t, K);
  std::vector<double> py(ys.size() * K);
  for (std::size_t j = 0; j < ys.size(); ++j) mode_values(man, *t, K, ys[j], &py[j * K]);
  std::vector<double> px(K);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mode_values(man, *t, K, xs[i], px.data());
    for (std::size_t n = 0; n < K; ++n) px[n] *= g[n];
    for (std::size_t j = 0; j < ys.size(); ++j) {
      double s = 0.0;
      const double* row = &py[j * K];
      for (std::size_t n = 0; n < K; ++n) s += px[n] * row[n];
      m.data[i * ys.size() + j] = s;
    }
  }
  return m;
}

double kernel_norm_bound(const SymbolNet& net, double eps, const SpectralManifold& man, double k) {
  const std::size_t K = active_modes(net, eps, man);
  if (K == 0) return 0.0;
  const auto t = man.modes(K);
  const std::vector<double> g = multiplier_values(net.at(eps), *t, K);
  double s = 0.0;
  for (std::size_t n = 0; n < K; ++n) s += g[n] * g[n] * std::pow(1.0 + t->lambda[n], -k);
  return std::sqrt(s);
}

double operator_norm(const SymbolNet& net, double eps, const SpectralManifold& man, double k) {
  const std::size_t K = active_modes(net, eps, man);
  if (K == 0) return 0.0;
  const auto t = man.modes(K);
  const SchwartzSymbol g = net.at(eps);
  double best = 0.0;
  double last = -1.0;
  for (std::size_t n = 0; n < K; ++n) {
    if (t->lambda[n] == last) continue;
    last = t->lambda[n];
    best = std::max(best, std::fabs(g.evaluate(last)) * std::pow(1.0 + last, -k / 2.0));
  }
  return best;
}

double operator_norm_diff(const SymbolNet& a, const SymbolNet& b, double eps, const SpectralManifold& man, double k) {
  const std::size_t K = std::max(active_modes(a, eps, man), active_modes(b, eps, man));
  if (K == 0) return 0.0;
  const auto t = man.modes(K);
  const SchwartzSymbol ga = a.at(eps);
  const SchwartzSymbol gb = b.at(eps);
  double best = 0.0;
  double last = -1.0;
  for (std::size_t n = 0; n < K; ++n) {
    if (t->lambda[n] == last) continue;
    last = t->lambda[n];
    best = std::max(best, std::fabs(ga.evaluate(last) - gb.evaluate(last)) * std::pow(1.0 + last, -k / 2.0));
  }
  return best;
}

OperatorNormNet operator_norm_net(const SymbolNet& net, const EpsilonGrid& grid, const SpectralManifold& man, double k) {
  OperatorNormNet out{grid, k, std::vector<double>(grid.size())};
  parallel_for(grid.size(), [&](std::size_t i) { out.values[i] = operator_norm(net, grid[i], man, k); });
  return out;
}

int PerturbSchedule::exponent(double eps) const {
  const double p = std::ceil(1.0 / std::sqrt(eps));
  return static_cast<int>(std::min<double>(p, cap));
}

CoefficientNet perturb_with_negligible(const CoefficientNet& net, const PerturbSchedule& schedule) {
  CoefficientNet out = net;
  if (schedule.amplitude == 0.0) return out;
  for (std::size_t i = 0; i < out.frames.size(); ++i) {
    const double eps = net.grid[i];
    const double size = schedule.amplitude * std::pow(eps, schedule.exponent(eps));
    const SpectralCoefficients& src = net.frames[i];
    std::vector<Complex> a = src.coeffs();
    const std::size_t r = schedule.rank;
    if (a.size() < r) a.resize(r);
    // Hilbert-matrix mixer of the leading modes: bounded and smoothing.
    for (std::size_t p = 0; p < r; ++p) {
      Complex s{};
      for (std::size_t q = 0; q < r; ++q) s += src[q] / static_cast<double>(p + q + 1);
      a[p] += size * s;
    }
    out.frames[i] = SpectralCoefficients(src.manifold_ptr(), std::move(a), src.declared_sobolev());
  }
  return out;
}

SpectralCoefficients apply_map(const SpectralCoefficients& c, const LinearMap& map) {
  switch (map.kind) {
    case LinearMap::Kind::identity:
      return c;
    case LinearMap::Kind::isometry:
      return apply_isometry(c, map.isometry);
    case LinearMap::Kind::multiplier: {
      std::vector<Complex> a = c.coeffs();
      if (!a.empty()) {
        const auto t = c.manifold().modes(a.size());
        for (std::size_t n = 0; n < a.size(); ++n) a[n] *= std::pow(1.0 + t->lambda[n], map.order / 2.0);
      }
      return SpectralCoefficients(c.manifold_ptr(), std::move(a));
    }
  }
  throw Error(ErrorCode::unsupported, "unsupported linear map");
}

CoefficientNet pushforward(const CoefficientNet& net, const LinearMap& map) {
  CoefficientNet out = net;
  parallel_for(net.frames.size(), [&](std::size_t i) { out.frames[i] = apply_map(net.frames[i], map); });
  return out;
}

std::vector<std::vector<Complex>> pushforward_points(const CoefficientNet& net, const std::vector<Point>& points) {
  std::vector<std::vector<Complex>> out(net.frames.size());
  parallel_for(net.frames.size(), [&](std::size_t i) { out[i] = synthesize(net.frames[i], points); });
  return out;
}

std::string net_csv(const CoefficientNet& net) {
  std::ostringstream os;
  os << "epsilon,mode,re,im\n";
  for (std::size_t i = 0; i < net.frames.size(); ++i) {
    const auto& a = net.frames[i].coeffs();
    for (std::size_t n = 0; n < a.size(); ++n) {
      os << format_double(net.grid[i]) << ',' << n << ',' << format_double(a[n].real()) << ','
         << format_double(a[n].imag()) << '\n';
    }
  }
  return os.str();
}

}  // namespace spemb
