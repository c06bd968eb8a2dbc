#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spemb/coefficients.hpp"
#include "spemb/symbol.hpp"

namespace spemb {

class EpsilonGrid {
 public:
  EpsilonGrid() = default;
  explicit EpsilonGrid(std::vector<double> samples);
  // count geometric samples from hi down to lo.
  static EpsilonGrid geometric(double hi, double lo, std::size_t count);

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  double smallest() const { return samples_.back(); }

 private:
  std::vector<double> samples_;
};

class SymbolNet {
 public:
  static SymbolNet plain(SchwartzSymbol f);
  static SymbolNet staged(SymbolSequence seq, int level);
  // Plain net of the sequence limit that remembers the sequence.
  static SymbolNet limit(SymbolSequence seq);

  bool is_staged() const noexcept { return level_ > 0; }
  int level() const noexcept { return level_; }
  const SchwartzSymbol& base() const noexcept { return base_; }
  const std::optional<SymbolSequence>& sequence() const noexcept { return seq_; }

  // The symbol applied at eps as a function of the eigenvalue.
  SchwartzSymbol at(double eps) const;
  // at(eps) - other.at(eps); exact annulus features for nets of one sequence.
  SchwartzSymbol difference_at(const SymbolNet& other, double eps) const;
  std::uint64_t member_index(double eps) const;
  // Eigenvalue bound of the active modes at eps.
  double tail_radius(double eps) const;
  std::string describe() const;

 private:
  SymbolNet(SchwartzSymbol base, std::optional<SymbolSequence> seq, int level);

  SchwartzSymbol base_;
  std::optional<SymbolSequence> seq_;
  int level_ = 0;
};

struct CoefficientNet {
  EpsilonGrid grid;
  std::vector<SpectralCoefficients> frames;
};

struct OperatorNormNet {
  EpsilonGrid grid;
  double k = 0.0;
  std::vector<double> values;
};

// Number of modes needed so that every frame of the net over `grid` is
// free of truncation: modes with eigenvalue below the tail radius at the
// smallest eps.
std::size_t required_cutoff(const SymbolNet& net, const SpectralManifold& man, const EpsilonGrid& grid);

SpectralCoefficients apply_symbol(const SymbolNet& net, double eps, const SpectralCoefficients& u);
CoefficientNet embed(const SymbolNet& net, const EpsilonGrid& grid, const SpectralCoefficients& u);

// Modes (with multiplicity) with eigenvalue below t / eps.
std::size_t mode_count_N_eps(const SchwartzSymbol& f, const SpectralManifold& man, double eps);

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// k(x_i, y_j) = sum_n F(eps lambda_n) phi_n(x_i) phi_n(y_j) over active modes.
Matrix kernel_synthesize(const SymbolNet& net, double eps, const SpectralManifold& man, const std::vector<Point>& xs,
                         const std::vector<Point>& ys);
// Hilbert-Schmidt norm of F(eps Delta) D^{-k}: a kernel-side upper bound for
// the spectral operator norm.
double kernel_norm_bound(const SymbolNet& net, double eps, const SpectralManifold& man, double k);

double operator_norm(const SymbolNet& net, double eps, const SpectralManifold& man, double k);
double operator_norm_diff(const SymbolNet& a, const SymbolNet& b, double eps, const SpectralManifold& man, double k);
OperatorNormNet operator_norm_net(const SymbolNet& net, const EpsilonGrid& grid, const SpectralManifold& man, double k);

struct PerturbSchedule {
  double amplitude = 1.0;  // 0 gives the identity
  int cap = 40;
  std::size_t rank = 8;
  int exponent(double eps) const;  // ceil(1/sqrt(eps)) capped
};

CoefficientNet perturb_with_negligible(const CoefficientNet& net, const PerturbSchedule& schedule = {});

struct LinearMap {
  enum class Kind { identity, multiplier, isometry };
  Kind kind = Kind::identity;
  double order = 0.0;  // (1 + Delta)^{order/2}
  Isometry isometry;

  static LinearMap identity() { return {}; }
  static LinearMap multiplier(double order) { return {Kind::multiplier, order, {}}; }
  static LinearMap of_isometry(const Isometry& g) { return {Kind::isometry, 0.0, g}; }
};

SpectralCoefficients apply_map(const SpectralCoefficients& c, const LinearMap& map);
CoefficientNet pushforward(const CoefficientNet& net, const LinearMap& map);
// Point evaluation family: values of every frame at the given points.
std::vector<std::vector<Complex>> pushforward_points(const CoefficientNet& net, const std::vector<Point>& points);

// epsilon, mode, re, im
std::string net_csv(const CoefficientNet& net);

}  // namespace spemb
