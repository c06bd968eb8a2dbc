#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spemb/coefficients.hpp"

namespace spemb {

struct TrigTerm {
  std::int32_t k1 = 0;  // circle frequency, torus first component, sphere degree
  std::int32_t k2 = 0;
  std::string kind = "cos";  // cos | sin (ignored on the sphere)
  double amp = 1.0;
};

// Catalog entry descriptor. Only the fields relevant to `name` are read.
struct DistributionSpec {
  std::string id;
  std::string name;  // delta | delta_derivative | sawtooth | sobolev_noise | poisson_smooth
                     // | trig_poly | cutoff | bump | zero
  Point x0{};
  double s = 0.0;
  std::uint64_t seed = 1;
  double r = 0.5;
  std::vector<TrigTerm> terms;
  Point center{};
  double inner = 0.0;
  double outer = 0.0;
};

struct DistributionInfo {
  bool smooth = false;
  bool bandlimited = false;
  std::optional<double> sobolev;      // unset for smooth entries
  std::vector<Point> singular_points; // known singular support
  bool singular_everywhere = false;   // random fields
  bool compact_support = false;
  Point support_center{};
  double support_radius = 0.0;
};

const std::vector<std::string>& catalog_names();

DistributionInfo describe_distribution(const SpectralManifold& man, const DistributionSpec& spec);

SpectralCoefficients distribution_catalog(const ManifoldPtr& man, const DistributionSpec& spec, std::size_t K);

// Pointwise values for entries that are functions (smooth entries and the
// sawtooth); empty for genuine distributions.
std::optional<PointFunction> catalog_function(const SpectralManifold& man, const DistributionSpec& spec);

// Relative magnitude below which poisson_smooth coefficients are dropped.
inline constexpr double kPoissonTruncation = 1e-60;
// Relative magnitude below which cutoff coefficients are dropped.
inline constexpr double kCutoffTruncation = 1e-16;

}  // namespace spemb
