#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spemb/manifold.hpp"

namespace spemb {

using Complex = std::complex<double>;

// Eigen-coefficients in the real basis of the manifold's mode table.
class SpectralCoefficients {
 public:
  SpectralCoefficients(ManifoldPtr manifold, std::vector<Complex> coeffs,
                       std::optional<double> declared_sobolev = std::nullopt);

  const SpectralManifold& manifold() const noexcept { return *manifold_; }
  const ManifoldPtr& manifold_ptr() const noexcept { return manifold_; }
  std::size_t cutoff() const noexcept { return coeffs_.size(); }
  const std::vector<Complex>& coeffs() const noexcept { return coeffs_; }
  std::vector<Complex>& coeffs() noexcept { return coeffs_; }
  Complex operator[](std::size_t n) const noexcept { return n < coeffs_.size() ? coeffs_[n] : Complex{}; }
  std::optional<double> declared_sobolev() const noexcept { return declared_sobolev_; }
  void set_declared_sobolev(std::optional<double> s) noexcept { declared_sobolev_ = s; }

  // Frequency bandwidth: largest |k| component (circle, torus) or degree l.
  std::int64_t bandwidth() const;

 private:
  ManifoldPtr manifold_;
  std::vector<Complex> coeffs_;
  std::optional<double> declared_sobolev_;
};

using PointFunction = std::function<double(const Point&)>;

// grid_points = 0 selects 4B+1 points per axis (circle, torus) or K+1
// Gauss-Legendre nodes (sphere).
SpectralCoefficients analyze(const ManifoldPtr& man, const PointFunction& f, std::size_t K,
                             std::size_t grid_points = 0);

std::vector<Complex> synthesize(const SpectralCoefficients& c, const std::vector<Point>& points);

// Values of d^a/dx^a d^b/dy^b u on the uniform G (or G x G, row index x)
// grid of the circle or torus.
std::vector<Complex> synthesize_grid(const SpectralCoefficients& c, std::size_t G, int dx = 0, int dy = 0);

double sobolev_norm(const SpectralCoefficients& c, double j);

// max |d^alpha u| over a uniform grid. Torus: max over |beta| = alpha.
// Sphere: alpha = 0 only, on a colatitude grid.
double sup_seminorm(const SpectralCoefficients& c, int alpha, std::size_t grid = 0);

// Grid size used by sup_seminorm for a given bandwidth.
std::size_t sup_grid_size(const SpectralManifold& man, std::int64_t bandwidth, std::size_t requested);

double l2_distance(const SpectralCoefficients& a, const SpectralCoefficients& b);
SpectralCoefficients subtract(const SpectralCoefficients& a, const SpectralCoefficients& b);
SpectralCoefficients add(const SpectralCoefficients& a, const SpectralCoefficients& b);
SpectralCoefficients scaled(const SpectralCoefficients& a, double s);

// Pointwise product. Circle: exact coefficient convolution; torus: FFT grid;
// sphere: Gauss-Legendre grid.
SpectralCoefficients multiply(const SpectralCoefficients& a, const SpectralCoefficients& b);

// Pullback u -> u o phi.
SpectralCoefficients apply_isometry(const SpectralCoefficients& c, const Isometry& iso);

// Circle only: u = sum_k c_k e^{ik theta} / sqrt(2 pi), k in [-band, band].
struct ExponentialView {
  std::int64_t band = 0;
  std::vector<Complex> c;  // index k + band
  Complex at(std::int64_t k) const { return (k < -band || k > band) ? Complex{} : c[static_cast<std::size_t>(k + band)]; }
};
ExponentialView exponential_view(const SpectralCoefficients& c);
SpectralCoefficients from_exponential_view(const ManifoldPtr& man, const ExponentialView& v);

// index, eigenvalue, re, im
std::string coefficients_csv(const SpectralCoefficients& c);

}  // namespace spemb
