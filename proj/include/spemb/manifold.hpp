#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace spemb {

enum class ManifoldKind { circle, torus2, sphere_zonal };

enum class ModeKind : std::uint8_t { constant, cosine, sine, zonal };

// Circle: x is the angle. Torus: (x, y). Zonal sphere: x is the colatitude.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Real basis, sorted by eigenvalue; ties by frequency vector, cosine first.
// Torus frequencies are kept on the half lattice k1 > 0 or (k1 == 0, k2 > 0).
struct ModeTable {
  std::vector<double> lambda;
  std::vector<std::int32_t> k1;
  std::vector<std::int32_t> k2;
  std::vector<ModeKind> kind;
  // Dense lookup of the cosine (or constant) mode for a half-lattice
  // frequency, torus only. -1 when absent.
  std::int32_t radius = 0;
  std::vector<std::int32_t> lookup;

  std::size_t size() const noexcept { return lambda.size(); }
  std::int64_t find(std::int32_t a, std::int32_t b) const noexcept;
};

// Affine map x -> R x + b with R a signed permutation matrix.
// The induced action on functions is the pullback u -> u o phi.
struct Isometry {
  std::string name = "identity";
  int r[2][2] = {{1, 0}, {0, 1}};
  Point shift{};
  bool zonal_reflection = false;
  bool polar = false;  // rotation about the polar axis

  static Isometry identity();
  static Isometry rotation(double angle);
  static Isometry reflection();
  static Isometry translation(double a, double b);
  static Isometry axis_swap();
  static Isometry reflect_x();
  static Isometry polar_rotation(double angle);
  static Isometry polar_reflection();

  Point apply(const Point& p) const;
};

class SpectralManifold {
 public:
  explicit SpectralManifold(ManifoldKind kind);

  ManifoldKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return dim_; }
  double volume() const noexcept { return volume_; }

  double eigenvalue(std::size_t n) const;
  double eigenfunction(std::size_t n, const Point& p) const;
  // sup over the manifold of |phi_n|
  double eigenfunction_sup(std::size_t n) const;

  // Number of basis modes with eigenvalue strictly below lam.
  std::size_t modes_below(double lam) const;
  // Mode table with at least `count` entries; cached and shared.
  std::shared_ptr<const ModeTable> modes(std::size_t count) const;

  // Eigenvalues below lam counted with full multiplicity.
  std::int64_t weyl_count(double lam) const;
  double weyl_asymptotic(double lam) const;

  std::vector<Isometry> isometry_group() const;
  bool contains(const Point& p) const;
  double distance(const Point& a, const Point& b) const;

 private:
  ManifoldKind kind_;
  std::string name_;
  int dim_;
  double volume_;
  mutable std::mutex mutex_;
  mutable std::shared_ptr<const ModeTable> table_;
};

using ManifoldPtr = std::shared_ptr<const SpectralManifold>;

ManifoldPtr make_manifold(std::string_view name);
ManifoldPtr make_manifold(ManifoldKind kind);

// Largest integer m >= 0 with m*m < v, or -1 when v <= 0.
std::int64_t isqrt_below(double v);

// Normalized Legendre values sqrt((2l+1)/(4 pi)) P_l(z) for l = 0..L-1.
void zonal_values(double z, std::size_t count, double* out);

}  // namespace spemb
