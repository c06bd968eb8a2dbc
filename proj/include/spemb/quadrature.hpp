#pragma once

#include <cstddef>
#include <vector>

namespace spemb {

struct GaussLegendre {
  std::vector<double> nodes;    // ascending in (-1, 1)
  std::vector<double> weights;  // sum to 2
};

// n-point rule, exact for polynomials of degree 2n-1.
GaussLegendre gauss_legendre(std::size_t n);

// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

}  // namespace spemb
