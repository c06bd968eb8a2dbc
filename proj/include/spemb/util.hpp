#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace spemb {

// Shortest round-trip text is not used: CSV and JSON numbers are written
// with 17 significant digits so that refits see the exact doubles.
std::string format_double(double v);

// Worker count for parallel_for; 0 means hardware concurrency.
void set_jobs(unsigned jobs);
unsigned jobs();

// Calls fn(i) for i in [0, n). Results must be written per index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::uint64_t fnv1a64(const std::string& data);

}  // namespace spemb
