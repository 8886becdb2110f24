#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pate {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// mt19937_64 plus rejection-sampled bounded draws. std::uniform_int_distribution
// and std::shuffle are implementation-defined, this is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, n). n must be nonzero.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    std::uint64_t r = eng_();
    while (r < threshold) r = eng_();
    return r % n;
  }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

// Accumulates in ascending value order so the result does not depend on the
// input permutation.
inline double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

inline double sorted_mean(std::vector<double> values) {
  const double n = static_cast<double>(values.size());
  return sorted_sum(std::move(values)) / n;
}

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// floor(n * fraction) under exact rational arithmetic. Fractions like 0.7 are
// not representable, so the raw product can land a few ulps below an integer;
// snap before flooring.
inline std::size_t floor_fraction(std::size_t n, double fraction) {
  const double x = static_cast<double>(n) * fraction;
  const double r = std::nearbyint(x);
  const double slop =
      32.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
  if (std::abs(x - r) <= slop) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::floor(x));
}

}  // namespace pate
