#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "qctl/operator.hpp"

namespace qctl {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Generator for the named substream (seed, name, index). Every random draw in
/// the toolkit goes through one of these; there is no global generator.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  const std::uint64_t s =
      detail::splitmix64(detail::splitmix64(seed ^ detail::fnv1a(name)) + detail::splitmix64(index));
  return std::mt19937_64(s);
}

/// Matrix with i.i.d. complex gaussian entries, E|z|^2 = scale^2.
inline Matrix random_gaussian(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale / std::sqrt(2.0));
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = nd(rng);
      const double im = nd(rng);
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, Index n, double scale = 1.0) {
  return hermitian_part(random_gaussian(rng, n, n, scale));
}

/// B B* / n for a gaussian B: psd, generically full rank.
inline Matrix random_psd(std::mt19937_64& rng, Index n, double scale = 1.0) {
  const Matrix b = random_gaussian(rng, n, n, scale);
  return hermitian_part(b * b.adjoint() / static_cast<double>(n));
}

inline Vector random_unit_vector(std::mt19937_64& rng, Index n) {
  Vector v = random_gaussian(rng, n, 1);
  return v / v.norm();
}

}  // namespace qctl
