#pragma once

// Sobol low-discrepancy sequence with Joe-Kuo direction numbers.

#include <array>
#include <cstdint>
#include <vector>

#include "espin/core.hpp"

namespace espin {

namespace detail {

struct SobolPoly {
  unsigned degree;
  std::uint32_t coeffs;  ///< interior coefficient bits a
  std::array<std::uint32_t, 8> m;
};

// Dimensions 2..21 of the new-joe-kuo-6.21201 table (dimension 1 is the
// van der Corput sequence).
inline constexpr std::array<SobolPoly, 20> kJoeKuo = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

}  // namespace detail

/// Deterministic Sobol point generator over [0,1)^d.
///
/// Point k is computed directly from k (no Gray-code state), so any index
/// range can be generated independently. The stream starts at index 1,
/// skipping the all-zeros point, unless `offset` says otherwise.
class SobolStream {
 public:
  static constexpr std::size_t kMaxDimension = detail::kJoeKuo.size() + 1;
  static constexpr unsigned kBits = 32;

  explicit SobolStream(std::size_t dimension, std::uint64_t offset = 1) : dim_(dimension), index_(offset) {
    if (dimension < 1) throw Error("sobol_dimension", "Sobol dimension must be >= 1");
    if (dimension > kMaxDimension)
      throw Error("sobol_dimension", "Sobol dimension " + std::to_string(dimension) +
                                         " exceeds direction table (max " + std::to_string(kMaxDimension) + ")");
    directions_.resize(dimension);
    for (unsigned b = 0; b < kBits; ++b) directions_[0][b] = 1u << (kBits - 1 - b);
    for (std::size_t j = 1; j < dimension; ++j) {
      const auto& poly = detail::kJoeKuo[j - 1];
      auto& v = directions_[j];
      const unsigned s = poly.degree;
      for (unsigned b = 0; b < std::min(s, kBits); ++b) v[b] = poly.m[b] << (kBits - 1 - b);
      for (unsigned b = s; b < kBits; ++b) {
        std::uint32_t x = v[b - s] ^ (v[b - s] >> s);
        for (unsigned k = 1; k < s; ++k)
          if ((poly.coeffs >> (s - 1 - k)) & 1u) x ^= v[b - k];
        v[b] = x;
      }
    }
  }

  std::size_t dimension() const { return dim_; }
  std::uint64_t index() const { return index_; }

  /// Coordinates of point `k`.
  std::vector<double> point(std::uint64_t k) const {
    std::vector<double> x(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
      std::uint32_t acc = 0;
      std::uint64_t bits = k;
      for (unsigned b = 0; bits && b < kBits; ++b, bits >>= 1)
        if (bits & 1u) acc ^= directions_[j][b];
      x[j] = static_cast<double>(acc) * 0x1.0p-32;
    }
    return x;
  }

  std::vector<double> next() { return point(index_++); }

 private:
  std::size_t dim_;
  std::uint64_t index_;
  std::vector<std::array<std::uint32_t, kBits>> directions_;
};

/// `n` consecutive points from the stream.
inline std::vector<std::vector<double>> sobol_points(std::size_t d, std::size_t n, SobolStream& stream) {
  if (stream.dimension() != d) throw Error("sobol_dimension", "stream dimension mismatch");
  std::vector<std::vector<double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(stream.next());
  return out;
}

}  // namespace espin
