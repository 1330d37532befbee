#pragma once

// Counter-based normal variate generation for reproducible Monte Carlo.
// The k-th variate of path p under (seed, stream) is a pure function of
// (seed, stream, p, k), so ensembles are identical for any scheduling or
// thread count. The block cipher is Philox2x64 with 10 rounds.

#include <cmath>
#include <cstdint>
#include <utility>

#include "theston/hilbert.hpp"

namespace theston {

enum class NoiseStream : std::uint64_t {
  kW = 0,      // Wiener noise driving the variance factor process
  kB = 1,      // Wiener noise driving the level process
  kExact = 2,  // direct Gaussian marginal sampling
};

namespace rng_detail {

inline constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ULL;
inline constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

struct U128 {
  std::uint64_t hi, lo;
};

inline U128 mul_wide(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  return {static_cast<std::uint64_t>(p >> 64), static_cast<std::uint64_t>(p)};
}

inline std::pair<std::uint64_t, std::uint64_t> philox2x64(std::uint64_t key,
                                                          std::uint64_t c0,
                                                          std::uint64_t c1) {
  for (int round = 0; round < 10; ++round) {
    U128 p = mul_wide(c0, kPhiloxM);
    c0 = p.hi ^ key ^ c1;
    c1 = p.lo;
    key += kWeyl;
  }
  return {c0, c1};
}

// Maps a 64-bit word into the open interval (0,1).
inline double to_open_unit(std::uint64_t u) {
  return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace rng_detail

// Stateless stream of N(0,1) variates indexed by a counter.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, NoiseStream stream, std::uint64_t path)
      : key_(seed ^ (static_cast<std::uint64_t>(stream) * rng_detail::kWeyl)),
        path_(path) {}

  // k-th variate of this stream; pure in (seed, stream, path, k).
  double operator()(std::uint64_t index) const {
    std::uint64_t block = index >> 1;
    auto [a, b] = rng_detail::philox2x64(key_, path_, block);
    double u1 = rng_detail::to_open_unit(a);
    double u2 = rng_detail::to_open_unit(b);
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    return (index & 1) ? r * std::sin(theta) : r * std::cos(theta);
  }

  // Fills `out` with variates at indices first, first+1, ...
  void fill(std::uint64_t first, HVector& out) const {
    Eigen::Index n = out.size();
    Eigen::Index i = 0;
    if (n > 0 && (first & 1)) {  // unaligned head
      out[0] = (*this)(first);
      i = 1;
    }
    for (; i + 1 < n; i += 2) {  // one cipher block per pair
      std::uint64_t idx = first + static_cast<std::uint64_t>(i);
      auto [a, b] = rng_detail::philox2x64(key_, path_, idx >> 1);
      double r = std::sqrt(-2.0 * std::log(rng_detail::to_open_unit(a)));
      double theta = 2.0 * M_PI * rng_detail::to_open_unit(b);
      out[i] = r * std::cos(theta);
      out[i + 1] = r * std::sin(theta);
    }
    if (i < n) out[i] = (*this)(first + static_cast<std::uint64_t>(i));
  }

 private:
  std::uint64_t key_;
  std::uint64_t path_;
};

inline double counter_normal(std::uint64_t seed, NoiseStream stream,
                             std::uint64_t path, std::uint64_t index) {
  return NormalStream(seed, stream, path)(index);
}

}  // namespace theston
