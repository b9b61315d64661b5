#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedgala/core_math.hpp"

namespace fedgala {

/// Identifies a reproducible random sequence. Two streams with the same
/// (seed, stream_id) produce the same draws on every platform.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  /// Child stream keyed by a tag and an index, e.g. derive(kShuffle, round).
  RngStream derive(std::uint64_t tag, std::uint64_t index = 0) const noexcept;

  friend bool operator==(const RngStream&, const RngStream&) = default;
};

/// xoshiro256** seeded through splitmix64. Distributions are implemented
/// here rather than through <random> because the standard distributions are
/// not specified bit-exactly across library vendors.
class Rng {
 public:
  explicit Rng(const RngStream& stream) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;

  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// n i.i.d. N(0, 1) draws. Throws EmptyRequestError when n == 0.
RealVec sample_standard_normal(const RngStream& stream, std::size_t n);

}  // namespace fedgala
