#include "fedgala/rng.hpp"

#include <cmath>
#include <numbers>

#include "fedgala/errors.hpp"

namespace fedgala {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream RngStream::derive(std::uint64_t tag, std::uint64_t index) const noexcept {
  std::uint64_t s = stream_id ^ 0xD1B54A32D192ED03ULL;
  std::uint64_t h = splitmix64(s);
  s = h ^ (tag * 0xA24BAED4963EE407ULL);
  h = splitmix64(s);
  s = h ^ (index * 0x9FB21C651E98DF25ULL);
  h = splitmix64(s);
  return RngStream{seed, h};
}

Rng::Rng(const RngStream& stream) noexcept {
  std::uint64_t s = stream.seed;
  const std::uint64_t a = splitmix64(s);
  s = a ^ stream.stream_id;
  for (auto& word : state_) word = splitmix64(s);
  // xoshiro must not start from the all-zero state.
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  // Rejection on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % bound;
}

double Rng::normal() noexcept {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(phi);
  has_cached_normal_ = true;
  return r * std::cos(phi);
}

RealVec sample_standard_normal(const RngStream& stream, std::size_t n) {
  if (n == 0) throw EmptyRequestError("sample_standard_normal: n must be >= 1");
  Rng rng(stream);
  RealVec out(n);
  for (auto& x : out) x = rng.normal();
  return out;
}

}  // namespace fedgala
