#pragma once

#include <cstdint>
#include <limits>

namespace selfsim {

//! Counter-based generator: output i of stream s under seed k is a fixed
//! hash of (k, s, i), so streams can be consumed on any thread in any order
//! and still reproduce bit for bit.
class CounterRng
{
public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL)))
  {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  //! Uniform on [0, 1) from the top 53 bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  //! Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform01() * n) % n; }

  std::uint64_t counter() const { return counter_; }

private:
  //! splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t z)
  {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

} // namespace selfsim
