#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace dsc::rng {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Purpose tags for substream identifiers. Each tag owns the top 16 bits of
/// a 64-bit stream id, the low 48 bits carry a sensor index or epoch.
enum class Purpose : std::uint16_t {
  Placement = 1,
  Sample = 2,
  Failure = 3,
  Selection = 4,
  Series = 5,
};

constexpr std::uint64_t stream_id(Purpose purpose, std::uint64_t index) {
  return (static_cast<std::uint64_t>(purpose) << 48) | (index & ((std::uint64_t{1} << 48) - 1));
}

/// Counter-based random stream keyed by (seed, stream). Draw k is a pure
/// function of (seed, stream, k), so any draw can be reproduced without
/// replaying earlier ones.
///
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return bits_at(seed_, stream_, position_++); }

  /// Uniform double on [0, 1) with 53 bits of resolution.
  double uniform() { return to_unit(operator()()); }

  /// Unbiased integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t position() const { return position_; }
  void seek(std::uint64_t position) { position_ = position; }

  static result_type bits_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
  static double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return to_unit(bits_at(seed, stream, index));
  }

  static constexpr double to_unit(result_type bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
};

}  // namespace dsc::rng
