#pragma once

#include <array>
#include <cstdint>

namespace dmpanim {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123). Output is
/// a pure function of (key, counter), so any draw can be reproduced without
/// replaying a stream.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(Key key) : key_(key) {}
  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter counter) const;

  /// Standard normal draw for a 64-bit counter index (Box-Muller on two
  /// 53-bit uniforms taken from one Philox block).
  double normal(std::uint64_t index) const;

 private:
  Key key_;
};

}  // namespace dmpanim
