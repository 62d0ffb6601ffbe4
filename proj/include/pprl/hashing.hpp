#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace pprl {

// SipHash-2-4 with a 128-bit key, 64-bit output. Keyed so parties sharing the
// secrets produce identical digests while outsiders cannot precompute them.
std::uint64_t siphash24(std::uint64_t k0, std::uint64_t k1, std::string_view data);

// Stretch an arbitrary secret string into a 128-bit SipHash key.
struct HashKey {
  std::uint64_t k0 = 0;
  std::uint64_t k1 = 0;

  static HashKey from_secret(std::string_view secret);

  std::uint64_t digest(std::string_view data) const { return siphash24(k0, k1, data); }

  bool operator==(const HashKey&) const = default;
};

}  // namespace pprl
