#pragma once

#include <cstdint>
#include <string>

namespace satire {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr const char* kCheckpointMagic = "4LHN1";

// FNV-1a, used to stamp artifacts with a stable hash of their config.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace satire
