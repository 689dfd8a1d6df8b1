#pragma once

#include <charconv>
#include <string>

namespace epitext {

/// Shortest round-trip decimal form of a double; deterministic across runs.
inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace epitext
