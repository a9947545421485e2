#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace wernet {

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t stable_hash(std::string_view text);
std::uint64_t stable_hash(std::span<const unsigned char> bytes);

/// sub_seed = master ^ stable_hash(component)
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view component) {
  return master ^ stable_hash(component);
}

}  // namespace wernet
