#pragma once

#include <cstdint>
#include <string_view>

namespace psb {

// FNV-1a 64-bit. Used for stable per-cell RNG salts and file fingerprints.
constexpr std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace psb
