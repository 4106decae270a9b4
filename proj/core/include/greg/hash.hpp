#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace greg {

// FNV-1a 64-bit. Used for content fingerprints in metadata and manifests;
// not a cryptographic hash.
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path);

// Hash a list of strings with length framing so concatenation is unambiguous.
std::uint64_t fnv1a64_strings(const std::vector<std::string>& items);

std::string hash_hex(std::uint64_t h);

}  // namespace greg
