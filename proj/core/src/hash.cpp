#include "greg/hash.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace greg {

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path);
    std::uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    }
    return h;
}

std::uint64_t fnv1a64_strings(const std::vector<std::string>& items) {
    std::uint64_t h = kFnvOffset;
    for (const auto& s : items) {
        std::uint64_t len = s.size();
        h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&len), sizeof(len)), h);
        h = fnv1a64(s, h);
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace greg
