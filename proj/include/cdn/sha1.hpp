#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace cdn {

// RFC 3174 SHA-1.
std::array<std::uint8_t, 20> sha1_digest(std::string_view data);

// Top `m` bits of the SHA-1 digest of `data`, 1 <= m <= 64.
std::uint64_t hash_id(std::string_view data, int m);

}  // namespace cdn
