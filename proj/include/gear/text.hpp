#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gear {

// Lowercases ASCII and splits on anything that is not a letter, digit or a
// non-ASCII byte. "Al Jardine's" -> {"al", "jardine", "s"}.
std::vector<std::string> tokenize(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Seeded multiplicative token hash; stable across platforms and runs.
std::uint64_t hash_token(std::string_view token, std::uint64_t seed);

// Function words ignored by title matching and overlap features.
bool is_stopword(std::string_view token);

// Lowercase hex of a 64-bit value, zero padded.
std::string hex64(std::uint64_t v);

} // namespace gear
