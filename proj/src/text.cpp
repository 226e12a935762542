#include "gear/text.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace gear {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char ch : text) {
        const bool word = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                          (ch >= '0' && ch <= '9') || ch >= 0x80;
        if (word) {
            cur.push_back(static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch - 'A' + 'a' : ch));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_token(std::string_view token, std::uint64_t seed) {
    std::uint64_t h = fnv1a64(token) ^ (seed * 0x9e3779b97f4a7c15ULL);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

bool is_stopword(std::string_view token) {
    static constexpr std::array<std::string_view, 24> kWords{
        "a",  "an",  "and", "are", "as", "at", "be",  "by",   "for", "from", "has", "he",
        "in", "is",  "it",  "its", "of", "on", "the", "that", "to",  "was",  "were", "with"};
    return std::find(kWords.begin(), kWords.end(), token) != kWords.end();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace gear
