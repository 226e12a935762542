#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace gear {

// Declaration order is the argmax tie-break order.
enum class Label : std::size_t { Supported = 0, Refuted = 1, Nei = 2 };

inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::array<Label, kNumLabels> kAllLabels{Label::Supported, Label::Refuted,
                                                          Label::Nei};

inline constexpr std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }

// Canonical internal names: SUPPORTED, REFUTED, NEI.
std::string_view label_name(Label l);
// FEVER serialization: SUPPORTS, REFUTES, NOT ENOUGH INFO.
std::string_view fever_label_name(Label l);
// Accepts both spellings; throws ValidationError otherwise.
Label parse_label(std::string_view s);

} // namespace gear
