#include "gear/label.hpp"

#include <string>

#include "gear/error.hpp"

namespace gear {

std::string_view label_name(Label l) {
    switch (l) {
    case Label::Supported: return "SUPPORTED";
    case Label::Refuted: return "REFUTED";
    case Label::Nei: return "NEI";
    }
    return "?";
}

std::string_view fever_label_name(Label l) {
    switch (l) {
    case Label::Supported: return "SUPPORTS";
    case Label::Refuted: return "REFUTES";
    case Label::Nei: return "NOT ENOUGH INFO";
    }
    return "?";
}

Label parse_label(std::string_view s) {
    if (s == "SUPPORTS" || s == "SUPPORTED") return Label::Supported;
    if (s == "REFUTES" || s == "REFUTED") return Label::Refuted;
    if (s == "NOT ENOUGH INFO" || s == "NEI") return Label::Nei;
    throw ValidationError("unknown label '" + std::string(s) + "'");
}

} // namespace gear
