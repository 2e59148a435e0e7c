#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace hopetk {

// Target classes of the task, in the fixed report order.
enum class Label : std::uint8_t { HS = 0, NHS = 1, NIL = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr std::array<Label, kNumClasses> kClassOrder = {Label::HS, Label::NHS,
                                                               Label::NIL};

std::string_view to_string(Label label);
std::optional<Label> label_from_string(std::string_view name);

// Maps external label spellings (e.g. "Non_hope_speech") onto Label values.
using LabelAliasMap = std::unordered_map<std::string, Label>;

// Canonical names plus the public shared-task spellings.
LabelAliasMap default_label_aliases();

std::optional<Label> resolve_label(const LabelAliasMap& aliases, const std::string& name);

}  // namespace hopetk
