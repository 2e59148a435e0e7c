#include "hopetk/labels.hpp"

namespace hopetk {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::HS:
      return "HS";
    case Label::NHS:
      return "NHS";
    case Label::NIL:
      return "NIL";
  }
  return "?";
}

std::optional<Label> label_from_string(std::string_view name) {
  if (name == "HS") return Label::HS;
  if (name == "NHS") return Label::NHS;
  if (name == "NIL") return Label::NIL;
  return std::nullopt;
}

LabelAliasMap default_label_aliases() {
  LabelAliasMap aliases;
  aliases.emplace("HS", Label::HS);
  aliases.emplace("NHS", Label::NHS);
  aliases.emplace("NIL", Label::NIL);
  aliases.emplace("Hope_speech", Label::HS);
  aliases.emplace("Non_hope_speech", Label::NHS);
  aliases.emplace("not-English", Label::NIL);
  aliases.emplace("not-Tamil", Label::NIL);
  aliases.emplace("not-malayalam", Label::NIL);
  aliases.emplace("not-Malayalam", Label::NIL);
  return aliases;
}

std::optional<Label> resolve_label(const LabelAliasMap& aliases, const std::string& name) {
  auto it = aliases.find(name);
  if (it == aliases.end()) return std::nullopt;
  return it->second;
}

}  // namespace hopetk
