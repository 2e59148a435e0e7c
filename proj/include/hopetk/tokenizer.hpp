#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hopetk {

// NFC-normalizing whitespace tokenizer. Corpus statistics and every feature
// path share this so word counts and model vocabularies agree.
struct Tokenizer {
  bool lowercase = true;

  // NFC normalization, optional lowercasing (root locale).
  std::string normalize(std::string_view text) const;

  // normalize() then split on Unicode whitespace; never yields empty tokens.
  std::vector<std::string> tokenize(std::string_view text) const;
};

}  // namespace hopetk
