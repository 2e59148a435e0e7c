#include "hopetk/tokenizer.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <stdexcept>

namespace hopetk {

namespace {

const icu::Normalizer2& nfc() {
  UErrorCode ec = U_ZERO_ERROR;
  const icu::Normalizer2* instance = icu::Normalizer2::getNFCInstance(ec);
  if (U_FAILURE(ec) || instance == nullptr) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  return *instance;
}

}  // namespace

std::string Tokenizer::normalize(std::string_view text) const {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  UErrorCode ec = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc().normalize(s, ec);
  if (U_FAILURE(ec)) throw std::runtime_error("Unicode normalization failed");
  if (lowercase) normalized.toLower(icu::Locale::getRoot());
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  const std::string normalized = normalize(text);
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(normalized);

  std::vector<std::string> tokens;
  icu::UnicodeString current;
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    if (u_isUWhiteSpace(c)) {
      if (!current.isEmpty()) {
        std::string token;
        current.toUTF8String(token);
        tokens.push_back(std::move(token));
        current.remove();
      }
    } else {
      current.append(c);
    }
    i += U16_LENGTH(c);
  }
  if (!current.isEmpty()) {
    std::string token;
    current.toUTF8String(token);
    tokens.push_back(std::move(token));
  }
  return tokens;
}

}  // namespace hopetk
