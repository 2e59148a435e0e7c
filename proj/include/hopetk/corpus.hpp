#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hopetk/labels.hpp"
#include "hopetk/tokenizer.hpp"

namespace hopetk {

enum class LanguageTag { english, tamil, malayalam, other };
enum class SplitTag { train, valid, test };

std::string_view to_string(LanguageTag tag);
std::string_view to_string(SplitTag tag);
std::optional<LanguageTag> language_from_string(std::string_view name);
std::optional<SplitTag> split_from_string(std::string_view name);

struct Document {
  std::int64_t id = 0;
  std::string text;  // byte-exact as read, minus record framing
  std::optional<Label> label;
};

// Ordered document collection; immutable after load.
struct LabeledCorpus {
  std::vector<Document> documents;
  LanguageTag language = LanguageTag::other;
  SplitTag split = SplitTag::train;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
};

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reads UTF-8 TSV, one `text<TAB>label` record per line. Embedded tabs are a
// malformed record. With require_label=false a bare one-column `text` line is
// accepted (prediction input); a present label column is still resolved.
LabeledCorpus load_corpus(const std::filesystem::path& path, const LabelAliasMap& aliases,
                          bool require_label = true);

void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path);

// Per-label document counts in kClassOrder; unlabeled documents are not counted.
std::array<std::size_t, kNumClasses> class_distribution(const LabeledCorpus& corpus);

struct ClassStats {
  std::size_t documents = 0;
  std::size_t total_words = 0;
  std::size_t unique_words = 0;
  std::size_t max_length_words = 0;
  double avg_words_per_text = 0.0;
};

struct CorpusStats {
  std::array<ClassStats, kNumClasses> per_class;
};

CorpusStats corpus_stats(const LabeledCorpus& corpus, const Tokenizer& tokenizer);

// Aligned text table; averages shown to 2 decimals.
std::string format_stats_text(const LabeledCorpus& corpus, const CorpusStats& stats);
nlohmann::json stats_to_json(const LabeledCorpus& corpus, const CorpusStats& stats);

}  // namespace hopetk
