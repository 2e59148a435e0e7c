#include "hopetk/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace hopetk {

std::string_view to_string(LanguageTag tag) {
  switch (tag) {
    case LanguageTag::english:
      return "english";
    case LanguageTag::tamil:
      return "tamil";
    case LanguageTag::malayalam:
      return "malayalam";
    case LanguageTag::other:
      return "other";
  }
  return "?";
}

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::train:
      return "train";
    case SplitTag::valid:
      return "valid";
    case SplitTag::test:
      return "test";
  }
  return "?";
}

std::optional<LanguageTag> language_from_string(std::string_view name) {
  if (name == "english") return LanguageTag::english;
  if (name == "tamil") return LanguageTag::tamil;
  if (name == "malayalam") return LanguageTag::malayalam;
  if (name == "other") return LanguageTag::other;
  return std::nullopt;
}

std::optional<SplitTag> split_from_string(std::string_view name) {
  if (name == "train") return SplitTag::train;
  if (name == "valid" || name == "validation" || name == "dev") return SplitTag::valid;
  if (name == "test") return SplitTag::test;
  return std::nullopt;
}

LabeledCorpus load_corpus(const std::filesystem::path& path, const LabelAliasMap& aliases,
                          bool require_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CorpusError("cannot open corpus file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string content = buffer.str();

  // UTF-8 BOM is framing, not text.
  if (content.size() >= 3 && content.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    content.erase(0, 3);
  }

  LabeledCorpus corpus;
  std::vector<std::size_t> unknown_label_lines;
  std::string unknown_label_sample;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t eol = content.find('\n', pos);
    const bool last = (eol == std::string::npos);
    std::string line = content.substr(pos, last ? std::string::npos : eol - pos);
    pos = last ? content.size() + 1 : eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (last && line.empty()) break;  // trailing newline artifact
    ++line_no;

    const std::size_t first_tab = line.find('\t');
    std::string text;
    std::optional<std::string> label_field;
    if (first_tab == std::string::npos) {
      if (require_label) {
        throw CorpusError(path.string() + ":" + std::to_string(line_no) +
                          ": malformed record: expected text<TAB>label");
      }
      text = std::move(line);
    } else {
      if (line.find('\t', first_tab + 1) != std::string::npos) {
        throw CorpusError(path.string() + ":" + std::to_string(line_no) +
                          ": malformed record: embedded tab in text is not supported");
      }
      text = line.substr(0, first_tab);
      label_field = line.substr(first_tab + 1);
    }

    Document doc;
    doc.id = static_cast<std::int64_t>(corpus.documents.size());
    doc.text = std::move(text);
    if (label_field) {
      auto label = resolve_label(aliases, *label_field);
      if (!label) {
        unknown_label_lines.push_back(line_no);
        if (unknown_label_sample.empty()) unknown_label_sample = *label_field;
      } else {
        doc.label = *label;
      }
    }
    corpus.documents.push_back(std::move(doc));
  }

  if (!unknown_label_lines.empty()) {
    std::ostringstream msg;
    msg << path.string() << ": unknown label \"" << unknown_label_sample << "\" on line";
    if (unknown_label_lines.size() > 1) msg << "s";
    msg << " ";
    for (std::size_t i = 0; i < unknown_label_lines.size(); ++i) {
      if (i) msg << ", ";
      if (i == 20) {
        msg << "... (" << unknown_label_lines.size() << " total)";
        break;
      }
      msg << unknown_label_lines[i];
    }
    throw CorpusError(msg.str());
  }
  if (corpus.documents.empty()) {
    throw CorpusError("empty corpus file: " + path.string());
  }
  return corpus;
}

void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CorpusError("cannot write corpus file: " + path.string());
  }
  for (const Document& doc : corpus.documents) {
    out << doc.text;
    if (doc.label) out << '\t' << to_string(*doc.label);
    out << '\n';
  }
  if (!out) {
    throw CorpusError("short write to corpus file: " + path.string());
  }
}

std::array<std::size_t, kNumClasses> class_distribution(const LabeledCorpus& corpus) {
  std::array<std::size_t, kNumClasses> counts{};
  for (const Document& doc : corpus.documents) {
    if (doc.label) counts[static_cast<std::size_t>(*doc.label)]++;
  }
  return counts;
}

CorpusStats corpus_stats(const LabeledCorpus& corpus, const Tokenizer& tokenizer) {
  CorpusStats stats;
  std::array<std::unordered_set<std::string>, kNumClasses> vocab;
  for (const Document& doc : corpus.documents) {
    if (!doc.label) continue;
    const auto k = static_cast<std::size_t>(*doc.label);
    ClassStats& cs = stats.per_class[k];
    const std::vector<std::string> tokens = tokenizer.tokenize(doc.text);
    cs.documents++;
    cs.total_words += tokens.size();
    cs.max_length_words = std::max(cs.max_length_words, tokens.size());
    for (const std::string& token : tokens) vocab[k].insert(token);
  }
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    ClassStats& cs = stats.per_class[k];
    cs.unique_words = vocab[k].size();
    cs.avg_words_per_text =
        cs.documents == 0 ? 0.0
                          : static_cast<double>(cs.total_words) / static_cast<double>(cs.documents);
  }
  return stats;
}

std::string format_stats_text(const LabeledCorpus& corpus, const CorpusStats& stats) {
  std::ostringstream out;
  out << "language: " << to_string(corpus.language) << "  split: " << to_string(corpus.split)
      << "  documents: " << corpus.size() << "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-5s %10s %12s %12s %12s %12s\n", "class", "docs", "total",
                "unique", "max_len", "avg_words");
  out << line;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const ClassStats& cs = stats.per_class[k];
    std::snprintf(line, sizeof(line), "%-5s %10zu %12zu %12zu %12zu %12.2f\n",
                  std::string(to_string(kClassOrder[k])).c_str(), cs.documents, cs.total_words,
                  cs.unique_words, cs.max_length_words, cs.avg_words_per_text);
    out << line;
  }
  return out.str();
}

nlohmann::json stats_to_json(const LabeledCorpus& corpus, const CorpusStats& stats) {
  nlohmann::json per_label = nlohmann::json::object();
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const ClassStats& cs = stats.per_class[k];
    per_label[std::string(to_string(kClassOrder[k]))] = {
        {"documents", cs.documents},         {"total_words", cs.total_words},
        {"unique_words", cs.unique_words},   {"max_length_words", cs.max_length_words},
        {"avg_words_per_text", cs.avg_words_per_text},
    };
  }
  return nlohmann::json{{"language", std::string(to_string(corpus.language))},
                        {"split", std::string(to_string(corpus.split))},
                        {"per_label", per_label}};
}

}  // namespace hopetk
