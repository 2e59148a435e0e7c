#include "hopetk/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

namespace hopetk {

int Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.try_emplace(token, static_cast<int>(tokens_.size()) + 1);
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocabulary::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? 0 : it->second;
}

const std::string& Vocabulary::token(int id) const {
  return tokens_.at(static_cast<std::size_t>(id) - 1);
}

Vocabulary build_vocabulary(const LabeledCorpus& corpus, const Tokenizer& tokenizer) {
  Vocabulary vocab;
  for (const Document& doc : corpus.documents) {
    for (const std::string& token : tokenizer.tokenize(doc.text)) {
      vocab.add(token);
    }
  }
  return vocab;
}

double dot(const Eigen::VectorXd& dense, const SparseVector& sparse) {
  double sum = 0.0;
  for (const SparseEntry& e : sparse) sum += dense[e.index] * e.value;
  return sum;
}

double squared_norm(const SparseVector& sparse) {
  double sum = 0.0;
  for (const SparseEntry& e : sparse) sum += e.value * e.value;
  return sum;
}

TfIdfModel::TfIdfModel(Vocabulary vocab, std::vector<double> idf, Tokenizer tokenizer)
    : vocabulary_(std::move(vocab)), idf_(std::move(idf)), tokenizer_(tokenizer) {}

SparseVector TfIdfModel::transform(std::string_view text) const {
  std::unordered_map<int, int> counts;
  for (const std::string& token : tokenizer_.tokenize(text)) {
    const int id = vocabulary_.lookup(token);
    if (id != 0) counts[id]++;
  }
  SparseVector vec;
  vec.reserve(counts.size());
  for (const auto& [id, count] : counts) {
    vec.push_back({id - 1, static_cast<double>(count) * idf_[static_cast<std::size_t>(id) - 1]});
  }
  std::sort(vec.begin(), vec.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  const double norm = std::sqrt(squared_norm(vec));
  if (norm > 0.0) {
    for (SparseEntry& e : vec) e.value /= norm;
  }
  return vec;
}

std::vector<SparseVector> TfIdfModel::transform(const LabeledCorpus& corpus) const {
  std::vector<SparseVector> rows;
  rows.reserve(corpus.size());
  for (const Document& doc : corpus.documents) rows.push_back(transform(doc.text));
  return rows;
}

TfIdfModel fit_tfidf(const LabeledCorpus& train, const Tokenizer& tokenizer,
                     const TfIdfOptions& options) {
  if (train.empty()) throw FeatureError("fit_tfidf: empty corpus");

  Vocabulary all = build_vocabulary(train, tokenizer);
  if (all.size() == 0) throw FeatureError("fit_tfidf: corpus has zero tokens");

  std::vector<std::int64_t> df(static_cast<std::size_t>(all.size()), 0);
  std::vector<int> seen_at(static_cast<std::size_t>(all.size()), -1);
  int doc_index = 0;
  for (const Document& doc : train.documents) {
    for (const std::string& token : tokenizer.tokenize(doc.text)) {
      const int id = all.lookup(token);
      if (seen_at[static_cast<std::size_t>(id) - 1] != doc_index) {
        seen_at[static_cast<std::size_t>(id) - 1] = doc_index;
        df[static_cast<std::size_t>(id) - 1]++;
      }
    }
    ++doc_index;
  }

  const double n_docs = static_cast<double>(train.size());
  const auto max_df_docs = static_cast<std::int64_t>(options.max_df * n_docs);

  Vocabulary kept;
  std::vector<double> idf;
  for (int id = 1; id <= all.size(); ++id) {
    const std::int64_t d = df[static_cast<std::size_t>(id) - 1];
    if (d < options.min_df || d > max_df_docs) continue;
    kept.add(all.token(id));
    idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(d))) + 1.0);
  }
  if (kept.size() == 0) throw FeatureError("fit_tfidf: document-frequency bounds empty the vocabulary");
  return TfIdfModel(std::move(kept), std::move(idf), tokenizer);
}

std::vector<int> encode_sequence(const Vocabulary& vocab, const Tokenizer& tokenizer,
                                 std::string_view text, int max_len) {
  std::vector<int> ids(static_cast<std::size_t>(max_len), vocab.padding_id());
  const std::vector<std::string> tokens = tokenizer.tokenize(text);
  const std::size_t n = std::min(tokens.size(), static_cast<std::size_t>(max_len));
  for (std::size_t i = 0; i < n; ++i) {
    const int id = vocab.lookup(tokens[i]);
    ids[i] = id == 0 ? vocab.unknown_id() : id;
  }
  return ids;
}

std::vector<std::vector<int>> encode_corpus(const Vocabulary& vocab, const Tokenizer& tokenizer,
                                            const LabeledCorpus& corpus, int max_len) {
  std::vector<std::vector<int>> rows;
  rows.reserve(corpus.size());
  for (const Document& doc : corpus.documents) {
    rows.push_back(encode_sequence(vocab, tokenizer, doc.text, max_len));
  }
  return rows;
}

SparseVector FeatureMap::apply(const SparseVector& row) const {
  if (identity()) return row;
  SparseVector out;
  std::size_t i = 0, j = 0;
  while (i < row.size() && j < selected.size()) {
    if (row[i].index < selected[j]) {
      ++i;
    } else if (row[i].index > selected[j]) {
      ++j;
    } else {
      out.push_back({static_cast<int>(j), row[i].value});
      ++i;
      ++j;
    }
  }
  return out;
}

std::vector<SparseVector> FeatureMap::apply(const std::vector<SparseVector>& rows) const {
  if (identity()) return rows;
  std::vector<SparseVector> out;
  out.reserve(rows.size());
  for (const SparseVector& row : rows) out.push_back(apply(row));
  return out;
}

FeatureMap top_df_features(const std::vector<SparseVector>& rows, int n_features, int keep) {
  FeatureMap map;
  if (keep <= 0 || keep >= n_features) return map;  // identity
  std::vector<std::int64_t> df(static_cast<std::size_t>(n_features), 0);
  for (const SparseVector& row : rows) {
    for (const SparseEntry& e : row) df[static_cast<std::size_t>(e.index)]++;
  }
  std::vector<int> order(static_cast<std::size_t>(n_features));
  for (int i = 0; i < n_features; ++i) order[static_cast<std::size_t>(i)] = i;
  std::nth_element(order.begin(), order.begin() + keep, order.end(), [&](int a, int b) {
    if (df[static_cast<std::size_t>(a)] != df[static_cast<std::size_t>(b)]) {
      return df[static_cast<std::size_t>(a)] > df[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  map.selected.assign(order.begin(), order.begin() + keep);
  std::sort(map.selected.begin(), map.selected.end());
  return map;
}

EmbeddingMatrix random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed) {
  EmbeddingMatrix embedding;
  embedding.rows = Eigen::MatrixXd::Zero(vocab.size() + 2, dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.25, 0.25);
  for (int r = 1; r < embedding.rows.rows(); ++r) {
    for (int c = 0; c < dim; ++c) embedding.rows(r, c) = uniform(rng);
  }
  return embedding;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace

EmbeddingMatrix load_pretrained_vectors(const std::filesystem::path& path,
                                        const Vocabulary& vocab, int dim, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw FeatureError("cannot open vector file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FeatureError("empty vector file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const auto header = split_fields(line);
    if (header.size() != 2) {
      throw FeatureError(path.string() + ": malformed header, expected `count dim`");
    }
    const int file_dim = std::atoi(std::string(header[1]).c_str());
    if (file_dim != dim) {
      throw FeatureError(path.string() + ": dimension mismatch: file has " +
                         std::to_string(file_dim) + ", requested " + std::to_string(dim));
    }
  }

  // Missing tokens keep their seeded random rows, so the fallback is
  // reproducible regardless of file content.
  EmbeddingMatrix embedding = random_embeddings(vocab, dim, seed);
  embedding.trainable = false;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw FeatureError(path.string() + ":" + std::to_string(line_no) +
                         ": malformed line: expected token plus " + std::to_string(dim) +
                         " values, got " + std::to_string(fields.size()) + " fields");
    }
    const int id = vocab.lookup(fields[0]);
    if (id == 0) continue;
    for (int c = 0; c < dim; ++c) {
      char* end = nullptr;
      const std::string field(fields[static_cast<std::size_t>(c) + 1]);
      const double value = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0') {
        throw FeatureError(path.string() + ":" + std::to_string(line_no) +
                           ": malformed value `" + field + "`");
      }
      embedding.rows(id, c) = value;
    }
  }
  return embedding;
}

}  // namespace hopetk
