#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "hopetk/corpus.hpp"
#include "hopetk/tokenizer.hpp"

namespace hopetk {

struct FeatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Token ids 1..V in first-occurrence order; 0 is reserved for padding and
// V+1 addresses unknown tokens in sequence mode.
class Vocabulary {
 public:
  int add(const std::string& token);      // returns existing or new id
  int lookup(std::string_view token) const;  // 0 when absent
  const std::string& token(int id) const;    // valid for 1..size()

  int size() const { return static_cast<int>(tokens_.size()); }
  int padding_id() const { return 0; }
  int unknown_id() const { return size() + 1; }

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

Vocabulary build_vocabulary(const LabeledCorpus& corpus, const Tokenizer& tokenizer);

// One document feature: strictly increasing 0-based column indices.
struct SparseEntry {
  int index;
  double value;
};
using SparseVector = std::vector<SparseEntry>;

double dot(const Eigen::VectorXd& dense, const SparseVector& sparse);
double squared_norm(const SparseVector& sparse);

struct TfIdfOptions {
  int min_df = 1;         // documents
  double max_df = 1.0;    // proportion
};

// Vocabulary + smoothed idf table, fitted on the train split only.
// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
class TfIdfModel {
 public:
  TfIdfModel() = default;
  TfIdfModel(Vocabulary vocab, std::vector<double> idf, Tokenizer tokenizer);

  // weight(t) = term count * idf(t), L2-normalized; OOV tokens ignored.
  SparseVector transform(std::string_view text) const;
  std::vector<SparseVector> transform(const LabeledCorpus& corpus) const;

  int dimension() const { return vocabulary_.size(); }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }

 private:
  Vocabulary vocabulary_;
  std::vector<double> idf_;  // idf_[i] for token id i+1
  Tokenizer tokenizer_;
};

TfIdfModel fit_tfidf(const LabeledCorpus& train, const Tokenizer& tokenizer,
                     const TfIdfOptions& options = {});

// First max_len token ids, unknown tokens mapped to vocab.unknown_id(),
// tail-padded with 0. Output length is exactly max_len.
std::vector<int> encode_sequence(const Vocabulary& vocab, const Tokenizer& tokenizer,
                                 std::string_view text, int max_len);

std::vector<std::vector<int>> encode_corpus(const Vocabulary& vocab, const Tokenizer& tokenizer,
                                            const LabeledCorpus& corpus, int max_len);

// Column subset kept for tree training (document-frequency pruning).
// `selected` holds the original column per new column, ascending; empty
// means identity.
struct FeatureMap {
  std::vector<int> selected;

  bool identity() const { return selected.empty(); }
  int dimension_or(int full) const { return identity() ? full : static_cast<int>(selected.size()); }
  SparseVector apply(const SparseVector& row) const;
  std::vector<SparseVector> apply(const std::vector<SparseVector>& rows) const;
};

// Top `keep` columns by document frequency (ties to the lower column index).
FeatureMap top_df_features(const std::vector<SparseVector>& rows, int n_features, int keep);

// (V+2) x dim. Row 0 is the padding row and stays all-zero.
struct EmbeddingMatrix {
  Eigen::MatrixXd rows;
  bool trainable = true;
};

// Seeded uniform(-0.25, 0.25) rows for every token plus the unknown row.
EmbeddingMatrix random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed);

// Text vector format: `count dim` header then `token v1 .. vdim` lines.
// In-vocabulary tokens take the file values; absent tokens fall back to the
// seeded random initialization.
EmbeddingMatrix load_pretrained_vectors(const std::filesystem::path& path,
                                        const Vocabulary& vocab, int dim, std::uint64_t seed);

}  // namespace hopetk
