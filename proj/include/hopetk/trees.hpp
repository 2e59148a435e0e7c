#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hopetk/features.hpp"
#include "hopetk/labels.hpp"
#include "hopetk/linear_models.hpp"

namespace hopetk {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<std::int64_t> class_counts;  // samples reaching the node, per class
};

// Binary gini tree; split rule is x[feature] <= threshold with midpoint
// thresholds between adjacent distinct values.
struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int n_features = 0;
  std::vector<Label> classes;

  Label predict(const SparseVector& x) const;
  std::vector<Label> predict(const std::vector<SparseVector>& rows) const;
};

struct TreeOptions {
  int max_features = 0;  // per-split candidate features; 0 means all
  std::uint64_t seed = 0;
};

// Greedy growth by best gini-impurity decrease until nodes are pure or no
// split improves. Zero entries of sparse rows participate as an implicit
// zero-valued block, so TF-IDF columns need not be densified.
TreeModel train_tree(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                     int n_features, const TreeOptions& options = {});

struct ForestOptions {
  int n_estimators = 100;
  bool bootstrap = true;   // test hook: off trains every tree on the full set
  int max_features = -1;   // -1 means ceil(sqrt(n_features))
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  int n_features = 0;
  std::vector<Label> classes;
  ForestOptions options;

  Label predict(const SparseVector& x) const;  // plurality of tree votes
  std::vector<Label> predict(const std::vector<SparseVector>& rows) const;
};

// Bootstrap-resampled trees with per-split feature subsampling; per-tree
// seeds derive from the master seed, so results are reproducible and
// independent of any scheduling.
ForestModel train_forest(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                         int n_features, const ForestOptions& options = {});

// Dense test data helper: exact zeros become implicit.
std::vector<SparseVector> to_sparse_rows(const Eigen::MatrixXd& dense);

}  // namespace hopetk
