#pragma once

#include <vector>

#include "hopetk/labels.hpp"
#include "hopetk/linear_models.hpp"
#include "hopetk/trees.hpp"

namespace hopetk {

// Per position, the most frequent label across members. Ties go to the label
// predicted by the earliest member in configured order (among the tied
// labels), so member order is part of the policy.
std::vector<Label> majority_vote(const std::vector<std::vector<Label>>& member_predictions);

// Fixed member order [SVM, LR, DT, RF]; SVM leads tie-breaking. The tree
// members see the (possibly df-pruned) column subset in tree_features.
struct EnsembleModel {
  LinearModel svm;
  LinearModel lr;
  TreeModel dt;
  ForestModel rf;
  FeatureMap tree_features;

  std::vector<Label> predict(const std::vector<SparseVector>& rows) const;
};

}  // namespace hopetk
