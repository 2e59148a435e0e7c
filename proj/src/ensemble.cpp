#include "hopetk/ensemble.hpp"

#include <array>
#include <stdexcept>

namespace hopetk {

std::vector<Label> majority_vote(const std::vector<std::vector<Label>>& member_predictions) {
  if (member_predictions.size() < 2) {
    throw std::invalid_argument("majority_vote: need at least two members");
  }
  const std::size_t n = member_predictions.front().size();
  for (const auto& preds : member_predictions) {
    if (preds.size() != n) {
      throw std::invalid_argument("majority_vote: member predictions differ in length");
    }
  }
  if (n == 0) throw std::invalid_argument("majority_vote: empty predictions");

  std::vector<Label> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<int, kNumClasses> votes{};
    for (const auto& preds : member_predictions) {
      votes[static_cast<std::size_t>(preds[i])]++;
    }
    int best_count = 0;
    for (int v : votes) best_count = std::max(best_count, v);
    // First member whose prediction carries the winning count.
    Label winner = member_predictions.front()[i];
    for (const auto& preds : member_predictions) {
      if (votes[static_cast<std::size_t>(preds[i])] == best_count) {
        winner = preds[i];
        break;
      }
    }
    out.push_back(winner);
  }
  return out;
}

std::vector<Label> EnsembleModel::predict(const std::vector<SparseVector>& rows) const {
  const std::vector<SparseVector> tree_rows = tree_features.apply(rows);
  return majority_vote(
      {svm.predict(rows), lr.predict(rows), dt.predict(tree_rows), rf.predict(tree_rows)});
}

}  // namespace hopetk
