#include "hopetk/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hopetk {

namespace {

std::vector<Label> present_classes(const std::vector<Label>& y) {
  std::array<bool, kNumClasses> seen{};
  for (Label label : y) seen[static_cast<std::size_t>(label)] = true;
  std::vector<Label> classes;
  for (Label label : kClassOrder) {
    if (seen[static_cast<std::size_t>(label)]) classes.push_back(label);
  }
  return classes;
}

double gini_from_counts(const std::vector<std::int64_t>& counts, std::int64_t total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (std::int64_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct NonzeroEntry {
  double value;
  int sample;  // position within the node sample list's parent arrays
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;
  bool valid() const { return feature >= 0; }
};

// Scratch shared across nodes of one tree; per-feature buckets carry only the
// node's nonzero entries and are cleared through the touched list.
struct TreeScratch {
  std::vector<std::vector<NonzeroEntry>> buckets;
  std::vector<int> touched;
  std::vector<int> candidate_stamp;  // feature -> stamp epoch
  int epoch = 0;

  explicit TreeScratch(int n_features)
      : buckets(static_cast<std::size_t>(n_features)),
        candidate_stamp(static_cast<std::size_t>(n_features), -1) {}
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<SparseVector>& X, const std::vector<int>& targets, int n_classes,
              int n_features, const TreeOptions& options)
      : X_(X),
        targets_(targets),
        n_classes_(n_classes),
        n_features_(n_features),
        options_(options),
        rng_(options.seed),
        scratch_(n_features),
        all_features_(static_cast<std::size_t>(n_features)) {
    std::iota(all_features_.begin(), all_features_.end(), 0);
  }

  TreeModel build(std::vector<int> root_samples) {
    TreeModel model;
    model.n_features = n_features_;
    struct WorkItem {
      int node;
      std::vector<int> samples;
    };
    std::vector<WorkItem> stack;

    model.nodes.emplace_back();
    stack.push_back({0, std::move(root_samples)});

    while (!stack.empty()) {
      WorkItem item = std::move(stack.back());
      stack.pop_back();

      std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes_), 0);
      for (int s : item.samples) counts[static_cast<std::size_t>(targets_[s])]++;
      model.nodes[item.node].class_counts = counts;

      const auto total = static_cast<std::int64_t>(item.samples.size());
      const bool pure =
          std::count_if(counts.begin(), counts.end(), [](std::int64_t c) { return c > 0; }) <= 1;
      if (pure || total < 2) continue;

      const SplitCandidate split = find_best_split(item.samples, counts, total);
      if (!split.valid()) continue;

      std::vector<int> left_samples, right_samples;
      partition(item.samples, split, left_samples, right_samples);
      if (left_samples.empty() || right_samples.empty()) continue;  // numeric guard

      const int left_id = static_cast<int>(model.nodes.size());
      model.nodes.emplace_back();
      const int right_id = static_cast<int>(model.nodes.size());
      model.nodes.emplace_back();
      TreeNode& node = model.nodes[item.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left_id;
      node.right = right_id;
      stack.push_back({right_id, std::move(right_samples)});
      stack.push_back({left_id, std::move(left_samples)});
    }
    return model;
  }

 private:
  const std::vector<int>& candidate_features() {
    const int m = options_.max_features;
    if (m <= 0 || m >= n_features_) return all_features_;
    // Partial Fisher-Yates over a persistent index array.
    for (int i = 0; i < m; ++i) {
      std::uniform_int_distribution<int> pick(i, n_features_ - 1);
      std::swap(all_features_[static_cast<std::size_t>(i)],
                all_features_[static_cast<std::size_t>(pick(rng_))]);
    }
    sampled_.assign(all_features_.begin(), all_features_.begin() + m);
    std::sort(sampled_.begin(), sampled_.end());
    return sampled_;
  }

  SplitCandidate find_best_split(const std::vector<int>& samples,
                                 const std::vector<std::int64_t>& node_counts,
                                 std::int64_t total) {
    const std::vector<int>& features = candidate_features();
    const bool restricted = features.size() < static_cast<std::size_t>(n_features_);

    scratch_.epoch++;
    if (restricted) {
      for (int f : features) scratch_.candidate_stamp[static_cast<std::size_t>(f)] = scratch_.epoch;
    }
    scratch_.touched.clear();
    for (int s : samples) {
      for (const SparseEntry& e : X_[static_cast<std::size_t>(s)]) {
        if (restricted &&
            scratch_.candidate_stamp[static_cast<std::size_t>(e.index)] != scratch_.epoch) {
          continue;
        }
        auto& bucket = scratch_.buckets[static_cast<std::size_t>(e.index)];
        if (bucket.empty()) scratch_.touched.push_back(e.index);
        bucket.push_back({e.value, s});
      }
    }
    std::sort(scratch_.touched.begin(), scratch_.touched.end());

    const double parent_gini = gini_from_counts(node_counts, total);
    SplitCandidate best;

    std::vector<std::int64_t> left(static_cast<std::size_t>(n_classes_));
    std::vector<std::int64_t> zero_counts(static_cast<std::size_t>(n_classes_));
    for (int f : scratch_.touched) {
      auto& bucket = scratch_.buckets[static_cast<std::size_t>(f)];
      std::sort(bucket.begin(), bucket.end(),
                [](const NonzeroEntry& a, const NonzeroEntry& b) { return a.value < b.value; });

      // Zero-valued samples = node counts minus this feature's nonzeros.
      const auto n_zero = total - static_cast<std::int64_t>(bucket.size());
      zero_counts.assign(node_counts.begin(), node_counts.end());
      for (const NonzeroEntry& e : bucket) {
        zero_counts[static_cast<std::size_t>(targets_[e.sample])]--;
      }

      std::fill(left.begin(), left.end(), 0);
      std::int64_t n_left = 0;
      bool zeros_pending = n_zero > 0;

      // Walk value groups in ascending order; the implicit zero block sits
      // between the negative and positive entries.
      std::size_t pos = 0;
      double prev_value = 0.0;
      bool have_prev = false;
      while (pos < bucket.size() || zeros_pending) {
        const bool zero_group =
            zeros_pending && (pos == bucket.size() || bucket[pos].value >= 0.0);
        const double value = zero_group ? 0.0 : bucket[pos].value;

        if (have_prev) {
          const double decrease =
              parent_gini - weighted_child_gini(node_counts, left, n_left, total);
          if (decrease > best.decrease + 1e-12 && decrease > 1e-12) {
            best.feature = f;
            best.threshold = 0.5 * (prev_value + value);
            best.decrease = decrease;
          }
        }

        if (zero_group) {
          for (std::size_t k = 0; k < left.size(); ++k) left[k] += zero_counts[k];
          n_left += n_zero;
          zeros_pending = false;
        }
        while (pos < bucket.size() && bucket[pos].value == value) {
          left[static_cast<std::size_t>(targets_[bucket[pos].sample])]++;
          ++n_left;
          ++pos;
        }
        prev_value = value;
        have_prev = true;
      }

      bucket.clear();
    }
    return best;
  }

  double weighted_child_gini(const std::vector<std::int64_t>& node_counts,
                             const std::vector<std::int64_t>& left, std::int64_t n_left,
                             std::int64_t total) const {
    const std::int64_t n_right = total - n_left;
    if (n_left == 0 || n_right == 0) return std::numeric_limits<double>::infinity();
    double left_sq = 0.0, right_sq = 0.0;
    for (std::size_t k = 0; k < left.size(); ++k) {
      const double lc = static_cast<double>(left[k]);
      const double rc = static_cast<double>(node_counts[k] - left[k]);
      left_sq += lc * lc;
      right_sq += rc * rc;
    }
    const double nl = static_cast<double>(n_left);
    const double nr = static_cast<double>(n_right);
    const double gini_l = 1.0 - left_sq / (nl * nl);
    const double gini_r = 1.0 - right_sq / (nr * nr);
    return (nl * gini_l + nr * gini_r) / static_cast<double>(total);
  }

  void partition(const std::vector<int>& samples, const SplitCandidate& split,
                 std::vector<int>& left_out, std::vector<int>& right_out) {
    const bool zero_goes_left = 0.0 <= split.threshold;
    for (int s : samples) {
      const SparseVector& row = X_[static_cast<std::size_t>(s)];
      const auto it = std::lower_bound(
          row.begin(), row.end(), split.feature,
          [](const SparseEntry& e, int feature) { return e.index < feature; });
      double value = 0.0;
      if (it != row.end() && it->index == split.feature) value = it->value;
      const bool goes_left = value == 0.0 ? zero_goes_left : value <= split.threshold;
      (goes_left ? left_out : right_out).push_back(s);
    }
  }

  const std::vector<SparseVector>& X_;
  const std::vector<int>& targets_;
  int n_classes_;
  int n_features_;
  TreeOptions options_;
  std::mt19937_64 rng_;
  TreeScratch scratch_;
  std::vector<int> all_features_;
  std::vector<int> sampled_;
};

std::vector<int> targets_from_labels(const std::vector<Label>& y,
                                     const std::vector<Label>& classes) {
  std::array<int, kNumClasses> position{};
  for (std::size_t k = 0; k < classes.size(); ++k) {
    position[static_cast<std::size_t>(classes[k])] = static_cast<int>(k);
  }
  std::vector<int> targets(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    targets[i] = position[static_cast<std::size_t>(y[i])];
  }
  return targets;
}

int argmax_counts(const std::vector<std::int64_t>& counts) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(counts.size()); ++k) {
    if (counts[static_cast<std::size_t>(k)] > counts[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

}  // namespace

Label TreeModel::predict(const SparseVector& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    const auto it =
        std::lower_bound(x.begin(), x.end(), n.feature,
                         [](const SparseEntry& e, int feature) { return e.index < feature; });
    const double value = (it != x.end() && it->index == n.feature) ? it->value : 0.0;
    node = value <= n.threshold ? n.left : n.right;
  }
  return classes[static_cast<std::size_t>(
      argmax_counts(nodes[static_cast<std::size_t>(node)].class_counts))];
}

std::vector<Label> TreeModel::predict(const std::vector<SparseVector>& rows) const {
  std::vector<Label> out;
  out.reserve(rows.size());
  for (const SparseVector& row : rows) out.push_back(predict(row));
  return out;
}

TreeModel train_tree(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                     int n_features, const TreeOptions& options) {
  if (X.empty() || X.size() != y.size()) throw TrainError("train_tree: bad input sizes");
  const std::vector<Label> classes = present_classes(y);
  const std::vector<int> targets = targets_from_labels(y, classes);

  TreeBuilder builder(X, targets, static_cast<int>(classes.size()), n_features, options);
  std::vector<int> samples(X.size());
  std::iota(samples.begin(), samples.end(), 0);
  TreeModel model = builder.build(std::move(samples));
  model.classes = classes;
  return model;
}

Label ForestModel::predict(const SparseVector& x) const {
  std::vector<std::int64_t> votes(classes.size(), 0);
  for (const TreeModel& tree : trees) {
    const Label label = tree.predict(x);
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (classes[k] == label) {
        votes[k]++;
        break;
      }
    }
  }
  return classes[static_cast<std::size_t>(argmax_counts(votes))];
}

std::vector<Label> ForestModel::predict(const std::vector<SparseVector>& rows) const {
  std::vector<Label> out;
  out.reserve(rows.size());
  for (const SparseVector& row : rows) out.push_back(predict(row));
  return out;
}

ForestModel train_forest(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                         int n_features, const ForestOptions& options) {
  if (X.empty() || X.size() != y.size()) throw TrainError("train_forest: bad input sizes");
  if (options.n_estimators < 1) throw TrainError("train_forest: need at least one tree");

  ForestModel forest;
  forest.n_features = n_features;
  forest.classes = present_classes(y);
  forest.options = options;
  const std::vector<int> targets = targets_from_labels(y, forest.classes);

  int max_features = options.max_features;
  if (max_features < 0) {
    max_features = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features))));
  }

  for (int t = 0; t < options.n_estimators; ++t) {
    const std::uint64_t tree_seed =
        options.seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(t) + 1));
    std::vector<int> samples(X.size());
    if (options.bootstrap) {
      std::mt19937_64 rng(tree_seed);
      std::uniform_int_distribution<int> pick(0, static_cast<int>(X.size()) - 1);
      for (int& s : samples) s = pick(rng);
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }

    TreeOptions tree_options;
    tree_options.max_features = max_features;
    tree_options.seed = tree_seed ^ 0xA5A5A5A5A5A5A5A5ULL;
    TreeBuilder builder(X, targets, static_cast<int>(forest.classes.size()), n_features,
                        tree_options);
    TreeModel tree = builder.build(std::move(samples));
    tree.classes = forest.classes;
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

std::vector<SparseVector> to_sparse_rows(const Eigen::MatrixXd& dense) {
  std::vector<SparseVector> rows(static_cast<std::size_t>(dense.rows()));
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (dense(i, j) != 0.0) {
        rows[static_cast<std::size_t>(i)].push_back({static_cast<int>(j), dense(i, j)});
      }
    }
  }
  return rows;
}

}  // namespace hopetk
