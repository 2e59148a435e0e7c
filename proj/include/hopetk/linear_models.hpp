#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hopetk/features.hpp"
#include "hopetk/labels.hpp"

namespace hopetk {

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-class weight rows + biases; the shared predict path is
// argmax_k (w_k . x + b_k), ties resolved toward the lower class index.
struct LinearModel {
  Eigen::MatrixXd weights;      // classes x features
  Eigen::VectorXd bias;         // classes
  std::vector<Label> classes;   // fixed at fit time
  double C = 1.0;

  int feature_dimension() const { return static_cast<int>(weights.cols()); }

  Eigen::VectorXd decision_values(const SparseVector& x) const;
  Label predict(const SparseVector& x) const;
  std::vector<Label> predict(const std::vector<SparseVector>& rows) const;

  // Softmax over decision values; class priors in the small-C limit because
  // biases are unregularized.
  Eigen::VectorXd predict_proba(const SparseVector& x) const;
};

struct LogisticOptions {
  int max_iterations = 1000;
  double tolerance = 1e-4;   // gradient inf-norm
  int lbfgs_history = 10;
};

// Multinomial softmax regression minimizing
//   0.5*||W||^2 + C * sum_i cross_entropy(softmax(W x_i + b), y_i)
// with L-BFGS; biases excluded from the penalty.
LinearModel train_logistic(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                           double C, int n_features, const LogisticOptions& options = {});

struct SvmOptions {
  double gap_tolerance = 1e-4;  // absolute duality gap at the stopping sweep
  int max_sweeps = 1000;
  std::uint64_t seed = 0;       // coordinate-permutation seed
};

// One-vs-rest L2-regularized hinge-loss SVM. Each binary problem is solved
// in the dual by coordinate descent; the bias is carried as an augmented
// constant feature. Prediction is the argmax of per-class decision values.
LinearModel train_svm(const std::vector<SparseVector>& X, const std::vector<Label>& y, double C,
                      int n_features, const SvmOptions& options = {});

// Primal and dual objectives of one binary subproblem, for convergence checks.
struct SvmObjectives {
  double primal = 0.0;
  double dual = 0.0;
  double gap() const { return primal - dual; }
};

SvmObjectives svm_objectives(const std::vector<SparseVector>& X, const std::vector<int>& y_signs,
                             const Eigen::VectorXd& w_augmented, const Eigen::VectorXd& alpha,
                             double C);

}  // namespace hopetk
