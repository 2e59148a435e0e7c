#include "hopetk/linear_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hopetk/lbfgs.hpp"

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

void check_training_input(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                          int n_features, const std::vector<Label>& classes) {
  if (X.size() != y.size()) throw TrainError("feature rows and labels differ in length");
  if (X.empty()) throw TrainError("empty training set");
  if (classes.size() < 2) throw TrainError("training data contains a single class");
  for (const SparseVector& row : X) {
    for (const SparseEntry& e : row) {
      if (e.index < 0 || e.index >= n_features) throw TrainError("feature index out of range");
      if (!std::isfinite(e.value)) throw TrainError("non-finite feature value");
    }
  }
}

}  // namespace

Eigen::VectorXd LinearModel::decision_values(const SparseVector& x) const {
  Eigen::VectorXd z = bias;
  for (const SparseEntry& e : x) z += weights.col(e.index) * e.value;
  return z;
}

Label LinearModel::predict(const SparseVector& x) const {
  const Eigen::VectorXd z = decision_values(x);
  int best = 0;
  for (int k = 1; k < z.size(); ++k) {
    if (z[k] > z[best]) best = k;
  }
  return classes[static_cast<std::size_t>(best)];
}

std::vector<Label> LinearModel::predict(const std::vector<SparseVector>& rows) const {
  std::vector<Label> out;
  out.reserve(rows.size());
  for (const SparseVector& row : rows) out.push_back(predict(row));
  return out;
}

Eigen::VectorXd LinearModel::predict_proba(const SparseVector& x) const {
  Eigen::VectorXd z = decision_values(x);
  const double zmax = z.maxCoeff();
  Eigen::VectorXd p = (z.array() - zmax).exp();
  p /= p.sum();
  return p;
}

LinearModel train_logistic(const std::vector<SparseVector>& X, const std::vector<Label>& y,
                           double C, int n_features, const LogisticOptions& options) {
  const std::vector<Label> classes = present_classes(y);
  check_training_input(X, y, n_features, classes);

  const int K = static_cast<int>(classes.size());
  const auto n = static_cast<Eigen::Index>(X.size());
  const Eigen::Index D = n_features;

  std::array<int, kNumClasses> class_position{};
  for (int k = 0; k < K; ++k) {
    class_position[static_cast<std::size_t>(classes[static_cast<std::size_t>(k)])] = k;
  }
  std::vector<int> targets(X.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    targets[i] = class_position[static_cast<std::size_t>(y[i])];
  }

  // Parameter layout: K rows of D weights, then K biases.
  const Eigen::Index dim = static_cast<Eigen::Index>(K) * D + K;
  const auto weight_offset = [D](int k) { return static_cast<Eigen::Index>(k) * D; };
  const Eigen::Index bias_offset = static_cast<Eigen::Index>(K) * D;

  Objective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) -> double {
    grad.setZero(dim);
    double data_loss = 0.0;
    Eigen::VectorXd z(K), p(K);
    for (Eigen::Index i = 0; i < n; ++i) {
      const SparseVector& xi = X[static_cast<std::size_t>(i)];
      for (int k = 0; k < K; ++k) {
        double zk = theta[bias_offset + k];
        const Eigen::Index off = weight_offset(k);
        for (const SparseEntry& e : xi) zk += theta[off + e.index] * e.value;
        z[k] = zk;
      }
      const double zmax = z.maxCoeff();
      const double lse = zmax + std::log((z.array() - zmax).exp().sum());
      p = (z.array() - lse).exp();
      data_loss += lse - z[targets[static_cast<std::size_t>(i)]];

      for (int k = 0; k < K; ++k) {
        const double coef = p[k] - (targets[static_cast<std::size_t>(i)] == k ? 1.0 : 0.0);
        const Eigen::Index off = weight_offset(k);
        for (const SparseEntry& e : xi) grad[off + e.index] += coef * e.value;
        grad[bias_offset + k] += coef;
      }
    }
    grad *= C;
    // L2 penalty on weights only.
    const auto w = theta.head(bias_offset);
    grad.head(bias_offset) += w;
    return 0.5 * w.squaredNorm() + C * data_loss;
  };

  LbfgsOptions lbfgs_options;
  lbfgs_options.history = options.lbfgs_history;
  lbfgs_options.grad_tol = options.tolerance;
  lbfgs_options.max_iterations = options.max_iterations;
  LbfgsResult result = lbfgs_minimize(objective, Eigen::VectorXd::Zero(dim), lbfgs_options);
  if (result.status == LbfgsStatus::NonFiniteObjective) {
    throw TrainError("logistic regression objective became non-finite");
  }

  LinearModel model;
  model.classes = classes;
  model.C = C;
  model.weights.resize(K, D);
  model.bias.resize(K);
  for (int k = 0; k < K; ++k) {
    model.weights.row(k) = result.x.segment(weight_offset(k), D).transpose();
    model.bias[k] = result.x[bias_offset + k];
  }
  if (!model.weights.allFinite() || !model.bias.allFinite()) {
    throw TrainError("logistic regression produced non-finite weights");
  }
  return model;
}

SvmObjectives svm_objectives(const std::vector<SparseVector>& X, const std::vector<int>& y_signs,
                             const Eigen::VectorXd& w_augmented, const Eigen::VectorXd& alpha,
                             double C) {
  const Eigen::Index bias_index = w_augmented.size() - 1;
  SvmObjectives obj;
  const double w_norm2 = w_augmented.squaredNorm();
  double hinge = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double decision = w_augmented[bias_index];
    for (const SparseEntry& e : X[i]) decision += w_augmented[e.index] * e.value;
    hinge += std::max(0.0, 1.0 - y_signs[i] * decision);
  }
  obj.primal = 0.5 * w_norm2 + C * hinge;
  obj.dual = alpha.sum() - 0.5 * w_norm2;
  return obj;
}

namespace {

// Dual coordinate descent for one binary subproblem
//   min_alpha 0.5*alpha^T Q alpha - e^T alpha,  0 <= alpha_i <= C,
// with Q_ij = y_i y_j xhat_i . xhat_j over bias-augmented features, which
// solves the primal 0.5*||w||^2 + C * sum_i max(0, 1 - y_i w.xhat_i).
Eigen::VectorXd solve_binary_svm(const std::vector<SparseVector>& X,
                                 const std::vector<int>& y_signs, double C, Eigen::Index dim_aug,
                                 const SvmOptions& options, std::uint64_t stream) {
  const std::size_t n = X.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim_aug);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  Eigen::VectorXd qd(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    qd[static_cast<Eigen::Index>(i)] = squared_norm(X[i]) + 1.0;  // + bias feature
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(options.seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));

  const Eigen::Index bias_index = dim_aug - 1;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const auto i = static_cast<Eigen::Index>(idx);
      const double yi = y_signs[idx];
      double decision = w[bias_index];
      for (const SparseEntry& e : X[idx]) decision += w[e.index] * e.value;
      const double G = yi * decision - 1.0;

      const double a_old = alpha[i];
      const double a_new = std::clamp(a_old - G / qd[i], 0.0, C);
      if (a_new != a_old) {
        const double delta = (a_new - a_old) * yi;
        for (const SparseEntry& e : X[idx]) w[e.index] += delta * e.value;
        w[bias_index] += delta;
        alpha[i] = a_new;
      }
    }
    const SvmObjectives obj = svm_objectives(X, y_signs, w, alpha, C);
    if (obj.gap() <= options.gap_tolerance) break;
  }
  return w;
}

}  // namespace

LinearModel train_svm(const std::vector<SparseVector>& X, const std::vector<Label>& y, double C,
                      int n_features, const SvmOptions& options) {
  const std::vector<Label> classes = present_classes(y);
  check_training_input(X, y, n_features, classes);

  const int K = static_cast<int>(classes.size());
  const Eigen::Index dim_aug = static_cast<Eigen::Index>(n_features) + 1;

  LinearModel model;
  model.classes = classes;
  model.C = C;
  model.weights.resize(K, n_features);
  model.bias.resize(K);

  for (int k = 0; k < K; ++k) {
    std::vector<int> y_signs(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      y_signs[i] = y[i] == classes[static_cast<std::size_t>(k)] ? +1 : -1;
    }
    const Eigen::VectorXd w =
        solve_binary_svm(X, y_signs, C, dim_aug, options, static_cast<std::uint64_t>(k));
    model.weights.row(k) = w.head(n_features).transpose();
    model.bias[k] = w[dim_aug - 1];
  }
  if (!model.weights.allFinite() || !model.bias.allFinite()) {
    throw TrainError("svm produced non-finite weights");
  }
  return model;
}

}  // namespace hopetk
