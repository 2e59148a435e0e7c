#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace hopetk {

// Evaluates f(x) and writes the gradient into `grad` (same size as x).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  int history = 10;          // curvature pairs kept for the two-loop recursion
  double grad_tol = 1e-4;    // convergence when the gradient inf-norm drops below
  int max_iterations = 1000;
  int max_line_search = 40;
  double c1 = 1e-4;          // sufficient-decrease coefficient
  double c2 = 0.9;           // curvature coefficient (strong Wolfe)
};

enum class LbfgsStatus {
  Converged,
  MaxIterations,
  LineSearchFailed,
  NonFiniteObjective,
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::Converged;
  std::vector<double> f_history;  // objective at x0 and after each accepted step
};

// Limited-memory BFGS: two-loop recursion over the most recent curvature
// pairs, step lengths chosen by a strong-Wolfe line search. Stops when
// ||grad||_inf <= grad_tol or after max_iterations.
LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {});

inline LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0, int history,
                                  double grad_tol, int max_iterations) {
  LbfgsOptions options;
  options.history = history;
  options.grad_tol = grad_tol;
  options.max_iterations = max_iterations;
  return lbfgs_minimize(objective, std::move(x0), options);
}

}  // namespace hopetk
