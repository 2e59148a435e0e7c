#include "hopetk/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace hopetk {

namespace {

bool all_finite(double f, const Eigen::VectorXd& g) {
  return std::isfinite(f) && g.allFinite();
}

struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Strong-Wolfe line search on phi(a) = f(x + a*d). Bracket by step doubling,
// then shrink with safeguarded cubic interpolation (zoom). Non-finite trial
// values are treated as "too high" so the search backs off toward the last
// good point.
struct LineSearch {
  const Objective& objective;
  const Eigen::VectorXd& x0;
  const Eigen::VectorXd& direction;
  const LbfgsOptions& options;

  double phi0;
  double dphi0;

  Eigen::VectorXd x_trial;
  Eigen::VectorXd g_trial;
  int evaluations = 0;

  // phi(a); non-finite maps to +inf
  double eval(double a, double& dphi) {
    x_trial = x0 + a * direction;
    double f = objective(x_trial, g_trial);
    ++evaluations;
    if (!all_finite(f, g_trial)) {
      dphi = std::numeric_limits<double>::quiet_NaN();
      return std::numeric_limits<double>::infinity();
    }
    dphi = g_trial.dot(direction);
    return f;
  }

  static double cubic_min(double a_lo, double f_lo, double d_lo, double a_hi, double f_hi,
                          double d_hi) {
    // Nocedal & Wright eq. 3.59
    const double d1 = d_lo + d_hi - 3.0 * (f_lo - f_hi) / (a_lo - a_hi);
    const double disc = d1 * d1 - d_lo * d_hi;
    if (disc < 0.0) return 0.5 * (a_lo + a_hi);
    const double d2 = std::sqrt(disc) * (a_hi > a_lo ? 1.0 : -1.0);
    const double denom = d_hi - d_lo + 2.0 * d2;
    if (denom == 0.0) return 0.5 * (a_lo + a_hi);
    return a_hi - (a_hi - a_lo) * (d_hi + d2 - d_lo) / denom;
  }

  bool zoom(double a_lo, double f_lo, double d_lo, double a_hi, double f_hi, double d_hi,
            double& a_out, double& f_out) {
    while (evaluations < options.max_line_search) {
      double a = cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi);
      const double lo = std::min(a_lo, a_hi);
      const double hi = std::max(a_lo, a_hi);
      const double margin = 0.1 * (hi - lo);
      if (!std::isfinite(a) || a < lo + margin || a > hi - margin) a = 0.5 * (lo + hi);
      if (hi - lo < 1e-16 * std::max(1.0, hi)) return false;

      double dphi;
      const double f = eval(a, dphi);
      if (f > phi0 + options.c1 * a * dphi0 || f >= f_lo) {
        a_hi = a;
        f_hi = f;
        d_hi = dphi;
      } else {
        if (std::abs(dphi) <= -options.c2 * dphi0) {
          a_out = a;
          f_out = f;
          return true;
        }
        if (dphi * (a_hi - a_lo) >= 0.0) {
          a_hi = a_lo;
          f_hi = f_lo;
          d_hi = d_lo;
        }
        a_lo = a;
        f_lo = f;
        d_lo = dphi;
      }
    }
    return false;
  }

  bool search(double a_init, double& a_out, double& f_out) {
    double a_prev = 0.0;
    double f_prev = phi0;
    double d_prev = dphi0;
    double a = a_init;
    const double a_max = 1e20;

    while (evaluations < options.max_line_search) {
      double dphi;
      const double f = eval(a, dphi);
      if (f > phi0 + options.c1 * a * dphi0 || (evaluations > 1 && f >= f_prev)) {
        return zoom(a_prev, f_prev, d_prev, a, f, dphi, a_out, f_out);
      }
      if (std::abs(dphi) <= -options.c2 * dphi0) {
        a_out = a;
        f_out = f;
        return true;
      }
      if (dphi >= 0.0) {
        return zoom(a, f, dphi, a_prev, f_prev, d_prev, a_out, f_out);
      }
      a_prev = a;
      f_prev = f;
      d_prev = dphi;
      a = std::min(2.0 * a, a_max);
    }
    return false;
  }
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options) {
  LbfgsResult result;
  const auto n = x0.size();

  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd grad(n);
  double fx = objective(x, grad);
  if (!all_finite(fx, grad)) {
    result.x = std::move(x);
    result.fx = fx;
    result.gradient = std::move(grad);
    result.status = LbfgsStatus::NonFiniteObjective;
    return result;
  }
  result.f_history.push_back(fx);

  std::deque<CurvaturePair> pairs;
  Eigen::VectorXd q(n), direction(n);

  int iter = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  while (true) {
    if (grad.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
      status = LbfgsStatus::Converged;
      break;
    }
    if (iter >= options.max_iterations) {
      status = LbfgsStatus::MaxIterations;
      break;
    }

    // Two-loop recursion: H*grad from the stored (s, y) pairs.
    q = grad;
    std::vector<double> alpha(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
      alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
      q -= alpha[i] * pairs[i].y;
    }
    if (!pairs.empty()) {
      const CurvaturePair& last = pairs.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double beta = pairs[i].rho * pairs[i].y.dot(q);
      q += (alpha[i] - beta) * pairs[i].s;
    }
    direction = -q;

    double dphi0 = grad.dot(direction);
    if (dphi0 >= 0.0) {
      // Stale curvature; fall back to steepest descent.
      pairs.clear();
      direction = -grad;
      dphi0 = -grad.squaredNorm();
    }

    LineSearch ls{objective, x, direction, options, fx, dphi0, {}, {}, 0};
    const double a_init = pairs.empty() ? std::min(1.0, 1.0 / grad.lpNorm<1>()) : 1.0;
    double step = 0.0, f_new = 0.0;
    if (!ls.search(a_init, step, f_new)) {
      status = LbfgsStatus::LineSearchFailed;
      break;
    }

    Eigen::VectorXd s = step * direction;
    Eigen::VectorXd y = ls.g_trial - grad;
    x += s;
    fx = f_new;
    grad = ls.g_trial;
    result.f_history.push_back(fx);

    const double sy = s.dot(y);
    if (sy > 1e-12 * y.squaredNorm()) {
      pairs.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(pairs.size()) > options.history) pairs.pop_front();
    }
    ++iter;
  }

  result.x = std::move(x);
  result.fx = fx;
  result.gradient = std::move(grad);
  result.iterations = iter;
  result.status = status;
  return result;
}

}  // namespace hopetk
