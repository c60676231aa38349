#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace xferopt {

/// f(x, grad) -> value; must fill grad.
using GradientObjective = std::function<double(std::span<const double>, std::span<double>)>;
/// Applies an approximate inverse Hessian in place; used as the initial L-BFGS metric.
using Preconditioner = std::function<void(std::span<double>)>;

struct LbfgsOptions {
  int max_iterations = 2000;
  int memory = 12;
  /// Stop when ||g||_inf <= grad_tol * max(1, ||g_0||_inf).
  double grad_tol = 1e-8;
  /// Stop when an accepted step changes f by less than this relative amount.
  double value_tol = 1e-15;
  double armijo = 1e-4;
  int max_backtracks = 50;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string reason;
  /// f after every accepted step, starting with f(x0). Non-increasing by construction.
  std::vector<double> history;
};

/// Limited-memory BFGS with backtracking Armijo line search.
LbfgsResult minimize_lbfgs(const GradientObjective& f, std::vector<double> x0, const LbfgsOptions& opts = {},
                           const Preconditioner& precondition = {});

}  // namespace xferopt
