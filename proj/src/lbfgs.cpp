#include "xferopt/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace xferopt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

}  // namespace

LbfgsResult minimize_lbfgs(const GradientObjective& f, std::vector<double> x0, const LbfgsOptions& opts,
                           const Preconditioner& precondition) {
  const std::size_t n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);
  std::vector<double> g(n);
  double fx = f(res.x, g);
  res.history.push_back(fx);
  const double g0 = std::max(1.0, inf_norm(g));

  std::deque<Pair> memory;
  std::vector<double> d(n);
  std::vector<double> x_new(n);
  std::vector<double> g_new(n);
  std::vector<double> alpha(static_cast<std::size_t>(opts.memory));
  std::vector<double> tmp(n);
  int stalls = 0;

  const auto initial_metric = [&](std::vector<double>& q) {
    if (memory.empty()) {
      if (precondition) precondition(q);
      return;
    }
    const auto& last = memory.back();
    if (precondition) {
      std::copy(last.y.begin(), last.y.end(), tmp.begin());
      precondition(tmp);
      const double yhy = dot(last.y, tmp);
      precondition(q);
      const double theta = yhy > 0.0 ? dot(last.s, last.y) / yhy : 1.0;
      for (double& v : q) v *= theta;
    } else {
      const double theta = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& v : q) v *= theta;
    }
  };

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    res.grad_norm = inf_norm(g);
    if (res.grad_norm <= opts.grad_tol * g0) {
      res.converged = true;
      res.reason = "gradient tolerance";
      break;
    }

    // two-loop recursion
    std::vector<double> q(g);
    for (std::size_t i = memory.size(); i-- > 0;) {
      alpha[i] = memory[i].rho * dot(memory[i].s, q);
      for (std::size_t j = 0; j < n; ++j) q[j] -= alpha[i] * memory[i].y[j];
    }
    initial_metric(q);
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const double beta = memory[i].rho * dot(memory[i].y, q);
      for (std::size_t j = 0; j < n; ++j) q[j] += memory[i].s[j] * (alpha[i] - beta);
    }
    for (std::size_t j = 0; j < n; ++j) d[j] = -q[j];
    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      memory.clear();
      std::copy(g.begin(), g.end(), q.begin());
      if (precondition) precondition(q);
      for (std::size_t j = 0; j < n; ++j) d[j] = -q[j];
      slope = dot(g, d);
      if (!(slope < 0.0)) {
        res.reason = "no descent direction";
        break;
      }
    }

    double step = 1.0;
    if (memory.empty() && !precondition) step = std::min(1.0, 1.0 / std::max(inf_norm(d), 1e-300));
    double f_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      for (std::size_t j = 0; j < n; ++j) x_new[j] = res.x[j] + step * d[j];
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + opts.armijo * step * slope) {
        accepted = true;
        break;
      }
      // safeguarded quadratic interpolation of the backtrack
      const double denom = 2.0 * (f_new - fx - step * slope);
      double next = std::isfinite(f_new) && denom > 0.0 ? -slope * step * step / denom : 0.5 * step;
      step = std::clamp(next, 0.1 * step, 0.5 * step);
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      res.reason = "line search failed";
      break;
    }

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      p.s[j] = x_new[j] - res.x[j];
      p.y[j] = g_new[j] - g[j];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y))) {
      p.rho = 1.0 / sy;
      memory.push_back(std::move(p));
      if (static_cast<int>(memory.size()) > opts.memory) memory.pop_front();
    }

    const double change = std::abs(fx - f_new);
    res.x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    res.history.push_back(fx);
    if (change <= opts.value_tol * std::max(std::abs(fx), std::numeric_limits<double>::min())) {
      if (++stalls >= 3) {
        res.reason = "stationary value";
        res.converged = true;
        break;
      }
    } else {
      stalls = 0;
    }
  }
  if (res.reason.empty()) res.reason = "iteration limit";
  res.value = fx;
  res.grad_norm = inf_norm(g);
  return res;
}

}  // namespace xferopt
