#include "nbconc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nbconc/errors.hpp"

namespace nbconc {

using detail::require;

namespace {

void require_lambda(double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, "domain", "lambda must be positive, got " + std::to_string(lambda));
}

// d/dt of the Chernoff log-objective; increasing in t.
double chernoff_slope(std::span<const NBParams> params, double a, double t) {
  double slope = -static_cast<double>(params.size()) * a;
  for (const auto& prm : params) {
    const double log_q = t + std::log1p(-prm.p());
    slope += prm.r() * std::exp(log_q) / -std::expm1(log_q) - prm.mean();
  }
  return slope;
}

BoundResult clamped(double threshold, double raw) {
  BoundResult res;
  res.threshold = threshold;
  res.raw_value = raw;
  res.bound_value = std::clamp(raw, 0.0, 1.0);
  return res;
}

}  // namespace

double chernoff_t_max(std::span<const NBParams> params) {
  require(!params.empty(), "domain", "parameter list is empty");
  double p_min = 1.0;
  for (const auto& prm : params) p_min = std::min(p_min, prm.p());
  return -std::log1p(-p_min);
}

double chernoff_log_objective(std::span<const NBParams> params, double a, double t) {
  const double n = static_cast<double>(params.size());
  double value = -t * n * a;
  for (const auto& prm : params) value += nb_log_mgf(prm, t) - t * prm.mean();
  return value;
}

BoundResult chernoff_mean_deviation_bound(std::span<const NBParams> params, double a) {
  require(!params.empty(), "domain", "parameter list is empty");
  require(std::isfinite(a) && a > 0.0, "domain", "deviation a must be positive, got " + std::to_string(a));

  const double t_max = chernoff_t_max(params);
  constexpr double kEps = 1e-10;
  const double tol = kEps * t_max;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

  auto f = [&](double t) { return chernoff_log_objective(params, a, t); };

  double lo = kEps * t_max;
  double hi = (1.0 - kEps) * t_max;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  int iterations = 0;
  constexpr int kMaxIterations = 500;
  while (hi - lo > tol && iterations < kMaxIterations) {
    ++iterations;
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  double t_star = f1 <= f2 ? x1 : x2;
  double log_bound = std::min(f1, f2);

  // Value comparisons cannot resolve the minimiser below roughly sqrt(machine
  // epsilon), so polish an interior optimum with safeguarded Newton steps.
  const double t_lo = kEps * t_max, t_hi = (1.0 - kEps) * t_max;
  if (t_star > t_lo + tol && t_star < t_hi - tol) {
    double lo_b = t_lo, hi_b = t_hi, t = t_star;
    for (int k = 0; k < 60; ++k) {
      const double g = chernoff_slope(params, a, t);
      if (g > 0.0) hi_b = t; else lo_b = t;
      const double dh = 1e-6 * t;
      const double curv = (chernoff_slope(params, a, t + dh) - chernoff_slope(params, a, t - dh)) / (2.0 * dh);
      double next = curv > 0.0 ? t - g / curv : 0.5 * (lo_b + hi_b);
      if (!(next > lo_b && next < hi_b)) next = 0.5 * (lo_b + hi_b);
      const bool done = std::abs(next - t) <= 4.0 * std::numeric_limits<double>::epsilon() * t;
      t = next;
      if (done) break;
    }
    const double ft = f(t);
    if (ft <= log_bound + 1e-12 * (1.0 + std::abs(log_bound))) {
      t_star = t;
      log_bound = std::min(log_bound, ft);
    }
  }

  // The bound is an infimum over the open interval; t -> 0 gives log-bound 0.
  log_bound = std::min(log_bound, 0.0);

  BoundResult res = clamped(a, std::exp(log_bound));
  res.optimizer = OptimizerInfo{t_star, iterations, hi - lo <= tol};
  return res;
}

double tweedie_variance(std::span<const NB2Params> params) {
  require(!params.empty(), "domain", "parameter list is empty");
  double v = 0.0;
  for (const auto& prm : params) v += prm.variance();
  return v;
}

double control_limit(double v_n, double alpha_level) {
  require(std::isfinite(v_n) && v_n > 0.0, "domain", "V_n must be positive, got " + std::to_string(v_n));
  require(alpha_level > 0.0 && alpha_level < 1.0, "domain",
          "alpha must lie in (0,1), got " + std::to_string(alpha_level));
  return std::sqrt(v_n / alpha_level);
}

BoundResult kolmogorov_independent_bound(std::span<const NBParams> params, double lambda) {
  require(!params.empty(), "domain", "parameter list is empty");
  require_lambda(lambda);
  double total_var = 0.0;
  for (const auto& prm : params) total_var += prm.variance();
  return clamped(lambda, total_var / (lambda * lambda));
}

BoundResult dependent_kolmogorov_bound(const GammaMixture& model, double lambda) {
  require_lambda(lambda);
  const double a = model.gamma_shape();
  const double b = model.gamma_rate();
  const double m = model.max_prefix();
  const double l2 = lambda * lambda;
  BoundComponents parts;
  parts.cond_term = 4.0 * (a / b) * model.total_loading() / l2;
  parts.mix_term = 4.0 * m * m * a / (b * b * l2);
  BoundResult res = clamped(lambda, parts.cond_term + parts.mix_term);
  res.components = parts;
  return res;
}

BoundResult bernstein_dependent_bound(const GammaMixture& model, double lambda) {
  require_lambda(lambda);
  const double a = model.gamma_shape();
  const double b = model.gamma_rate();
  const double m = model.max_prefix();
  const double ln2 = std::log(2.0);

  const double cond_exponent = (lambda * lambda / 16.0) / (a * model.total_loading() / b + lambda / 6.0);
  const double quad = lambda * lambda * b * b / (32.0 * m * m * a);
  const double lin = lambda * b / (4.0 * m);
  const double mix_exponent = std::min(quad, lin);

  BoundComponents parts;
  parts.cond_term = std::exp(ln2 - cond_exponent);
  parts.mix_term = std::exp(ln2 - mix_exponent);
  BoundResult res = clamped(lambda, parts.cond_term + parts.mix_term);
  res.components = parts;
  return res;
}

double invert_bound(const std::function<double(double)>& bound, double alpha_level) {
  require(alpha_level > 0.0 && alpha_level < 1.0, "domain",
          "alpha must lie in (0,1), got " + std::to_string(alpha_level));
  constexpr double kUpper = 1e12;
  constexpr double kLower = 1e-12;

  double lo;
  double hi;
  if (bound(1.0) <= alpha_level) {
    hi = 1.0;
    lo = 0.5;
    while (bound(lo) <= alpha_level) {
      hi = lo;
      lo *= 0.5;
      if (lo < kLower) return hi;
    }
  } else {
    lo = 1.0;
    hi = 2.0;
    while (bound(hi) > alpha_level) {
      lo = hi;
      hi *= 2.0;
      if (hi > kUpper)
        throw DomainError("uninvertible", "bound stays above " + std::to_string(alpha_level) + " up to lambda = 1e12");
    }
  }
  // Invariant: bound(lo) > alpha_level >= bound(hi).
  while ((hi - lo) > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (bound(mid) <= alpha_level)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace nbconc
