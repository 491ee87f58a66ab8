#pragma once

#include <functional>
#include <optional>
#include <span>

#include "nbconc/distributions.hpp"

namespace nbconc {

// Two-part decomposition for the mixture bounds. Values are raw (unclamped).
struct BoundComponents {
  double cond_term = 0.0;
  double mix_term = 0.0;
};

struct OptimizerInfo {
  double t_star = 0.0;
  int iterations = 0;
  bool converged = false;
};

// bound_value == min(1, raw_value). raw_value is the unclamped bound.
struct BoundResult {
  double threshold = 0.0;
  double bound_value = 1.0;
  double raw_value = 1.0;
  std::optional<BoundComponents> components;
  std::optional<OptimizerInfo> optimizer;
};

// Chernoff log-objective for P(mean(X) - E[mean(X)] >= a):
//   -t n a - t sum E[X_i] + sum log M_i(t),  0 < t < -ln(1 - p_min).
double chernoff_log_objective(std::span<const NBParams> params, double a, double t);

// Upper end of the admissible t interval, -ln(1 - p_min).
double chernoff_t_max(std::span<const NBParams> params);

// Chernoff/Markov bound on the sample-mean deviation, minimised over t by
// golden-section search on the log-objective.
BoundResult chernoff_mean_deviation_bound(std::span<const NBParams> params, double a);

// V_n = sum (mu_i + kappa_i mu_i^2).
double tweedie_variance(std::span<const NB2Params> params);

// lambda_alpha = sqrt(V_n / alpha).
double control_limit(double v_n, double alpha_level);

// P(max_k |S_k| >= lambda) <= lambda^-2 sum Var(X_i) for independent NB.
BoundResult kolmogorov_independent_bound(std::span<const NBParams> params, double lambda);

// Shared-Gamma mixing, Chebyshev version:
//   4 (a/b) Theta_n / lambda^2 + 4 M^2 a / (b^2 lambda^2).
BoundResult dependent_kolmogorov_bound(const GammaMixture& model, double lambda);

// Shared-Gamma mixing, sub-exponential version:
//   cond = 2 exp(-(lambda^2/16) / (a Theta_n / b + lambda / 6))
//   mix  = 2 exp(-min(lambda^2 b^2 / (32 M^2 a), lambda b / (4 M)))
BoundResult bernstein_dependent_bound(const GammaMixture& model, double lambda);

// Smallest lambda with bound(lambda) <= alpha_level for a bound that is
// nonincreasing in lambda. Brackets by doubling/halving from lambda = 1, then
// bisects to a relative width of 1e-9. Throws "uninvertible" if the bound is
// still above alpha_level at lambda = 1e12.
double invert_bound(const std::function<double(double)>& bound, double alpha_level);

}  // namespace nbconc
