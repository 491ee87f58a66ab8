#pragma once

#include <span>

#include "nbconc/distributions.hpp"

namespace nbconc {

// Exact (up to truncation) tail probability. The true value lies in
// [value, value + truncation_error].
struct OracleResult {
  double value = 0.0;
  double truncation_error = 0.0;
};

// Per-marginal truncation: each variable's support is cut at the first k with
// upper tail mass <= 1e-12.
inline constexpr double kOracleTailMass = 1e-12;
// Maximum size of the truncated joint support.
inline constexpr double kOracleMaxJointStates = 1e7;

// P(max_k |S_k| >= lambda), S_k = sum_{i<=k} (X_i - E[X_i]), by dynamic
// programming over the running integer sum of paths that have not yet
// crossed. Throws "oracle-infeasible" if the joint support exceeds the limit.
OracleResult exact_max_deviation_tail_oracle(std::span<const NBParams> params, double lambda);

// P(mean(X) - E[mean(X)] >= a) by exact convolution of the truncated PMFs.
OracleResult exact_mean_deviation_tail_oracle(std::span<const NBParams> params, double a);

}  // namespace nbconc
