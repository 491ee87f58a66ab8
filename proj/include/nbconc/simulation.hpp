#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nbconc/distributions.hpp"

namespace nbconc {

// One replication: realised max_k |S_k|, plus the shared Lambda for
// dependent runs.
struct DeviationSample {
  double max_abs_dev = 0.0;
  std::optional<double> lambda_draw;
};

struct SimulationSummary {
  std::size_t replications = 0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1 denominator)
  double p95 = 0.0;
  double p99 = 0.0;
  double theoretical_lambda = 0.0;
  double efficiency = 0.0;       // p95 / theoretical_lambda
  double exceedance_rate = 0.0;  // fraction with max_abs_dev >= theoretical_lambda
};

struct ExperimentResult {
  SimulationSummary summary;
  std::vector<DeviationSample> samples;
};

// Twenty independent NB variables cycling over (3,0.3), (5,0.5), (8,0.7) and
// the Gamma mixture with the same marginal means and shape = rate =
// round(1 / mean(1/r_i)).
struct MomentMatchedDesign {
  std::vector<NBParams> independent;
  GammaMixture mixture;
};

struct AmplificationResult {
  double indep_mean = 0.0;
  double dep_mean = 0.0;
  bool amplified = false;
  double ratio() const { return dep_mean / indep_mean; }
};

struct EfficiencyPoint {
  double kappa = 0.0;
  double efficiency = 0.0;
};

// Linear interpolation between order statistics: position q (n - 1) in the
// sorted sample.
double percentile_sorted(std::span<const double> sorted, double q);

// max_k |sum_{i<=k} increments_i|.
double max_abs_partial_sum(std::span<const double> increments);

SimulationSummary summarize(std::span<const DeviationSample> samples, double theoretical_lambda);

// Runs body(i) for i in [0, count) across `workers` threads. Each index is
// handled exactly once; output ordering is by index.
std::vector<DeviationSample> run_replications(std::size_t count, unsigned workers,
                                              const std::function<DeviationSample(std::size_t)>& body);

MomentMatchedDesign build_moment_matched_design();

// Marginals of the mixture as independent NB variables.
std::vector<NBParams> matched_independent(const GammaMixture& model);

ExperimentResult run_independent_experiment(std::span<const NBParams> params, std::size_t replications,
                                            double alpha_level, std::uint64_t seed, unsigned workers = 1);
// NB2 variant; kappa == 0 entries are sampled as Poisson.
ExperimentResult run_independent_experiment(std::span<const NB2Params> params, std::size_t replications,
                                            double alpha_level, std::uint64_t seed, unsigned workers = 1);

ExperimentResult run_dependent_experiment(const GammaMixture& model, std::size_t replications, double alpha_level,
                                          std::uint64_t seed, unsigned workers = 1);

double lambda_correlation(std::span<const DeviationSample> samples);

AmplificationResult amplification_check(const MomentMatchedDesign& design, std::size_t replications,
                                        std::uint64_t seed, unsigned workers = 1);

std::vector<EfficiencyPoint> efficiency_curve(std::span<const double> kappa_grid, double base_mu, std::size_t n,
                                              std::size_t replications, std::uint64_t seed,
                                              unsigned workers = 1);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace nbconc
