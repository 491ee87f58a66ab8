#include "nbconc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "nbconc/bounds.hpp"
#include "nbconc/errors.hpp"

namespace nbconc {

using detail::require;

double percentile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), "domain", "percentile of empty sample");
  require(q >= 0.0 && q <= 1.0, "domain", "quantile level must lie in [0,1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double max_abs_partial_sum(std::span<const double> increments) {
  double s = 0.0;
  double best = 0.0;
  for (double x : increments) {
    s += x;
    best = std::max(best, std::abs(s));
  }
  return best;
}

SimulationSummary summarize(std::span<const DeviationSample> samples, double theoretical_lambda) {
  require(!samples.empty(), "domain", "no replications to summarise");
  require(theoretical_lambda > 0.0, "domain", "theoretical lambda must be positive");
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.max_abs_dev);

  SimulationSummary out;
  out.replications = v.size();
  const double n = static_cast<double>(v.size());
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  std::size_t exceed = 0;
  for (double x : v) {
    ss += (x - out.mean) * (x - out.mean);
    if (x >= theoretical_lambda) ++exceed;
  }
  out.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::sort(v.begin(), v.end());
  out.median = percentile_sorted(v, 0.5);
  out.p95 = percentile_sorted(v, 0.95);
  out.p99 = percentile_sorted(v, 0.99);
  out.theoretical_lambda = theoretical_lambda;
  out.efficiency = out.p95 / theoretical_lambda;
  out.exceedance_rate = static_cast<double>(exceed) / n;
  return out;
}

std::vector<DeviationSample> run_replications(std::size_t count, unsigned workers,
                                              const std::function<DeviationSample(std::size_t)>& body) {
  std::vector<DeviationSample> out(count);
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) out[i] = body(i);
    return out;
  }
  const std::size_t used = std::min<std::size_t>(workers, count);
  {
    std::vector<std::jthread> pool;
    pool.reserve(used);
    for (std::size_t w = 0; w < used; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += used) out[i] = body(i);
      });
    }
  }
  return out;
}

MomentMatchedDesign build_moment_matched_design() {
  constexpr std::size_t n = 20;
  const NBParams cycle[] = {NBParams(3, 0.3), NBParams(5, 0.5), NBParams(8, 0.7)};
  std::vector<NBParams> indep;
  std::vector<double> thetas;
  double mean_kappa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    indep.push_back(cycle[i % 3]);
    thetas.push_back(indep.back().mean());
    mean_kappa += 1.0 / indep.back().r();
  }
  mean_kappa /= static_cast<double>(n);
  const double shape = std::round(1.0 / mean_kappa);
  return MomentMatchedDesign{std::move(indep), GammaMixture(shape, shape, std::move(thetas))};
}

std::vector<NBParams> matched_independent(const GammaMixture& model) {
  std::vector<NBParams> out;
  out.reserve(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) out.push_back(model.marginal(i));
  return out;
}

namespace {

std::int64_t draw(const NBParams& p, StreamEngine& e) { return sample_nb(p, e); }
std::int64_t draw(const NB2Params& p, StreamEngine& e) { return sample_nb2(p, e); }
double mean_of(const NBParams& p) { return p.mean(); }
double mean_of(const NB2Params& p) { return p.mu(); }

template <typename Params>
ExperimentResult independent_experiment(std::span<const Params> params, double lambda, std::size_t replications,
                                        std::uint64_t seed, unsigned workers) {
  require(replications >= 1, "domain", "need at least one replication");
  auto samples = run_replications(replications, workers, [&](std::size_t i) {
    StreamEngine engine(RngHandle{seed, i});
    double s = 0.0;
    double best = 0.0;
    for (const auto& prm : params) {
      s += static_cast<double>(draw(prm, engine)) - mean_of(prm);
      best = std::max(best, std::abs(s));
    }
    return DeviationSample{best, std::nullopt};
  });
  return ExperimentResult{summarize(samples, lambda), std::move(samples)};
}

}  // namespace

ExperimentResult run_independent_experiment(std::span<const NB2Params> params, std::size_t replications,
                                            double alpha_level, std::uint64_t seed, unsigned workers) {
  const double lambda = control_limit(tweedie_variance(params), alpha_level);
  return independent_experiment(params, lambda, replications, seed, workers);
}

ExperimentResult run_independent_experiment(std::span<const NBParams> params, std::size_t replications,
                                            double alpha_level, std::uint64_t seed, unsigned workers) {
  require(!params.empty(), "domain", "parameter list is empty");
  double v_n = 0.0;
  for (const auto& p : params) v_n += p.variance();
  const double lambda = control_limit(v_n, alpha_level);
  return independent_experiment(params, lambda, replications, seed, workers);
}

ExperimentResult run_dependent_experiment(const GammaMixture& model, std::size_t replications, double alpha_level,
                                          std::uint64_t seed, unsigned workers) {
  require(replications >= 1, "domain", "need at least one replication");
  const double lambda =
      invert_bound([&](double l) { return dependent_kolmogorov_bound(model, l).bound_value; }, alpha_level);
  std::vector<double> means(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) means[i] = model.marginal_mean(i);

  auto samples = run_replications(replications, workers, [&](std::size_t i) {
    StreamEngine engine(RngHandle{seed, i});
    const MixtureDraw draw = sample_mixture_counts(model, engine);
    double s = 0.0;
    double best = 0.0;
    for (std::size_t k = 0; k < draw.counts.size(); ++k) {
      s += static_cast<double>(draw.counts[k]) - means[k];
      best = std::max(best, std::abs(s));
    }
    return DeviationSample{best, draw.lambda_draw};
  });
  ExperimentResult res{summarize(samples, lambda), std::move(samples)};
  return res;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "domain", "correlation inputs differ in length");
  require(x.size() >= 2, "domain", "correlation needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("zero-variance", "correlation undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double lambda_correlation(std::span<const DeviationSample> samples) {
  std::vector<double> lam;
  std::vector<double> dev;
  lam.reserve(samples.size());
  dev.reserve(samples.size());
  for (const auto& s : samples) {
    require(s.lambda_draw.has_value(), "domain", "sample has no lambda draw (independent run?)");
    lam.push_back(*s.lambda_draw);
    dev.push_back(s.max_abs_dev);
  }
  return pearson_correlation(lam, dev);
}

AmplificationResult amplification_check(const MomentMatchedDesign& design, std::size_t replications,
                                        std::uint64_t seed, unsigned workers) {
  require(replications >= 100, "domain", "amplification check needs at least 100 replications");
  constexpr double kAlpha = 0.05;
  const auto indep = run_independent_experiment(design.independent, replications, kAlpha, seed, workers);
  const auto dep = run_dependent_experiment(design.mixture, replications, kAlpha, seed, workers);
  AmplificationResult out;
  out.indep_mean = indep.summary.mean;
  out.dep_mean = dep.summary.mean;
  out.amplified = out.dep_mean > out.indep_mean;
  return out;
}

std::vector<EfficiencyPoint> efficiency_curve(std::span<const double> kappa_grid, double base_mu, std::size_t n,
                                              std::size_t replications, std::uint64_t seed, unsigned workers) {
  require(!kappa_grid.empty(), "domain", "kappa grid is empty");
  require(n >= 1, "domain", "need at least one variable");
  constexpr double kAlpha = 0.05;
  std::vector<EfficiencyPoint> out;
  out.reserve(kappa_grid.size());
  for (double kappa : kappa_grid) {
    const std::vector<NB2Params> params(n, NB2Params(base_mu, kappa));
    const auto res =
        run_independent_experiment(std::span<const NB2Params>(params), replications, kAlpha, seed, workers);
    out.push_back({kappa, res.summary.efficiency});
  }
  return out;
}

}  // namespace nbconc
