#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nbconc/rng.hpp"

namespace nbconc {

// Negative Binomial in the (r, p) form: number of failures before the r-th
// success, r real and positive. Mean r(1-p)/p, variance r(1-p)/p^2.
class NBParams {
 public:
  NBParams(double r, double p);

  double r() const { return r_; }
  double p() const { return p_; }
  double mean() const;
  double variance() const;
  // Supremum of the MGF domain, -ln(1-p).
  double mgf_domain_end() const;

 private:
  double r_;
  double p_;
};

// NB2 (GLM) form: mean mu, dispersion kappa = 1/r, variance mu + kappa mu^2.
// kappa == 0 is the Poisson limit.
class NB2Params {
 public:
  NB2Params(double mu, double kappa);

  double mu() const { return mu_; }
  double kappa() const { return kappa_; }
  double variance() const { return mu_ + kappa_ * mu_ * mu_; }
  bool is_poisson() const { return kappa_ == 0.0; }

 private:
  double mu_;
  double kappa_;
};

NBParams nb_from_mu_kappa(const NB2Params& params);
NB2Params nb2_from_nb(const NBParams& params);

// log E[exp(tX)] = r (ln p - ln(1 - (1-p) e^t)), finite for t < -ln(1-p).
double nb_log_mgf(const NBParams& params, double t);

double nb_log_pmf(const NBParams& params, std::int64_t k);
double nb_pmf(const NBParams& params, std::int64_t k);
double poisson_log_pmf(double mean, std::int64_t k);

// Shared latent rate model: Lambda ~ Gamma(shape, rate), X_i | Lambda ~
// Poisson(Lambda theta_i) independently.
class GammaMixture {
 public:
  GammaMixture(double gamma_shape, double gamma_rate, std::vector<double> thetas);

  double gamma_shape() const { return shape_; }
  double gamma_rate() const { return rate_; }
  const std::vector<double>& thetas() const { return thetas_; }
  std::size_t size() const { return thetas_.size(); }

  const std::vector<double>& prefix_sums() const { return prefix_; }
  double total_loading() const { return prefix_.back(); }  // Theta_n
  double max_prefix() const { return max_prefix_; }         // M

  NBParams marginal(std::size_t i) const;
  double marginal_mean(std::size_t i) const;
  double marginal_variance(std::size_t i) const;
  double correlation(std::size_t i, std::size_t j) const;

  double lambda_mean() const { return shape_ / rate_; }
  // Sub-exponential parameters of the centred Gamma variable.
  double subexp_nu_sq() const { return shape_ / (rate_ * rate_); }
  double subexp_b() const { return 1.0 / rate_; }

 private:
  double shape_;
  double rate_;
  std::vector<double> thetas_;
  std::vector<double> prefix_;
  double max_prefix_;
};

// Sampling. Each call advances the engine; an RngHandle overload starts a
// fresh engine on that stream.
double sample_gamma(double shape, double rate, StreamEngine& engine);
std::int64_t sample_poisson(double mean, StreamEngine& engine);
std::int64_t sample_nb(const NBParams& params, StreamEngine& engine);
std::int64_t sample_nb(const NBParams& params, RngHandle rng);
std::int64_t sample_nb2(const NB2Params& params, StreamEngine& engine);

struct MixtureDraw {
  double lambda_draw = 0.0;
  std::vector<std::int64_t> counts;
};

MixtureDraw sample_mixture_counts(const GammaMixture& model, StreamEngine& engine);
MixtureDraw sample_mixture_counts(const GammaMixture& model, RngHandle rng);

}  // namespace nbconc
