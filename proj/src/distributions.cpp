#include "nbconc/distributions.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "nbconc/errors.hpp"

namespace nbconc {

using detail::require;

namespace {
bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }
}  // namespace

NBParams::NBParams(double r, double p) : r_(r), p_(p) {
  require(finite_positive(r), "domain", "NB size r must be positive, got " + std::to_string(r));
  require(p > 0.0 && p < 1.0, "domain", "NB probability p must lie in (0,1), got " + std::to_string(p));
}

double NBParams::mean() const { return r_ * (1.0 - p_) / p_; }
double NBParams::variance() const { return r_ * (1.0 - p_) / (p_ * p_); }
double NBParams::mgf_domain_end() const { return -std::log1p(-p_); }

NB2Params::NB2Params(double mu, double kappa) : mu_(mu), kappa_(kappa) {
  require(finite_positive(mu), "domain", "NB2 mean must be positive, got " + std::to_string(mu));
  require(std::isfinite(kappa) && kappa >= 0.0, "domain",
          "NB2 dispersion must be nonnegative, got " + std::to_string(kappa));
}

NBParams nb_from_mu_kappa(const NB2Params& params) {
  if (params.is_poisson())
    throw DomainError("poisson-limit-not-representable", "kappa == 0 has no (r, p) form");
  return NBParams(1.0 / params.kappa(), 1.0 / (1.0 + params.kappa() * params.mu()));
}

NB2Params nb2_from_nb(const NBParams& params) { return NB2Params(params.mean(), 1.0 / params.r()); }

double nb_log_mgf(const NBParams& params, double t) {
  if (!(t < params.mgf_domain_end()))
    throw DomainError("mgf-domain-exceeded",
                      "t = " + std::to_string(t) + " >= -ln(1-p) = " + std::to_string(params.mgf_domain_end()));
  // ln(1 - (1-p) e^t) = ln(-expm1(t + ln(1-p))) keeps precision near the boundary.
  const double u = t + std::log1p(-params.p());
  return params.r() * (std::log(params.p()) - std::log(-std::expm1(u)));
}

double nb_log_pmf(const NBParams& params, std::int64_t k) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  const double r = params.r();
  const double kd = static_cast<double>(k);
  return std::lgamma(kd + r) - std::lgamma(r) - std::lgamma(kd + 1.0) + r * std::log(params.p()) +
         kd * std::log1p(-params.p());
}

double nb_pmf(const NBParams& params, std::int64_t k) { return std::exp(nb_log_pmf(params, k)); }

double poisson_log_pmf(double mean, std::int64_t k) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

GammaMixture::GammaMixture(double gamma_shape, double gamma_rate, std::vector<double> thetas)
    : shape_(gamma_shape), rate_(gamma_rate), thetas_(std::move(thetas)) {
  require(finite_positive(shape_), "domain", "gamma shape must be positive");
  require(finite_positive(rate_), "domain", "gamma rate must be positive");
  require(!thetas_.empty(), "domain", "mixture needs at least one loading");
  prefix_.reserve(thetas_.size());
  double acc = 0.0;
  for (double th : thetas_) {
    require(finite_positive(th), "domain", "loadings theta_i must be positive, got " + std::to_string(th));
    acc += th;
    prefix_.push_back(acc);
  }
  // Loadings are positive so the prefix sums increase; M is the last one.
  max_prefix_ = prefix_.back();
}

NBParams GammaMixture::marginal(std::size_t i) const {
  return NBParams(shape_, rate_ / (rate_ + thetas_.at(i)));
}

double GammaMixture::marginal_mean(std::size_t i) const { return shape_ * thetas_.at(i) / rate_; }

double GammaMixture::marginal_variance(std::size_t i) const {
  const double th = thetas_.at(i);
  return shape_ * th * (rate_ + th) / (rate_ * rate_);
}

double GammaMixture::correlation(std::size_t i, std::size_t j) const {
  if (i == j) {
    (void)thetas_.at(i);
    return 1.0;
  }
  const double ti = thetas_.at(i);
  const double tj = thetas_.at(j);
  return std::sqrt(ti * tj) / std::sqrt((rate_ + ti) * (rate_ + tj));
}

double sample_gamma(double shape, double rate, StreamEngine& engine) {
  boost::random::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine);
}

std::int64_t sample_poisson(double mean, StreamEngine& engine) {
  // A gamma draw with tiny shape can underflow to zero.
  if (!(mean > 0.0)) return 0;
  boost::random::poisson_distribution<std::int64_t, double> dist(mean);
  return dist(engine);
}

std::int64_t sample_nb(const NBParams& params, StreamEngine& engine) {
  const double g = sample_gamma(params.r(), params.p() / (1.0 - params.p()), engine);
  return sample_poisson(g, engine);
}

std::int64_t sample_nb(const NBParams& params, RngHandle rng) {
  StreamEngine engine(rng);
  return sample_nb(params, engine);
}

std::int64_t sample_nb2(const NB2Params& params, StreamEngine& engine) {
  if (params.is_poisson()) return sample_poisson(params.mu(), engine);
  return sample_nb(nb_from_mu_kappa(params), engine);
}

MixtureDraw sample_mixture_counts(const GammaMixture& model, StreamEngine& engine) {
  MixtureDraw draw;
  draw.lambda_draw = sample_gamma(model.gamma_shape(), model.gamma_rate(), engine);
  draw.counts.reserve(model.size());
  for (double th : model.thetas()) draw.counts.push_back(sample_poisson(draw.lambda_draw * th, engine));
  return draw;
}

MixtureDraw sample_mixture_counts(const GammaMixture& model, RngHandle rng) {
  StreamEngine engine(rng);
  return sample_mixture_counts(model, engine);
}

}  // namespace nbconc
