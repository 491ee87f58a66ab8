#include "nbconc/oracle.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "nbconc/errors.hpp"

namespace nbconc {

namespace {

struct TruncatedPmf {
  std::vector<double> mass;  // mass[k] = P(X = k), k = 0..K
  double dropped = 0.0;      // P(X > K)
};

TruncatedPmf truncate(const NBParams& prm) {
  TruncatedPmf out;
  double kept = 0.0;
  // Hard cap only guards against pathological parameters; the joint-size
  // check below rejects anything this large anyway.
  constexpr std::int64_t kCap = 50'000'000;
  for (std::int64_t k = 0; k < kCap; ++k) {
    const double pk = nb_pmf(prm, k);
    out.mass.push_back(pk);
    kept += pk;
    // Stop once past the mode and the remaining mass is negligible.
    if (static_cast<double>(k) > prm.mean() && 1.0 - kept <= kOracleTailMass) break;
    if (out.mass.size() > static_cast<std::size_t>(kOracleMaxJointStates)) break;
  }
  out.dropped = std::max(0.0, 1.0 - kept);
  return out;
}

std::vector<TruncatedPmf> truncate_all(std::span<const NBParams> params) {
  detail::require(!params.empty(), "domain", "parameter list is empty");
  std::vector<TruncatedPmf> pmfs;
  double joint = 1.0;
  for (const auto& prm : params) {
    pmfs.push_back(truncate(prm));
    joint *= static_cast<double>(pmfs.back().mass.size());
    if (joint > kOracleMaxJointStates)
      throw DomainError("oracle-infeasible", "truncated joint support exceeds 1e7 states");
  }
  return pmfs;
}

double truncation_error(const std::vector<TruncatedPmf>& pmfs) {
  double kept = 1.0;
  for (const auto& p : pmfs) kept *= (1.0 - p.dropped);
  return 1.0 - kept;
}

}  // namespace

OracleResult exact_max_deviation_tail_oracle(std::span<const NBParams> params, double lambda) {
  detail::require(std::isfinite(lambda) && lambda > 0.0, "domain", "lambda must be positive");
  const auto pmfs = truncate_all(params);

  // alive[s] = P(running sum == s and no crossing so far).
  std::vector<double> alive{1.0};
  double crossed = 0.0;
  double centre = 0.0;
  for (std::size_t i = 0; i < pmfs.size(); ++i) {
    const auto& mass = pmfs[i].mass;
    std::vector<double> next(alive.size() + mass.size() - 1, 0.0);
    for (std::size_t s = 0; s < alive.size(); ++s) {
      if (alive[s] == 0.0) continue;
      for (std::size_t k = 0; k < mass.size(); ++k) next[s + k] += alive[s] * mass[k];
    }
    centre += params[i].mean();
    for (std::size_t s = 0; s < next.size(); ++s) {
      if (std::abs(static_cast<double>(s) - centre) >= lambda) {
        crossed += next[s];
        next[s] = 0.0;
      }
    }
    alive = std::move(next);
  }
  return OracleResult{std::min(crossed, 1.0), truncation_error(pmfs)};
}

OracleResult exact_mean_deviation_tail_oracle(std::span<const NBParams> params, double a) {
  detail::require(std::isfinite(a) && a > 0.0, "domain", "deviation a must be positive");
  const auto pmfs = truncate_all(params);

  std::vector<double> dist{1.0};
  double total_mean = 0.0;
  for (std::size_t i = 0; i < pmfs.size(); ++i) {
    const auto& mass = pmfs[i].mass;
    std::vector<double> next(dist.size() + mass.size() - 1, 0.0);
    for (std::size_t s = 0; s < dist.size(); ++s)
      for (std::size_t k = 0; k < mass.size(); ++k) next[s + k] += dist[s] * mass[k];
    dist = std::move(next);
    total_mean += params[i].mean();
  }
  const double cut = total_mean + static_cast<double>(params.size()) * a;
  double tail = 0.0;
  for (std::size_t s = 0; s < dist.size(); ++s)
    if (static_cast<double>(s) >= cut) tail += dist[s];
  return OracleResult{std::min(tail, 1.0), truncation_error(pmfs)};
}

}  // namespace nbconc
