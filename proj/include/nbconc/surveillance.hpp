#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nbconc/distributions.hpp"
#include "nbconc/simulation.hpp"

namespace nbconc {

struct Region {
  std::string id;
  double weekly_mu = 0.0;
  double kappa = 0.0;
};

// Regions observed weekly over a fixed horizon; weekly counts are
// NB2(weekly_mu, kappa), independent across weeks and regions.
class EpiScenario {
 public:
  EpiScenario(std::vector<Region> regions, std::size_t weeks);

  const std::vector<Region>& regions() const { return regions_; }
  std::size_t weeks() const { return weeks_; }

  double cumulative_mean(std::size_t j) const;
  double cumulative_variance(std::size_t j) const;
  double total_expected() const;
  // V_n = weeks * sum_j (mu_j + kappa_j mu_j^2).
  double tweedie_variance() const;

 private:
  std::vector<Region> regions_;
  std::size_t weeks_;
};

// Five regions over twelve weeks with the calibrated COVID-19 NB2 fits.
EpiScenario reference_epi_scenario();

struct ScenarioConfig {
  EpiScenario scenario;
  std::vector<double> alpha_levels;
};

// JSON document:
//   {"weeks": 12, "alpha_levels": [0.05, 0.01],
//    "regions": [{"id": "R1", "weekly_mu": 210, "kappa": 0.35}, ...]}
ScenarioConfig parse_scenario_config(std::istream& in);
ScenarioConfig load_scenario_config(const std::string& path);

struct ControlLimit {
  double alpha_level = 0.0;
  double lambda = 0.0;
};

std::vector<ControlLimit> epi_control_limits(const EpiScenario& scenario, const std::vector<double>& alpha_levels);

struct HistoryRow {
  std::size_t period = 0;
  double cumulative_deviation = 0.0;
  bool alarm = false;
};

// Cumulative deviation process S_t = sum_j sum_{s<=t} (X_js - mu_hat_j) with
// an inclusive alarm |S_t| >= control_limit.
struct MonitoringState {
  std::size_t period_index = 0;
  double cumulative_deviation = 0.0;
  double control_limit = 0.0;
  std::size_t horizon = 0;
  bool alarm = false;
  std::vector<HistoryRow> history;

  bool any_alarm() const;
};

MonitoringState start_monitoring(double control_limit, std::size_t horizon);

MonitoringState monitor_step(const MonitoringState& state, const std::vector<std::int64_t>& weekly_counts,
                             const std::vector<double>& fitted_mu);

struct CountsTable {
  std::vector<std::string> region_ids;
  std::vector<std::vector<std::int64_t>> rows;  // one row per week
};

// Comma-delimited; header row of region ids, then one row of nonnegative
// integer counts per week. Throws ParseError naming the 1-based line.
CountsTable parse_counts(std::istream& in);

void write_history_csv(std::ostream& out, const MonitoringState& state);

// How the maximal deviation is indexed in the validation run.
enum class MaxOrdering {
  RegionPrefix,  // max over k of |sum_{j<=k} (cumulative_j - weeks mu_j)| at the horizon
  TimePrefix,    // max over t of |S_t|, S_t summed over all regions
};

const char* to_string(MaxOrdering mode);

ExperimentResult run_epi_validation(const EpiScenario& scenario, std::size_t replications, double alpha_level,
                                    std::uint64_t seed, MaxOrdering mode, unsigned workers = 1);

// Fraction of simulated monitoring runs that alarm within the horizon when
// region `region` has its weekly mean multiplied by `multiplier` from
// 1-based week `start_week` onward. Fitted means stay at the baseline.
double outbreak_alarm_rate(const EpiScenario& scenario, double alpha_level, std::size_t region,
                           std::size_t start_week, double multiplier, std::size_t replications, std::uint64_t seed,
                           unsigned workers = 1);

}  // namespace nbconc
