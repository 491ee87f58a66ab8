#include "nbconc/surveillance.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include "json.hpp"
#include <sstream>

#include "nbconc/bounds.hpp"
#include "nbconc/errors.hpp"

namespace nbconc {

using detail::require;

EpiScenario::EpiScenario(std::vector<Region> regions, std::size_t weeks)
    : regions_(std::move(regions)), weeks_(weeks) {
  require(!regions_.empty(), "domain", "scenario has no regions");
  require(weeks_ >= 1, "domain", "scenario horizon must be at least one week");
  for (std::size_t j = 0; j < regions_.size(); ++j) {
    auto& r = regions_[j];
    NB2Params(r.weekly_mu, r.kappa);  // validates
    if (r.id.empty()) r.id = "R" + std::to_string(j + 1);
  }
}

double EpiScenario::cumulative_mean(std::size_t j) const {
  return static_cast<double>(weeks_) * regions_.at(j).weekly_mu;
}

double EpiScenario::cumulative_variance(std::size_t j) const {
  const auto& r = regions_.at(j);
  return static_cast<double>(weeks_) * NB2Params(r.weekly_mu, r.kappa).variance();
}

double EpiScenario::total_expected() const {
  double total = 0.0;
  for (std::size_t j = 0; j < regions_.size(); ++j) total += cumulative_mean(j);
  return total;
}

double EpiScenario::tweedie_variance() const {
  std::vector<NB2Params> weekly;
  for (const auto& r : regions_) weekly.emplace_back(r.weekly_mu, r.kappa);
  return static_cast<double>(weeks_) * nbconc::tweedie_variance(weekly);
}

EpiScenario reference_epi_scenario() {
  return EpiScenario({{"R1", 210, 0.35}, {"R2", 340, 0.25}, {"R3", 290, 0.40}, {"R4", 480, 0.20}, {"R5", 380, 0.30}},
                     12);
}

ScenarioConfig parse_scenario_config(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("scenario config is not valid JSON: ") + e.what());
  }
  try {
    std::vector<Region> regions;
    for (const auto& r : doc.at("regions")) {
      regions.push_back(Region{r.value("id", std::string{}), r.at("weekly_mu").get<double>(),
                               r.value("kappa", 0.0)});
    }
    const auto weeks = doc.at("weeks").get<std::size_t>();
    std::vector<double> alphas = doc.value("alpha_levels", std::vector<double>{0.05});
    return ScenarioConfig{EpiScenario(std::move(regions), weeks), std::move(alphas)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("scenario config: ") + e.what());
  }
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("io", "cannot open scenario file " + path);
  return parse_scenario_config(in);
}

std::vector<ControlLimit> epi_control_limits(const EpiScenario& scenario, const std::vector<double>& alpha_levels) {
  const double v_n = scenario.tweedie_variance();
  std::vector<ControlLimit> out;
  out.reserve(alpha_levels.size());
  for (double a : alpha_levels) out.push_back({a, control_limit(v_n, a)});
  return out;
}

bool MonitoringState::any_alarm() const {
  for (const auto& h : history)
    if (h.alarm) return true;
  return false;
}

MonitoringState start_monitoring(double control_limit, std::size_t horizon) {
  require(std::isfinite(control_limit) && control_limit > 0.0, "domain", "control limit must be positive");
  require(horizon >= 1, "domain", "horizon must be at least one period");
  MonitoringState s;
  s.control_limit = control_limit;
  s.horizon = horizon;
  return s;
}

MonitoringState monitor_step(const MonitoringState& state, const std::vector<std::int64_t>& weekly_counts,
                             const std::vector<double>& fitted_mu) {
  require(weekly_counts.size() == fitted_mu.size(), "domain",
          "counts has " + std::to_string(weekly_counts.size()) + " regions but fitted means has " +
              std::to_string(fitted_mu.size()));
  if (state.period_index >= state.horizon)
    throw DomainError("horizon-exceeded", "monitoring horizon of " + std::to_string(state.horizon) + " periods reached");
  MonitoringState next = state;
  double delta = 0.0;
  for (std::size_t j = 0; j < weekly_counts.size(); ++j) {
    require(weekly_counts[j] >= 0, "domain", "counts must be nonnegative");
    delta += static_cast<double>(weekly_counts[j]) - fitted_mu[j];
  }
  next.period_index += 1;
  next.cumulative_deviation += delta;
  next.alarm = std::abs(next.cumulative_deviation) >= next.control_limit;
  next.history.push_back({next.period_index, next.cumulative_deviation, next.alarm});
  return next;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CountsTable parse_counts(std::istream& in) {
  CountsTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_row(line);
    if (!have_header) {
      table.region_ids = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.region_ids.size())
      throw ParseError(lineno, "expected " + std::to_string(table.region_ids.size()) + " columns, found " +
                                   std::to_string(cells.size()));
    std::vector<std::int64_t> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      std::int64_t v = 0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc{} || ptr != c.data() + c.size() || c.empty() || v < 0)
        throw ParseError(lineno, "'" + c + "' is not a nonnegative integer count");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(lineno, "counts file has no header row");
  return table;
}

void write_history_csv(std::ostream& out, const MonitoringState& state) {
  out << "period,S_t,lambda_alpha,alarm\n";
  char buf[64];
  for (const auto& h : state.history) {
    std::snprintf(buf, sizeof buf, "%.10g", h.cumulative_deviation);
    out << h.period << ',' << buf << ',';
    std::snprintf(buf, sizeof buf, "%.10g", state.control_limit);
    out << buf << ',' << (h.alarm ? 1 : 0) << '\n';
  }
}

const char* to_string(MaxOrdering mode) {
  return mode == MaxOrdering::RegionPrefix ? "region-prefix" : "time-prefix";
}

ExperimentResult run_epi_validation(const EpiScenario& scenario, std::size_t replications, double alpha_level,
                                    std::uint64_t seed, MaxOrdering mode, unsigned workers) {
  require(replications >= 1, "domain", "need at least one replication");
  const double lambda = control_limit(scenario.tweedie_variance(), alpha_level);
  std::vector<NB2Params> weekly;
  for (const auto& r : scenario.regions()) weekly.emplace_back(r.weekly_mu, r.kappa);
  const std::size_t n_regions = weekly.size();
  const std::size_t weeks = scenario.weeks();

  auto samples = run_replications(replications, workers, [&](std::size_t i) {
    StreamEngine engine(RngHandle{seed, i});
    // Same draw order in both modes: weeks outer, regions inner.
    std::vector<double> region_dev(n_regions, 0.0);
    double s_t = 0.0;
    double time_max = 0.0;
    for (std::size_t w = 0; w < weeks; ++w) {
      for (std::size_t j = 0; j < n_regions; ++j) {
        const double d = static_cast<double>(sample_nb2(weekly[j], engine)) - weekly[j].mu();
        region_dev[j] += d;
        s_t += d;
      }
      time_max = std::max(time_max, std::abs(s_t));
    }
    const double value = mode == MaxOrdering::TimePrefix ? time_max : max_abs_partial_sum(region_dev);
    return DeviationSample{value, std::nullopt};
  });
  return ExperimentResult{summarize(samples, lambda), std::move(samples)};
}

double outbreak_alarm_rate(const EpiScenario& scenario, double alpha_level, std::size_t region,
                           std::size_t start_week, double multiplier, std::size_t replications, std::uint64_t seed,
                           unsigned workers) {
  require(region < scenario.regions().size(), "domain", "outbreak region out of range");
  require(start_week >= 1 && start_week <= scenario.weeks(), "domain", "outbreak start week out of range");
  require(multiplier > 0.0, "domain", "outbreak multiplier must be positive");
  require(replications >= 1, "domain", "need at least one replication");
  const double lambda = control_limit(scenario.tweedie_variance(), alpha_level);

  std::vector<double> fitted;
  std::vector<NB2Params> baseline;
  std::vector<NB2Params> shifted;
  for (const auto& r : scenario.regions()) {
    fitted.push_back(r.weekly_mu);
    baseline.emplace_back(r.weekly_mu, r.kappa);
  }
  shifted = baseline;
  const auto& hot = scenario.regions()[region];
  shifted[region] = NB2Params(hot.weekly_mu * multiplier, hot.kappa);

  auto samples = run_replications(replications, workers, [&](std::size_t i) {
    StreamEngine engine(RngHandle{seed, i});
    MonitoringState state = start_monitoring(lambda, scenario.weeks());
    std::vector<std::int64_t> counts(fitted.size());
    for (std::size_t w = 1; w <= scenario.weeks(); ++w) {
      const auto& law = w >= start_week ? shifted : baseline;
      for (std::size_t j = 0; j < law.size(); ++j) counts[j] = sample_nb2(law[j], engine);
      state = monitor_step(state, counts, fitted);
    }
    return DeviationSample{state.any_alarm() ? 1.0 : 0.0, std::nullopt};
  });
  double fired = 0.0;
  for (const auto& s : samples) fired += s.max_abs_dev;
  return fired / static_cast<double>(replications);
}

}  // namespace nbconc
