#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nbconc/simulation.hpp"
#include "nbconc/surveillance.hpp"

namespace nbconc {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr std::size_t kDefaultTable2Reps = 2000;
inline constexpr std::size_t kDefaultEpiReps = 5000;

struct PairedStatistic {
  double independent = 0.0;
  double dependent = 0.0;
  double percent_change() const { return 100.0 * (dependent / independent - 1.0); }
};

struct Table2Report {
  std::size_t replications = 0;
  // Keys: mean, median, sd, p95, p99, theoretical_bound, efficiency.
  std::map<std::string, PairedStatistic> rows;
  double exceedance_independent = 0.0;
  double exceedance_dependent = 0.0;
  double lambda_correlation = 0.0;
  double amplification_ratio = 0.0;
  bool amplified = false;
  // Moment-matching diagnostics for the mixture vs the independent design.
  double aggregate_variance_gap = 0.0;      // |sum Var_dep / sum Var_indep - 1|
  double max_component_variance_gap = 0.0;  // max_i |Var_dep_i / Var_indep_i - 1|
  ExperimentResult independent;
  ExperimentResult dependent;
};

struct EpiModeResult {
  MaxOrdering mode = MaxOrdering::TimePrefix;
  SimulationSummary summary;
  bool matches_reference = false;  // p95 within 5% of 3018 and efficiency within 0.03 of 0.47
};

struct EpiReport {
  std::size_t replications = 0;
  double v_n = 0.0;
  double lambda_05 = 0.0;
  double lambda_01 = 0.0;
  double total_expected = 0.0;
  std::vector<EpiModeResult> modes;
  std::string matching_mode;  // empty when neither ordering matches
  double p95 = 0.0;           // from the matching mode (time-prefix otherwise)
  double efficiency = 0.0;
  double exceedance_rate = 0.0;
  double outbreak_alarm_rate = 0.0;  // +50% on region 4 from week 6
  std::vector<DeviationSample> samples;  // of the reported mode
};

struct ReproduceOptions {
  std::uint64_t seed = kDefaultSeed;
  std::size_t table2_reps = kDefaultTable2Reps;
  std::size_t epi_reps = kDefaultEpiReps;
  unsigned workers = 1;
};

Table2Report build_table2(const ReproduceOptions& opts);
EpiReport build_epi(const ReproduceOptions& opts);

// Columnar figure data; columns[i] names values[*][i].
struct FigureSeries {
  std::string id;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::vector<FigureSeries> build_figures(const ReproduceOptions& opts);

void write_series_csv(std::ostream& out, const FigureSeries& series);

// Writes report.json plus CSV companions for `which` in {table2, epi,
// figures, all} under out_dir. Returns the paths written.
std::vector<std::filesystem::path> write_reproduction(const std::string& which, const std::filesystem::path& out_dir,
                                                      const ReproduceOptions& opts);

// Formats a double the same way in every output file.
std::string format_number(double x);

}  // namespace nbconc
