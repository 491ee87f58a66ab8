#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nbconc/bounds.hpp"
#include "nbconc/errors.hpp"
#include "nbconc/reproduce.hpp"
#include "nbconc/simulation.hpp"
#include "nbconc/surveillance.hpp"

namespace nbconc::cli {

namespace {

using Json = nlohmann::ordered_json;

enum class Format { Object, Delimited };

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw DomainError("domain", "'" + s + "' is not a number");
  return v;
}

// "r:p,r:p,..." or "@design" for the twenty-variable moment-matched design.
std::vector<NBParams> parse_nb_list(const std::string& spec) {
  if (spec == "@design") return build_moment_matched_design().independent;
  std::vector<NBParams> out;
  for (const auto& item : split(spec, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw DomainError("domain", "expected r:p, got '" + item + "'");
    out.emplace_back(to_double(parts[0]), to_double(parts[1]));
  }
  if (out.empty()) throw DomainError("domain", "parameter list is empty");
  return out;
}

// "mu:kappa,..."
std::vector<NB2Params> parse_nb2_list(const std::string& spec) {
  std::vector<NB2Params> out;
  for (const auto& item : split(spec, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 2) throw DomainError("domain", "expected mu:kappa, got '" + item + "'");
    out.emplace_back(to_double(parts[0]), to_double(parts[1]));
  }
  if (out.empty()) throw DomainError("domain", "parameter list is empty");
  return out;
}

std::vector<double> parse_thetas(const std::string& spec) {
  if (spec == "@design") return build_moment_matched_design().mixture.thetas();
  std::vector<double> out;
  for (const auto& item : split(spec, ',')) out.push_back(to_double(item));
  if (out.empty()) throw DomainError("domain", "theta list is empty");
  return out;
}

Json bound_json(const BoundResult& r) {
  Json j{{"threshold", r.threshold}, {"bound", r.bound_value}, {"raw_bound", r.raw_value}};
  if (r.components) j["components"] = {{"cond_term", r.components->cond_term}, {"mix_term", r.components->mix_term}};
  if (r.optimizer)
    j["optimizer"] = {{"t_star", r.optimizer->t_star},
                      {"iterations", r.optimizer->iterations},
                      {"converged", r.optimizer->converged}};
  return j;
}

std::string csv_value(const Json& v) {
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) return nbconc::format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Flattens one level of nesting with '.' separators into header + row.
void emit(std::ostream& out, const Json& j, Format format) {
  if (format == Format::Object) {
    out << j.dump(2) << '\n';
    return;
  }
  std::vector<std::string> keys;
  std::vector<std::string> values;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it->is_object()) {
      for (auto jt = it->begin(); jt != it->end(); ++jt) {
        keys.push_back(it.key() + "." + jt.key());
        values.push_back(csv_value(*jt));
      }
    } else {
      keys.push_back(it.key());
      values.push_back(csv_value(*it));
    }
  }
  for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << keys[i];
  out << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << values[i];
  out << '\n';
}

std::string default_out_dir() {
  if (const char* env = std::getenv("NBCONC_OUT_DIR"); env && *env) return env;
  return "nbconc-out";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concentration bounds, Monte Carlo reproduction and NB2 surveillance monitoring", "nbconc"};
  app.require_subcommand(1);

  std::string format_name = "object";
  app.add_option("--format", format_name, "Output format for single results")
      ->check(CLI::IsMember({"object", "delimited"}));

  // bound
  auto* bound = app.add_subcommand("bound", "Evaluate or invert a tail bound");
  std::string kind;
  bound->add_option("kind", kind, "chernoff | kolmogorov-indep | kolmogorov-dep | bernstein")
      ->required()
      ->check(CLI::IsMember({"chernoff", "kolmogorov-indep", "kolmogorov-dep", "bernstein"}));
  std::string params_spec;
  std::string thetas_spec;
  double shape = 0.0;
  double rate = 0.0;
  std::optional<double> lambda;
  std::optional<double> deviation;
  std::optional<double> invert_alpha;
  bound->add_option("--params", params_spec, "Independent NB list r:p,... or @design");
  bound->add_option("--shape", shape, "Gamma shape of the mixing variable");
  bound->add_option("--rate", rate, "Gamma rate of the mixing variable");
  bound->add_option("--thetas", thetas_spec, "Loadings theta_1,...,theta_n or @design");
  bound->add_option("--lambda", lambda, "Threshold for the maximal deviation");
  bound->add_option("--a", deviation, "Sample-mean deviation (chernoff)");
  bound->add_option("--alpha", invert_alpha, "Invert the bound at this level instead of evaluating");

  // limit
  auto* limit = app.add_subcommand("limit", "Tweedie control limits sqrt(V_n / alpha)");
  std::string nb2_spec;
  std::string scenario_path;
  std::vector<double> alphas;
  limit->add_option("--nb2", nb2_spec, "NB2 list mu:kappa,...");
  limit->add_option("--scenario", scenario_path, "Scenario config (JSON)");
  limit->add_option("--alpha", alphas, "Alpha level(s); defaults to the scenario's levels or 0.05");

  // reproduce
  auto* reproduce = app.add_subcommand("reproduce", "Regenerate tables and figure data");
  std::string which;
  reproduce->add_option("which", which, "table2 | epi | figures | all")
      ->required()
      ->check(CLI::IsMember({"table2", "epi", "figures", "all"}));
  std::uint64_t seed = kDefaultSeed;
  bool fresh = false;
  std::optional<std::size_t> reps;
  unsigned workers = 1;
  std::string out_dir = default_out_dir();
  reproduce->add_option("--seed", seed, "Master seed");
  reproduce->add_flag("--fresh", fresh, "Draw a fresh seed from the OS (reported in the output)");
  reproduce->add_option("--reps", reps, "Override replication counts")->check(CLI::PositiveNumber);
  reproduce->add_option("--workers", workers, "Worker threads (results do not depend on this)")
      ->check(CLI::PositiveNumber);
  reproduce->add_option("--out", out_dir, "Output directory (default $NBCONC_OUT_DIR or ./nbconc-out)");

  // monitor
  auto* monitor = app.add_subcommand("monitor", "Replay weekly counts through the cumulative-deviation monitor");
  std::string counts_path;
  std::optional<double> monitor_alpha;
  std::string history_path;
  monitor->add_option("--scenario", scenario_path, "Scenario config (JSON)")->required();
  monitor->add_option("--counts", counts_path, "Weekly counts (CSV, header of region ids)")->required();
  monitor->add_option("--alpha", monitor_alpha, "Alpha level (default: first scenario level)");
  monitor->add_option("--out", history_path, "History CSV path (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsageError;
  }
  const Format format = format_name == "delimited" ? Format::Delimited : Format::Object;

  try {
    if (*bound) {
      BoundResult result;
      std::function<double(double)> as_function;
      auto need_lambda = [&] {
        if (!lambda && !invert_alpha) throw DomainError("domain", "--lambda (or --alpha to invert) is required");
      };
      if (kind == "chernoff") {
        if (!deviation) throw DomainError("domain", "--a is required for the chernoff bound");
        const auto params = parse_nb_list(params_spec);
        result = chernoff_mean_deviation_bound(params, *deviation);
        emit(out, bound_json(result), format);
        return kOk;
      }
      if (kind == "kolmogorov-indep") {
        need_lambda();
        const auto params = parse_nb_list(params_spec);
        as_function = [params](double l) { return kolmogorov_independent_bound(params, l).bound_value; };
        if (lambda) result = kolmogorov_independent_bound(params, *lambda);
      } else {
        need_lambda();
        const GammaMixture model(shape, rate, parse_thetas(thetas_spec));
        if (kind == "kolmogorov-dep") {
          as_function = [model](double l) { return dependent_kolmogorov_bound(model, l).bound_value; };
          if (lambda) result = dependent_kolmogorov_bound(model, *lambda);
        } else {
          as_function = [model](double l) { return bernstein_dependent_bound(model, l).bound_value; };
          if (lambda) result = bernstein_dependent_bound(model, *lambda);
        }
      }
      if (lambda) {
        emit(out, bound_json(result), format);
      } else {
        const double threshold = invert_bound(as_function, *invert_alpha);
        emit(out, Json{{"alpha", *invert_alpha}, {"threshold", threshold}, {"bound", as_function(threshold)}}, format);
      }
      return kOk;
    }

    if (*limit) {
      double v_n = 0.0;
      if (!scenario_path.empty()) {
        const auto cfg = load_scenario_config(scenario_path);
        v_n = cfg.scenario.tweedie_variance();
        if (alphas.empty()) alphas = cfg.alpha_levels;
      } else {
        v_n = tweedie_variance(parse_nb2_list(nb2_spec));
      }
      if (alphas.empty()) alphas = {0.05};
      Json limits = Json::array();
      for (double a : alphas) limits.push_back({{"alpha", a}, {"lambda", control_limit(v_n, a)}});
      if (format == Format::Object) {
        out << Json{{"v_n", v_n}, {"limits", limits}}.dump(2) << '\n';
      } else {
        out << "alpha,lambda,v_n\n";
        for (const auto& l : limits)
          out << format_number(l["alpha"].get<double>()) << ',' << format_number(l["lambda"].get<double>()) << ','
              << format_number(v_n) << '\n';
      }
      return kOk;
    }

    if (*reproduce) {
      ReproduceOptions opts;
      opts.seed = seed;
      if (fresh) opts.seed = (std::uint64_t{std::random_device{}()} << 32) | std::random_device{}();
      if (reps) opts.table2_reps = opts.epi_reps = *reps;
      opts.workers = workers;
      const auto files = write_reproduction(which, out_dir, opts);
      Json listing = Json::array();
      for (const auto& f : files) listing.push_back(f.string());
      emit(out, Json{{"seed", opts.seed}, {"version", kVersion}, {"files", listing}}, Format::Object);
      return kOk;
    }

    if (*monitor) {
      const auto cfg = load_scenario_config(scenario_path);
      const double alpha_level =
          monitor_alpha ? *monitor_alpha : (cfg.alpha_levels.empty() ? 0.05 : cfg.alpha_levels.front());
      const double lam = control_limit(cfg.scenario.tweedie_variance(), alpha_level);
      std::ifstream counts_in(counts_path);
      if (!counts_in) throw DomainError("io", "cannot open counts file " + counts_path);
      const CountsTable table = parse_counts(counts_in);
      if (table.region_ids.size() != cfg.scenario.regions().size())
        throw ParseError(1, "header names " + std::to_string(table.region_ids.size()) + " regions, scenario has " +
                                std::to_string(cfg.scenario.regions().size()));
      std::vector<double> fitted;
      for (const auto& r : cfg.scenario.regions()) fitted.push_back(r.weekly_mu);

      MonitoringState state = start_monitoring(lam, cfg.scenario.weeks());
      for (const auto& row : table.rows) state = monitor_step(state, row, fitted);

      if (history_path.empty()) {
        write_history_csv(out, state);
      } else {
        std::ofstream hist(history_path);
        if (!hist) throw DomainError("io", "cannot write " + history_path);
        write_history_csv(hist, state);
      }
      return state.any_alarm() ? kAlarm : kOk;
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  return kUsageError;
}

}  // namespace nbconc::cli
