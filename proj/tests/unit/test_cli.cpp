#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "nbconc/bounds.hpp"

using namespace nbconc;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("nbconc_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kReferenceScenario = R"({"weeks": 12, "alpha_levels": [0.05, 0.01], "regions": [
  {"id": "R1", "weekly_mu": 210, "kappa": 0.35}, {"id": "R2", "weekly_mu": 340, "kappa": 0.25},
  {"id": "R3", "weekly_mu": 290, "kappa": 0.40}, {"id": "R4", "weekly_mu": 480, "kappa": 0.20},
  {"id": "R5", "weekly_mu": 380, "kappa": 0.30}]})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bound subcommands") {
  auto r = run_cli({"bound", "kolmogorov-dep", "--shape", "4", "--rate", "4", "--thetas", "@design", "--lambda",
                    "476.52"});
  REQUIRE(r.code == cli::kOk);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["bound"].get<double>() - 0.05) < 1e-3);
  CHECK(j.contains("components"));

  r = run_cli({"bound", "bernstein", "--shape", "4", "--rate", "4", "--thetas", "@design", "--lambda", "0.0001"});
  REQUIRE(r.code == cli::kOk);
  CHECK(nlohmann::json::parse(r.out)["bound"].get<double>() == 1.0);

  r = run_cli({"bound", "chernoff", "--params", "3:0.3,5:0.5,8:0.7", "--a", "2"});
  REQUIRE(r.code == cli::kOk);
  j = nlohmann::json::parse(r.out);
  const std::vector<NBParams> params{{3, 0.3}, {5, 0.5}, {8, 0.7}};
  const auto lib = chernoff_mean_deviation_bound(params, 2.0);
  CHECK(j["bound"].get<double>() == lib.bound_value);
  CHECK(j["optimizer"]["t_star"].get<double>() == lib.optimizer->t_star);

  r = run_cli({"bound", "kolmogorov-indep", "--params", "@design", "--alpha", "0.05"});
  REQUIRE(r.code == cli::kOk);
  CHECK(std::abs(nlohmann::json::parse(r.out)["threshold"].get<double>() - 72.49) < 0.01);

  r = run_cli({"--format", "delimited", "bound", "kolmogorov-indep", "--params", "3:0.3", "--lambda", "100"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.rfind("threshold,bound,raw_bound\n", 0) == 0);
}

TEST_CASE("bound error paths and exit codes") {
  CHECK(run_cli({"bound", "nonsense", "--lambda", "1"}).code == cli::kUsageError);
  CHECK(run_cli({"bound", "bernstein", "--bogus"}).code == cli::kUsageError);
  CHECK(run_cli({}).code == cli::kUsageError);
  auto r = run_cli({"bound", "kolmogorov-indep", "--params", "3:0.3", "--lambda", "-1"});
  CHECK(r.code == cli::kDomainError);
  CHECK(r.err.find("lambda") != std::string::npos);
  CHECK(run_cli({"bound", "chernoff", "--params", "3:1.5", "--a", "1"}).code == cli::kDomainError);
  CHECK(run_cli({"bound", "kolmogorov-dep", "--shape", "4", "--rate", "4", "--thetas", "1,0", "--lambda", "3"}).code ==
        cli::kDomainError);
}

TEST_CASE("limit subcommand") {
  const auto dir = scratch("limit");
  write(dir / "epi.json", kReferenceScenario);
  auto r = run_cli({"limit", "--scenario", (dir / "epi.json").string()});
  REQUIRE(r.code == cli::kOk);
  auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["v_n"].get<double>() - 2028900.0) < 1e-3);
  CHECK(std::abs(j["limits"][0]["lambda"].get<double>() - 6370.0) <= 1.0);
  CHECK(std::abs(j["limits"][1]["lambda"].get<double>() - 14244.0) <= 1.0);

  r = run_cli({"limit", "--scenario", (dir / "epi.json").string(), "--alpha", "0.999999999"});
  REQUIRE(r.code == cli::kOk);
  j = nlohmann::json::parse(r.out);
  CHECK(j["limits"][0]["lambda"].get<double>() == doctest::Approx(std::sqrt(2028900.0)).epsilon(1e-8));

  r = run_cli({"limit", "--nb2", "5:0", "--alpha", "0.05"});
  REQUIRE(r.code == cli::kOk);
  CHECK(nlohmann::json::parse(r.out)["v_n"].get<double>() == 5.0);

  write(dir / "empty.json", R"({"weeks": 12, "regions": []})");
  CHECK(run_cli({"limit", "--scenario", (dir / "empty.json").string()}).code == cli::kDomainError);
  CHECK(run_cli({"limit", "--nb2", ""}).code == cli::kDomainError);
}

TEST_CASE("monitor subcommand") {
  const auto dir = scratch("monitor");
  write(dir / "epi.json", kReferenceScenario);
  std::string flat = "R1,R2,R3,R4,R5\n";
  for (int w = 0; w < 12; ++w) flat += "210,340,290,480,380\n";
  write(dir / "flat.csv", flat);
  auto r = run_cli({"monitor", "--scenario", (dir / "epi.json").string(), "--counts", (dir / "flat.csv").string()});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.rfind("period,S_t,lambda_alpha,alarm\n", 0) == 0);
  CHECK(r.out.find(",1\n") == std::string::npos);

  // Single-region scenario where the first week's excess equals the limit
  // exactly: V = 2 * 50 = 100, alpha = 0.25 -> lambda = 20.
  write(dir / "one.json", R"({"weeks": 2, "alpha_levels": [0.25], "regions": [{"id": "A", "weekly_mu": 50}]})");
  write(dir / "spike.csv", "A\n70\n50\n");
  r = run_cli({"monitor", "--scenario", (dir / "one.json").string(), "--counts", (dir / "spike.csv").string(),
               "--out", (dir / "hist.csv").string()});
  CHECK(r.code == cli::kAlarm);
  CHECK(slurp(dir / "hist.csv") == "period,S_t,lambda_alpha,alarm\n1,20,20,1\n2,20,20,1\n");

  write(dir / "bad.csv", "A\n70\nabc\n");
  r = run_cli({"monitor", "--scenario", (dir / "one.json").string(), "--counts", (dir / "bad.csv").string()});
  CHECK(r.code == cli::kDomainError);
  CHECK(r.err.find("line 3") != std::string::npos);

  CHECK(run_cli({"monitor", "--scenario", (dir / "one.json").string()}).code == cli::kUsageError);
}

TEST_CASE("reproduce writes deterministic, provenance-tagged output") {
  const auto a = scratch("repro_a");
  const auto b = scratch("repro_b");
  const auto c = scratch("repro_c");
  auto ra = run_cli({"reproduce", "figures", "--seed", "42", "--reps", "300", "--out", a.string()});
  auto rb = run_cli({"reproduce", "figures", "--seed", "42", "--reps", "300", "--out", b.string()});
  auto rc = run_cli({"reproduce", "figures", "--seed", "42", "--reps", "300", "--workers", "8", "--out",
                     c.string()});
  REQUIRE(ra.code == cli::kOk);
  REQUIRE(rb.code == cli::kOk);
  REQUIRE(rc.code == cli::kOk);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    CHECK(slurp(entry.path()) == slurp(b / name));
    CHECK(slurp(entry.path()) == slurp(c / name));
    ++files;
  }
  CHECK(files == 9);  // fig1..fig8 + report.json
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  CHECK(report["environment"]["seed"].get<std::uint64_t>() == 42);
  CHECK(report["environment"]["version"].get<std::string>() == "0.1.0");

  const auto t = scratch("repro_t");
  REQUIRE(run_cli({"reproduce", "table2", "--reps", "200", "--out", t.string()}).code == cli::kOk);
  const auto tj = nlohmann::json::parse(slurp(t / "report.json"));
  for (const auto& [key, row] : tj["table2"]["rows"].items()) {
    const double ind = row["independent"].get<double>(), dep = row["dependent"].get<double>();
    CHECK(row["percent_change"].get<double>() == doctest::Approx(100.0 * (dep / ind - 1.0)));
  }
  CHECK(fs::exists(t / "table2.csv"));

  // Output location under an existing regular file cannot be created.
  write(t / "blocker", "x");
  CHECK(run_cli({"reproduce", "table2", "--reps", "10", "--out", (t / "blocker" / "sub").string()}).code ==
        cli::kDomainError);
  CHECK(run_cli({"reproduce", "everything"}).code == cli::kUsageError);
}

}  // TEST_SUITE
