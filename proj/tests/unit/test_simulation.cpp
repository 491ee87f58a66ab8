#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "nbconc/bounds.hpp"
#include "nbconc/errors.hpp"
#include "nbconc/simulation.hpp"

using namespace nbconc;

TEST_SUITE("simulation") {

TEST_CASE("percentiles interpolate between order statistics") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(percentile_sorted(v, 0.95) == doctest::Approx(3.85));
  CHECK(percentile_sorted(v, 0.5) == doctest::Approx(2.5));
  CHECK(percentile_sorted(v, 0.0) == 1.0);
  CHECK(percentile_sorted(v, 1.0) == 4.0);

  std::vector<DeviationSample> s;
  for (double x : {5.0, 1.0, 3.0, 2.0, 4.0}) s.push_back({x, std::nullopt});
  const auto sum = summarize(s, 4.0);
  CHECK(sum.median == 3.0);
  CHECK(sum.mean == 3.0);
  CHECK(sum.sd == doctest::Approx(std::sqrt(2.5)));
  CHECK(sum.p95 == doctest::Approx(4.8));
  CHECK(sum.p99 == doctest::Approx(4.96));
  CHECK(sum.efficiency == doctest::Approx(4.8 / 4.0));
  CHECK(sum.exceedance_rate == doctest::Approx(0.4));  // inclusive: 4 and 5
  CHECK(sum.median <= sum.p95);
  CHECK(sum.p95 <= sum.p99);
}

TEST_CASE("max_abs_partial_sum") {
  const std::vector<double> inc{1.0, -3.0, 0.5, 4.0};
  CHECK(max_abs_partial_sum(inc) == doctest::Approx(2.5));
  CHECK(max_abs_partial_sum(std::vector<double>{-2.0}) == 2.0);
}

TEST_CASE("moment-matched design") {
  const auto d = build_moment_matched_design();
  REQUIRE(d.independent.size() == 20);
  const double rs[] = {3, 5, 8}, ps[] = {0.3, 0.5, 0.7};
  double mean = 0.0, var = 0.0, mix_var = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(d.independent[i].r() == rs[i % 3]);
    CHECK(d.independent[i].p() == ps[i % 3]);
    CHECK(d.mixture.thetas()[i] == d.independent[i].mean());
    mean += d.independent[i].mean();
    var += d.independent[i].variance();
    mix_var += d.mixture.marginal_variance(i);
    CHECK(d.mixture.marginal_mean(i) == doctest::Approx(d.independent[i].mean()));
  }
  // 6 cycles of (7, 5, 24/7) plus (7, 5).
  CHECK(mean == doctest::Approx(6 * (12.0 + 24.0 / 7.0) + 12.0).epsilon(1e-14));
  CHECK(mean == doctest::Approx(104.571).epsilon(1e-5));
  CHECK(var == doctest::Approx(6 * (70.0 / 3.0 + 10.0 + 2.4 / 0.49) + 70.0 / 3.0 + 10.0).epsilon(1e-14));
  CHECK(var == doctest::Approx(262.72).epsilon(1e-4));
  CHECK(std::abs(mean / 104.6 - 1) < 1e-3);
  CHECK(std::abs(var / 262.7 - 1) < 1e-3);
  CHECK(d.mixture.gamma_shape() == 4.0);
  CHECK(d.mixture.gamma_rate() == 4.0);
  CHECK(d.mixture.thetas()[0] == doctest::Approx(7.0).epsilon(1e-14));
  // Aggregate moment match within 5%.
  CHECK(std::abs(mix_var / var - 1) < 0.05);
}

TEST_CASE("single variable, single replication degenerates to |x - mu|") {
  const std::vector<NBParams> one{NBParams(3.0, 0.3)};
  const auto res = run_independent_experiment(one, 1, 0.05, 17);
  REQUIRE(res.samples.size() == 1);
  StreamEngine eng(RngHandle{17, 0});
  const double x = static_cast<double>(sample_nb(one[0], eng));
  CHECK(res.samples[0].max_abs_dev == doctest::Approx(std::abs(x - 7.0)));
  CHECK_FALSE(res.samples[0].lambda_draw.has_value());
  CHECK(res.summary.replications == 1);
}

TEST_CASE("results do not depend on the worker count") {
  const auto d = build_moment_matched_design();
  const auto i1 = run_independent_experiment(d.independent, 500, 0.05, 8, 1);
  const auto d1 = run_dependent_experiment(d.mixture, 500, 0.05, 8, 1);
  for (unsigned w : {2u, 8u}) {
    const auto iw = run_independent_experiment(d.independent, 500, 0.05, 8, w);
    const auto dw = run_dependent_experiment(d.mixture, 500, 0.05, 8, w);
    CHECK(iw.summary.mean == i1.summary.mean);
    CHECK(iw.summary.sd == i1.summary.sd);
    CHECK(iw.summary.p99 == i1.summary.p99);
    CHECK(dw.summary.mean == d1.summary.mean);
    CHECK(dw.summary.p95 == d1.summary.p95);
    for (std::size_t k = 0; k < 500; ++k) {
      CHECK(dw.samples[k].max_abs_dev == d1.samples[k].max_abs_dev);
      CHECK(*dw.samples[k].lambda_draw == *d1.samples[k].lambda_draw);
    }
  }
}

TEST_CASE("lambda_correlation edge cases") {
  std::vector<DeviationSample> perfect;
  for (double x : {1.0, 2.0, 5.0, 7.5}) perfect.push_back({x, x});
  CHECK(lambda_correlation(perfect) == doctest::Approx(1.0));

  std::vector<DeviationSample> flat;
  for (double x : {1.0, 2.0, 5.0}) flat.push_back({x, 3.0});
  try {
    lambda_correlation(flat);
    FAIL("expected zero-variance");
  } catch (const DomainError& e) {
    CHECK(e.code() == "zero-variance");
  }

  std::vector<DeviationSample> missing{{1.0, 1.0}, {2.0, std::nullopt}};
  CHECK_THROWS_AS(lambda_correlation(missing), DomainError);
  CHECK_THROWS_AS(lambda_correlation(std::vector<DeviationSample>{{1.0, 1.0}}), DomainError);
}

TEST_CASE("dependent exceedance of the mixture Kolmogorov threshold stays below alpha") {
  const auto d = build_moment_matched_design();
  constexpr std::size_t kReps = 20000;
  const auto res = run_dependent_experiment(d.mixture, kReps, 0.05, 55, 8);
  CHECK(res.summary.theoretical_lambda == doctest::Approx(476.52).epsilon(2e-5));
  CHECK(res.summary.exceedance_rate <= 0.05 + 3 * std::sqrt(0.05 * 0.95 / kReps));
}

TEST_CASE("conditional independence within Lambda deciles") {
  const GammaMixture m(4.0, 4.0, {7.0, 5.0});
  constexpr int kReps = 200000;
  struct Row {
    double lambda, y1, y2;
  };
  std::vector<Row> rows;
  rows.reserve(kReps);
  for (int i = 0; i < kReps; ++i) {
    const auto d = sample_mixture_counts(m, RngHandle{808, static_cast<std::uint64_t>(i)});
    rows.push_back({d.lambda_draw, d.counts[0] - d.lambda_draw * 7.0, d.counts[1] - d.lambda_draw * 5.0});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.lambda < b.lambda; });
  for (int dec = 0; dec < 10; ++dec) {
    std::vector<double> a, b;
    for (int i = dec * kReps / 10; i < (dec + 1) * kReps / 10; ++i) {
      a.push_back(rows[i].y1);
      b.push_back(rows[i].y2);
    }
    CHECK(std::abs(pearson_correlation(a, b)) < 0.05);
  }
}

TEST_CASE("near-degenerate mixing matches the independent Poisson analogue") {
  const std::vector<double> th{7, 5, 24.0 / 7.0, 7, 5};
  const GammaMixture m(1e6, 1e6, th);
  std::vector<NB2Params> poisson;
  for (double t : th) poisson.emplace_back(t, 0.0);
  const auto dep = run_dependent_experiment(m, 20000, 0.05, 3, 8);
  const auto ind = run_independent_experiment(std::span<const NB2Params>(poisson), 20000, 0.05, 4, 8);
  CHECK(std::abs(dep.summary.mean / ind.summary.mean - 1) < 0.05);
}

TEST_CASE("amplification: equal-loading toy and degenerate limit") {
  const GammaMixture toy(1.0, 1.0, {1.0, 1.0});
  const MomentMatchedDesign toy_design{matched_independent(toy), toy};
  const auto amp = amplification_check(toy_design, 100000, 21, 8);
  CHECK(amp.amplified);
  MESSAGE("toy amplification ratio " << amp.ratio());

  const GammaMixture flat(1e6, 1e6, build_moment_matched_design().mixture.thetas());
  const MomentMatchedDesign flat_design{matched_independent(flat), flat};
  const auto lim = amplification_check(flat_design, 20000, 22, 8);
  CHECK(std::abs(lim.ratio() - 1) < 0.05);

  CHECK_THROWS_AS(amplification_check(toy_design, 99, 1), DomainError);
}

TEST_CASE("efficiency curve") {
  const std::vector<double> grid{0.0, 0.3, 0.3};
  const auto pts = efficiency_curve(grid, 5.0, 20, 400, 12, 4);
  REQUIRE(pts.size() == 3);
  CHECK(pts[1].efficiency == pts[2].efficiency);
  CHECK(pts[0].kappa == 0.0);
  // kappa = 0 uses V_n = n mu.
  const std::vector<NB2Params> poisson(20, NB2Params(5.0, 0.0));
  const auto res = run_independent_experiment(std::span<const NB2Params>(poisson), 400, 0.05, 12, 1);
  CHECK(res.summary.theoretical_lambda == doctest::Approx(std::sqrt(100.0 / 0.05)));
  CHECK(pts[0].efficiency == res.summary.efficiency);
  CHECK_THROWS_AS(efficiency_curve(std::vector<double>{}, 5.0, 20, 10, 1), DomainError);
}

TEST_CASE("efficiency does not grow with dispersion beyond Monte Carlo noise") {
  const std::vector<double> grid{0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0};
  const auto pts = efficiency_curve(grid, 5.0, 20, 2000, 42, 8);
  for (const auto& p : pts) MESSAGE("kappa " << p.kappa << " efficiency " << p.efficiency);
  for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i].efficiency <= pts[0].efficiency + 0.03);
}

}  // TEST_SUITE
