#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "impactlens/analysis.hpp"
#include "impactlens/errors.hpp"
#include "impactlens/timeseries.hpp"

using namespace impactlens;

namespace {
Date d(int y, int m, int day) { return Date::from_ymd(y, m, day); }
}

TEST_CASE("dates: parse, format, arithmetic") {
  const Date x = Date::parse("2020-03-04");
  CHECK(x.to_string() == "2020-03-04");
  CHECK(x.year() == 2020);
  CHECK(x.weekday() == 3);  // a Wednesday
  CHECK((x + 1).to_string() == "2020-03-05");
  CHECK((x - Date::parse("2020-02-29")) == 4);
  CHECK_NOTHROW(Date::parse("2020-02-29"));
  CHECK_THROWS_AS(Date::parse("2019-02-29"), ValidationError);
  CHECK_THROWS_AS(Date::parse("13/45/2020"), ValidationError);
  CHECK(nth_weekday_of_month(2020, 1, 1, 3) == d(2020, 1, 20));   // MLK 2020
  CHECK(last_weekday_of_month(2019, 5, 1) == d(2019, 5, 27));     // Memorial 2019
  CHECK(nth_weekday_of_month(2017, 11, 4, 4) == d(2017, 11, 23)); // Thanksgiving
}

TEST_CASE("build_daily_series fills missing days with zero") {
  const auto s = build_daily_series({{d(2020, 1, 1), 3}, {d(2020, 1, 3), 2}},
                                    d(2020, 1, 1), d(2020, 1, 3));
  CHECK(s.values == std::vector<double>{3, 0, 2});
  CHECK(s.start == d(2020, 1, 1));
}

TEST_CASE("build_daily_series: empty records give a zero series") {
  const auto s = build_daily_series({}, d(2020, 1, 1), d(2020, 1, 3));
  CHECK(s.values == std::vector<double>{0, 0, 0});
}

TEST_CASE("build_daily_series sums duplicate dates") {
  const auto s = build_daily_series({{d(2020, 1, 2), 1}, {d(2020, 1, 2), 4}},
                                    d(2020, 1, 1), d(2020, 1, 2));
  CHECK(s.values == std::vector<double>{0, 5});
}

TEST_CASE("build_daily_series rejects bad input") {
  CHECK_THROWS_AS(build_daily_series({{d(2020, 1, 9), 1}}, d(2020, 1, 1), d(2020, 1, 3)),
                  RangeViolationError);
  CHECK_THROWS_AS(build_daily_series({{d(2020, 1, 2), -1}}, d(2020, 1, 1), d(2020, 1, 3)),
                  ValidationError);
  CHECK_THROWS_AS(build_daily_series({}, d(2020, 1, 3), d(2020, 1, 1)), ValidationError);
}

TEST_CASE("build_daily_series is permutation invariant") {
  std::vector<std::pair<Date, double>> records;
  std::mt19937 gen(17);
  for (int i = 0; i < 60; ++i)
    records.emplace_back(d(2020, 1, 1) + static_cast<int>(gen() % 31),
                         static_cast<double>(gen() % 5));
  const auto base = build_daily_series(records, d(2020, 1, 1), d(2020, 1, 31));
  for (int rep = 0; rep < 20; ++rep) {
    std::shuffle(records.begin(), records.end(), gen);
    CHECK(build_daily_series(records, d(2020, 1, 1), d(2020, 1, 31)).values ==
          base.values);
  }
}

TEST_CASE("series total equals record count for unit counts") {
  std::vector<std::pair<Date, double>> records;
  std::mt19937 gen(3);
  for (int i = 0; i < 200; ++i)
    records.emplace_back(d(2019, 6, 1) + static_cast<int>(gen() % 30), 1.0);
  const auto s = build_daily_series(records, d(2019, 6, 1), d(2019, 6, 30));
  double total = 0;
  for (const double v : s.values) total += v;
  CHECK(total == doctest::Approx(200.0));
}

TEST_CASE("split_window produces the reference post lengths") {
  DailySeries series{d(2017, 1, 1), std::vector<double>(1190, 1.0)};
  const auto w1 = split_window(series, std::nullopt, window_preset(1));
  CHECK(w1.pre.values.size() == 1158);
  CHECK(w1.post.values.size() == 13);
  const auto w2 = split_window(series, std::nullopt, window_preset(2));
  CHECK(w2.post.values.size() == 25);
  CHECK(w2.pre.values.size() + w2.post.values.size() ==
        static_cast<std::size_t>(window_preset(2).total_length()));
}

TEST_CASE("split_window: minimal post segment and covariate alignment") {
  DailySeries series{d(2020, 1, 1), std::vector<double>(40, 2.0)};
  for (std::size_t i = 0; i < series.values.size(); ++i)
    series.values[i] = static_cast<double>(i);
  AnalysisWindow window(d(2020, 1, 1), d(2020, 1, 31), d(2020, 1, 31));
  CovariateSet cov{d(2020, 1, 1), {"c"}, {std::vector<double>(40, 7.0)}};
  const auto split = split_window(series, cov, window);
  CHECK(split.pre.values.size() == 30);
  CHECK(split.post.values.size() == 1);
  CHECK(split.post.values[0] == 30.0);
  CHECK(split.pre_covariates->columns[0].size() == 30);
  CHECK(split.post_covariates->columns[0].size() == 1);
  CHECK(split.post.start == d(2020, 1, 31));
}

TEST_CASE("split_window rejects windows outside the series") {
  DailySeries series{d(2019, 1, 1), std::vector<double>(200, 1.0)};
  AnalysisWindow window(d(2019, 1, 1), d(2019, 8, 1), d(2019, 9, 1));
  CHECK_THROWS_AS(split_window(series, std::nullopt, window), ValidationError);
}

TEST_CASE("analysis window invariants") {
  CHECK_THROWS_AS(AnalysisWindow(d(2020, 2, 1), d(2020, 1, 1), d(2020, 3, 1)),
                  ValidationError);
  // pre period below the 30-day floor
  CHECK_THROWS_AS(AnalysisWindow(d(2020, 1, 1), d(2020, 1, 15), d(2020, 2, 1)),
                  ValidationError);
  const AnalysisWindow ok(d(2020, 1, 1), d(2020, 2, 1), d(2020, 2, 1));
  CHECK(ok.pre_length() == 31);
  CHECK(ok.post_length() == 1);
}

TEST_CASE("standardize: symmetric example") {
  const auto [scaled, params] = standardize({1, 2, 3});
  CHECK(params.mean == doctest::Approx(2.0));
  CHECK(params.sd == doctest::Approx(1.0));
  CHECK(scaled[0] == doctest::Approx(-1.0));
  CHECK(scaled[1] == doctest::Approx(0.0));
  CHECK(scaled[2] == doctest::Approx(1.0));
}

TEST_CASE("standardize: already standardized input is unchanged") {
  std::vector<double> input;
  std::mt19937 gen(5);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 500; ++i) input.push_back(nd(gen));
  // force exact mean 0, sd 1
  auto [once, p1] = standardize(input);
  const auto [twice, p2] = standardize(once);
  CHECK(std::abs(p2.mean) < 1e-10);
  CHECK(p2.sd == doctest::Approx(1.0).epsilon(1e-10));
  for (std::size_t i = 0; i < once.size(); ++i)
    CHECK(std::abs(twice[i] - once[i]) < 1e-10);
}

TEST_CASE("standardize rejects constant segments") {
  CHECK_THROWS_AS(standardize({4, 4, 4, 4}), DegenerateScaleError);
  CHECK_THROWS_AS(standardize({1}), ValidationError);
}

TEST_CASE("standardize round-trips within 1e-10 on random segments") {
  std::mt19937 gen(11);
  std::normal_distribution<double> nd(24.0, 6.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> segment;
    const int n = 30 + static_cast<int>(gen() % 400);
    for (int i = 0; i < n; ++i) segment.push_back(std::max(0.0, nd(gen)));
    const auto [scaled, params] = standardize(segment);
    double max_err = 0.0;
    for (std::size_t i = 0; i < segment.size(); ++i)
      max_err = std::max(max_err, std::abs(params.invert(scaled[i]) - segment[i]));
    CHECK(max_err < 1e-10);
  }
}

TEST_CASE("covariate alignment checks") {
  DailySeries series{d(2020, 1, 1), {1, 2, 3}};
  CovariateSet misaligned{d(2020, 1, 2), {"c"}, {{1, 2, 3}}};
  CHECK_THROWS_AS(misaligned.check_aligned(series), ValidationError);
  CovariateSet short_col{d(2020, 1, 1), {"c"}, {{1, 2}}};
  CHECK_THROWS_AS(short_col.check_aligned(series), ValidationError);
  CovariateSet good{d(2020, 1, 1), {"c"}, {{1, 2, 3}}};
  CHECK_NOTHROW(good.check_aligned(series));
}
