#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "impactlens/errors.hpp"
#include "impactlens/ingest.hpp"

using namespace impactlens;
namespace fs = std::filesystem;

namespace {

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name, const std::string& content) {
    path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

Date d(int y, int m, int day) { return Date::from_ymd(y, m, day); }

}  // namespace

TEST_CASE("taxonomy maps the reference descriptions") {
  const CategoryTaxonomy tax = CategoryTaxonomy::lapd_default();
  CHECK(tax.category_of("ROBBERY") == std::string("robbery"));
  CHECK(tax.category_of("SHOPLIFTING-PETTY THEFT ($950 & UNDER)") ==
        std::string("shoplifting"));
  CHECK(tax.category_of("SHOPLIFTING - GRAND THEFT ($950.01 & OVER)") ==
        std::string("shoplifting"));
  CHECK(tax.category_of("THEFT-GRAND ($950.01 & OVER)EXCPT,GUNS,FOWL,LIVESTK,PROD") ==
        std::string("theft"));
  CHECK(tax.category_of("ASSAULT WITH DEADLY WEAPON, AGGRAVATED ASSAULT") ==
        std::string("assault_dw"));
  CHECK(tax.category_of("CRIMINAL HOMICIDE") == std::string("homicide"));
  CHECK(!tax.category_of("VANDALISM - FELONY"));
  // spelling drift: case and spacing are normalized
  CHECK(tax.category_of("  robbery ") == std::string("robbery"));
  CHECK(tax.category_slugs().size() == 9);
}

TEST_CASE("taxonomy rejects descriptions mapped twice") {
  CHECK_THROWS_AS(
      CategoryTaxonomy({"a", "b"}, {{"a", "A"}, {"b", "B"}},
                       {{"a", {"ROBBERY"}}, {"b", {"ROBBERY"}}}),
      ValidationError);
}

TEST_CASE("shipped taxonomy file equals the built-in default") {
  const fs::path path = fs::path(IMPACTLENS_SOURCE_DIR) / "data" / "taxonomy.json";
  REQUIRE(fs::exists(path));
  const CategoryTaxonomy from_file = CategoryTaxonomy::load(path.string());
  CHECK(from_file == CategoryTaxonomy::lapd_default());
}

TEST_CASE("parse_crime_file: small fixture with quoted commas") {
  TempFile file("impactlens_crime_fixture.csv",
                "DR_NO,DATE OCC,Crm Cd Desc\n"
                "1,01/05/2020 12:00:00 AM,ROBBERY\n"
                "2,2020-01-06T00:00:00,\"ASSAULT WITH DEADLY WEAPON, AGGRAVATED "
                "ASSAULT\"\n");
  const CrimeParseResult res = parse_crime_file(file.path.string());
  REQUIRE(res.records.size() == 2);
  CHECK(res.row_errors.empty());
  CHECK(res.records[0].occurrence_date == d(2020, 1, 5));
  CHECK(res.records[0].raw_category == "ROBBERY");
  CHECK(res.records[1].occurrence_date == d(2020, 1, 6));
  CHECK(res.records[1].raw_category ==
        "ASSAULT WITH DEADLY WEAPON, AGGRAVATED ASSAULT");
}

TEST_CASE("parse_crime_file routes malformed rows to the error summary") {
  TempFile file("impactlens_crime_bad.csv",
                "DATE OCC,Crm Cd Desc\n"
                "13/45/2020,ROBBERY\n"
                "01/07/2020,BURGLARY\n"
                ",THEFT\n");
  const CrimeParseResult res = parse_crime_file(file.path.string());
  CHECK(res.records.size() == 1);
  CHECK(res.records[0].raw_category == "BURGLARY");
  REQUIRE(res.row_errors.size() == 2);
  CHECK(res.row_errors[0].find("13/45/2020") != std::string::npos);
}

TEST_CASE("parse_crime_file names a missing column") {
  TempFile file("impactlens_crime_schema.csv", "SOMETHING,ELSE\n1,2\n");
  try {
    parse_crime_file(file.path.string());
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("DATE OCC") != std::string::npos);
  }
}

TEST_CASE("build_category_series: overall dominates the category split") {
  const CategoryTaxonomy tax = CategoryTaxonomy::lapd_default();
  std::vector<CrimeRecord> records = {
      {d(2020, 1, 1), "ROBBERY"},
      {d(2020, 1, 1), "VANDALISM - FELONY"},  // counted only in overall
      {d(2020, 1, 2), "BURGLARY"},
      {d(2020, 1, 2), "ROBBERY"},
  };
  const auto series = build_category_series(records, tax, d(2020, 1, 1), d(2020, 1, 3));
  CHECK(series.size() == 10);  // 9 categories + overall
  CHECK(series.at("overall").values == std::vector<double>{2, 2, 0});
  CHECK(series.at("robbery").values == std::vector<double>{1, 1, 0});
  CHECK(series.at("burglary").values == std::vector<double>{0, 1, 0});
  for (std::size_t t = 0; t < 3; ++t) {
    double category_sum = 0.0;
    for (const auto& slug : tax.category_slugs())
      category_sum += series.at(slug).values[t];
    CHECK(category_sum <= series.at("overall").values[t]);
  }
}

TEST_CASE("re-ingesting the same file is deterministic") {
  TempFile file("impactlens_crime_repeat.csv",
                "DATE OCC,Crm Cd Desc\n"
                "01/05/2020,ROBBERY\n"
                "01/05/2020,ROBBERY\n"
                "01/08/2020,BURGLARY\n");
  const CategoryTaxonomy tax = CategoryTaxonomy::lapd_default();
  const auto once = parse_crime_file(file.path.string());
  const auto twice = parse_crime_file(file.path.string());
  const auto a = build_category_series(once.records, tax, d(2020, 1, 1), d(2020, 1, 10));
  const auto b = build_category_series(twice.records, tax, d(2020, 1, 1), d(2020, 1, 10));
  for (const auto& [slug, series] : a) CHECK(series.values == b.at(slug).values);
}

TEST_CASE("load_temperature: plain fixture") {
  TempFile file("impactlens_temp1.csv",
                "STATION,DATE,TMAX,TMIN\n"
                "X,2020-01-01,68,50\n"
                "X,2020-01-02,70,51\n"
                "X,2020-01-03,72,52\n");
  const auto col = load_temperature(file.path.string(), d(2020, 1, 1), d(2020, 1, 3));
  CHECK(col == std::vector<double>{68, 70, 72});
}

TEST_CASE("load_temperature interpolates a one-day gap at the midpoint") {
  TempFile file("impactlens_temp2.csv",
                "DATE,TMAX\n"
                "2020-01-01,70\n"
                "2020-01-03,74\n");
  const auto col = load_temperature(file.path.string(), d(2020, 1, 1), d(2020, 1, 3));
  CHECK(col[1] == doctest::Approx(72.0));
}

TEST_CASE("load_temperature rejects long gaps and lists the dates") {
  TempFile file("impactlens_temp3.csv",
                "DATE,TMAX\n"
                "2020-01-01,70\n"
                "2020-01-05,74\n");
  try {
    load_temperature(file.path.string(), d(2020, 1, 1), d(2020, 1, 5));
    FAIL("expected GapError");
  } catch (const GapError& e) {
    const std::string what = e.what();
    CHECK(what.find("2020-01-02") != std::string::npos);
    CHECK(what.find("2020-01-04") != std::string::npos);
  }
}

TEST_CASE("load_temperature: alternative columns are available") {
  TempFile file("impactlens_temp4.csv",
                "DATE,TMAX,TMIN,TAVG\n"
                "2020-01-01,70,50,60\n");
  CHECK(load_temperature(file.path.string(), d(2020, 1, 1), d(2020, 1, 1),
                         "TAVG") == std::vector<double>{60});
  CHECK_THROWS_AS(load_temperature(file.path.string(), d(2020, 1, 1), d(2020, 1, 1),
                                   "NOPE"),
                  SchemaError);
}

TEST_CASE("holiday calendar: reference days") {
  const HolidayCalendar cal = HolidayCalendar::us_federal();
  CHECK(cal.contains(d(2020, 1, 1)));    // New Year's Day
  CHECK(!cal.contains(d(2020, 3, 4)));   // ordinary Wednesday
  CHECK(cal.contains(d(2020, 1, 20)));   // MLK 2020
  CHECK(cal.contains(d(2019, 11, 28)));  // Thanksgiving 2019
  CHECK(cal.contains(d(2018, 5, 28)));   // Memorial Day 2018

  const auto col = holiday_column(d(2020, 1, 1), d(2020, 1, 2), cal);
  CHECK(col == std::vector<double>{1, 0});
}

TEST_CASE("holiday column over the full reference range") {
  const auto col =
      holiday_column(d(2017, 1, 1), d(2020, 3, 28), HolidayCalendar::us_federal());
  CHECK(col.size() == 1183);
  double count = 0;
  for (const double v : col) count += v;
  // ten federal holidays per full year plus three in early 2020
  CHECK(count == doctest::Approx(33.0));
  const double mean = count / static_cast<double>(col.size());
  CHECK(mean > 0.015);
  CHECK(mean < 0.035);
}

TEST_CASE("holiday column refuses ranges outside coverage") {
  CHECK_THROWS_AS(
      holiday_column(d(2016, 12, 31), d(2017, 1, 2), HolidayCalendar::us_federal()),
      CoverageError);
  CHECK_THROWS_AS(
      holiday_column(d(2020, 12, 1), d(2021, 1, 2), HolidayCalendar::us_federal()),
      CoverageError);
}
