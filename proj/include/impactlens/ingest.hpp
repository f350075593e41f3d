#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "impactlens/dates.hpp"
#include "impactlens/timeseries.hpp"

namespace impactlens {

struct CrimeRecord {
  Date occurrence_date;
  std::string raw_category;
};

// Maps raw LAPD crime descriptions onto the nine analysis categories.
// Matching normalizes case and whitespace because the portal's spellings
// drift over time; the default mapping also ships as an editable data file.
class CategoryTaxonomy {
public:
  // The nine-category mapping used by the reference analysis.
  static CategoryTaxonomy lapd_default();

  // Loads a mapping from a JSON file: {"categories": {slug: {"display":
  // ..., "descriptions": [...]}}}.
  static CategoryTaxonomy load(const std::string& path);

  CategoryTaxonomy(std::vector<std::string> slugs,
                   std::map<std::string, std::string> display_names,
                   std::map<std::string, std::vector<std::string>> descriptions);

  // Category slug for a raw description, or nullopt when unmapped.
  std::optional<std::string> category_of(const std::string& raw_description) const;

  const std::vector<std::string>& category_slugs() const { return slugs_; }
  const std::string& display_name(const std::string& slug) const;

  bool operator==(const CategoryTaxonomy& other) const {
    return slugs_ == other.slugs_ && display_ == other.display_ &&
           lookup_ == other.lookup_;
  }

private:
  std::vector<std::string> slugs_;                 // stable category order
  std::map<std::string, std::string> display_;     // slug -> display name
  std::map<std::string, std::string> lookup_;      // normalized desc -> slug
};

std::optional<std::string> map_category(const CrimeRecord& record,
                                        const CategoryTaxonomy& taxonomy);

struct CrimeCsvOptions {
  std::string date_column = "DATE OCC";
  std::string category_column = "Crm Cd Desc";
};

struct CrimeParseResult {
  std::vector<CrimeRecord> records;
  // Rows that could not be parsed, with line numbers; never silently dropped.
  std::vector<std::string> row_errors;
};

// Parses an LAPD portal extract (comma-separated, quoted fields allowed).
// Accepts ISO dates and the portal's MM/DD/YYYY timestamps.
CrimeParseResult parse_crime_file(const std::string& path,
                                  const CrimeCsvOptions& options = {});

// Daily counts per category slug plus "overall" over [start, end].
// Records outside the range are ignored (the extract may be wider than the
// analysis range).
std::map<std::string, DailySeries> build_category_series(
    const std::vector<CrimeRecord>& records, const CategoryTaxonomy& taxonomy,
    Date start, Date end);

// Reads a NOAA daily-summaries export and returns one value per day of
// [start, end] for the requested column (default daily maximum).
// Gaps of at most two consecutive days are filled by linear interpolation;
// anything longer raises GapError listing the missing dates.
std::vector<double> load_temperature(const std::string& path, Date start, Date end,
                                     const std::string& column = "TMAX");

// Dated holiday list with an explicit coverage range.
class HolidayCalendar {
public:
  HolidayCalendar(std::vector<Date> holidays, Date coverage_start, Date coverage_end);

  // The ten US federal holidays per year, 2017 through 2020.
  static HolidayCalendar us_federal();

  bool contains(Date d) const;
  Date coverage_start() const { return coverage_start_; }
  Date coverage_end() const { return coverage_end_; }

private:
  std::vector<Date> holidays_;  // sorted
  Date coverage_start_;
  Date coverage_end_;
};

// Indicator column over [start, end]; CoverageError when the calendar does
// not span the range.
std::vector<double> holiday_column(Date start, Date end,
                                   const HolidayCalendar& calendar);

}  // namespace impactlens
