#include "impactlens/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "impactlens/errors.hpp"

namespace impactlens {

namespace {

std::string normalize_description(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (const char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

// One CSV line with quoted fields; handles embedded commas and doubled quotes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

std::optional<Date> parse_flexible_date(const std::string& raw) {
  // ISO "YYYY-MM-DD", possibly followed by a time part.
  if (raw.size() >= 10 && raw[4] == '-' && raw[7] == '-') {
    try {
      return Date::parse(raw.substr(0, 10));
    } catch (const ValidationError&) {
      return std::nullopt;
    }
  }
  // Portal exports use "MM/DD/YYYY" with an optional timestamp.
  if (raw.size() >= 10 && raw[2] == '/' && raw[5] == '/') {
    try {
      const int m = std::stoi(raw.substr(0, 2));
      const int d = std::stoi(raw.substr(3, 2));
      const int y = std::stoi(raw.substr(6, 4));
      return Date::from_ymd(y, m, d);
    } catch (...) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name, const std::string& path) {
  const std::string wanted = normalize_description(name);
  for (std::size_t i = 0; i < header.size(); ++i)
    if (normalize_description(header[i]) == wanted) return i;
  throw SchemaError("file '" + path + "' is missing required column '" + name + "'");
}

}  // namespace

CategoryTaxonomy::CategoryTaxonomy(
    std::vector<std::string> slugs, std::map<std::string, std::string> display_names,
    std::map<std::string, std::vector<std::string>> descriptions)
    : slugs_(std::move(slugs)), display_(std::move(display_names)) {
  for (const auto& [slug, descs] : descriptions) {
    if (std::find(slugs_.begin(), slugs_.end(), slug) == slugs_.end())
      throw ValidationError("taxonomy category '" + slug + "' missing from slug list");
    for (const auto& desc : descs) {
      const std::string key = normalize_description(desc);
      const auto [it, inserted] = lookup_.emplace(key, slug);
      if (!inserted && it->second != slug)
        throw ValidationError("description '" + desc +
                              "' mapped to more than one category");
    }
  }
}

CategoryTaxonomy CategoryTaxonomy::lapd_default() {
  std::vector<std::string> slugs = {
      "assault_dw", "battery",     "burglary", "intimate_partner_assault",
      "robbery",    "shoplifting", "theft",    "stolen_vehicle",
      "homicide"};
  std::map<std::string, std::string> display = {
      {"assault_dw", "Assaults D.W."},
      {"battery", "Battery (Simple Assault)"},
      {"burglary", "Burglary"},
      {"intimate_partner_assault", "Intimate Partner Assault"},
      {"robbery", "Robbery"},
      {"shoplifting", "Shoplifting"},
      {"theft", "Theft"},
      {"stolen_vehicle", "Stolen Vehicles"},
      {"homicide", "Homicides"}};
  // Both historical spellings of the shoplifting labels are listed; the
  // portal has exported them with and without spaces around the hyphen.
  std::map<std::string, std::vector<std::string>> descriptions = {
      {"assault_dw", {"ASSAULT WITH DEADLY WEAPON, AGGRAVATED ASSAULT"}},
      {"battery", {"BATTERY - SIMPLE ASSAULT"}},
      {"burglary", {"BURGLARY"}},
      {"intimate_partner_assault",
       {"INTIMATE PARTNER - AGGRAVATED ASSAULT", "INTIMATE PARTNER - SIMPLE ASSAULT"}},
      {"robbery", {"ROBBERY"}},
      {"shoplifting",
       {"SHOPLIFTING-PETTY THEFT ($950 & UNDER)",
        "SHOPLIFTING - PETTY THEFT ($950 & UNDER)",
        "SHOPLIFTING-GRAND THEFT ($950.01 & OVER)",
        "SHOPLIFTING - GRAND THEFT ($950.01 & OVER)"}},
      {"theft",
       {"THEFT PLAIN - PETTY ($950 & UNDER)",
        "THEFT-GRAND ($950.01 & OVER)EXCPT,GUNS,FOWL,LIVESTK,PROD"}},
      {"stolen_vehicle", {"VEHICLE - STOLEN"}},
      {"homicide", {"CRIMINAL HOMICIDE"}}};
  return CategoryTaxonomy(std::move(slugs), std::move(display), std::move(descriptions));
}

CategoryTaxonomy CategoryTaxonomy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open taxonomy file '" + path + "'");
  nlohmann::ordered_json doc;  // keep the file's category order
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("taxonomy file '" + path + "': " + e.what());
  }
  if (!doc.contains("categories") || !doc["categories"].is_object())
    throw SchemaError("taxonomy file '" + path + "' has no 'categories' object");

  std::vector<std::string> slugs;
  std::map<std::string, std::string> display;
  std::map<std::string, std::vector<std::string>> descriptions;
  for (const auto& [slug, entry] : doc["categories"].items()) {
    slugs.push_back(slug);
    display[slug] = entry.value("display", slug);
    descriptions[slug] = entry.at("descriptions").get<std::vector<std::string>>();
  }
  return CategoryTaxonomy(std::move(slugs), std::move(display), std::move(descriptions));
}

std::optional<std::string> CategoryTaxonomy::category_of(
    const std::string& raw_description) const {
  const auto it = lookup_.find(normalize_description(raw_description));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

const std::string& CategoryTaxonomy::display_name(const std::string& slug) const {
  const auto it = display_.find(slug);
  if (it == display_.end())
    throw ValidationError("unknown category slug '" + slug + "'");
  return it->second;
}

std::optional<std::string> map_category(const CrimeRecord& record,
                                        const CategoryTaxonomy& taxonomy) {
  return taxonomy.category_of(record.raw_category);
}

CrimeParseResult parse_crime_file(const std::string& path,
                                  const CrimeCsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open crime file '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw SchemaError("file '" + path + "' is empty");
  const std::vector<std::string> header = split_csv_line(line);
  const std::size_t date_col = find_column(header, options.date_column, path);
  const std::size_t cat_col = find_column(header, options.category_column, path);

  CrimeParseResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() <= std::max(date_col, cat_col)) {
      result.row_errors.push_back("line " + std::to_string(line_no) +
                                  ": too few columns");
      continue;
    }
    const std::optional<Date> date = parse_flexible_date(fields[date_col]);
    if (!date) {
      result.row_errors.push_back("line " + std::to_string(line_no) +
                                  ": unparseable date '" + fields[date_col] + "'");
      continue;
    }
    std::string category = fields[cat_col];
    if (category.empty()) {
      result.row_errors.push_back("line " + std::to_string(line_no) +
                                  ": empty crime description");
      continue;
    }
    result.records.push_back({*date, std::move(category)});
  }
  return result;
}

std::map<std::string, DailySeries> build_category_series(
    const std::vector<CrimeRecord>& records, const CategoryTaxonomy& taxonomy,
    Date start, Date end) {
  if (start > end) throw ValidationError("series range start after end");
  const std::size_t n = static_cast<std::size_t>(end - start) + 1;

  std::map<std::string, std::vector<double>> counts;
  counts["overall"].assign(n, 0.0);
  for (const auto& slug : taxonomy.category_slugs()) counts[slug].assign(n, 0.0);

  for (const CrimeRecord& rec : records) {
    if (rec.occurrence_date < start || rec.occurrence_date > end) continue;
    const std::size_t idx = static_cast<std::size_t>(rec.occurrence_date - start);
    counts["overall"][idx] += 1.0;
    if (const auto slug = taxonomy.category_of(rec.raw_category))
      counts[*slug][idx] += 1.0;
  }

  std::map<std::string, DailySeries> out;
  for (auto& [slug, values] : counts) out.emplace(slug, DailySeries{start, std::move(values)});
  return out;
}

std::vector<double> load_temperature(const std::string& path, Date start, Date end,
                                     const std::string& column) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open temperature file '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError("file '" + path + "' is empty");
  const std::vector<std::string> header = split_csv_line(line);
  const std::size_t date_col = find_column(header, "DATE", path);
  const std::size_t value_col = find_column(header, column, path);

  const std::size_t n = static_cast<std::size_t>(end - start) + 1;
  std::vector<double> values(n, std::numeric_limits<double>::quiet_NaN());
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() <= std::max(date_col, value_col)) continue;
    const std::optional<Date> date = parse_flexible_date(fields[date_col]);
    if (!date || *date < start || *date > end) continue;
    if (fields[value_col].empty()) continue;  // treated as a gap
    try {
      values[static_cast<std::size_t>(*date - start)] = std::stod(fields[value_col]);
    } catch (...) {
      // unparseable measurement counts as a gap
    }
  }

  // Fill gaps of at most two days by linear interpolation.
  std::vector<std::string> unfixable;
  std::size_t i = 0;
  while (i < n) {
    if (!std::isnan(values[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && std::isnan(values[j])) ++j;
    const std::size_t gap = j - i;
    const bool interior = i > 0 && j < n;
    if (interior && gap <= 2) {
      const double left = values[i - 1];
      const double right = values[j];
      for (std::size_t g = 0; g < gap; ++g)
        values[i + g] = left + (right - left) * static_cast<double>(g + 1) /
                                   static_cast<double>(gap + 1);
    } else {
      for (std::size_t g = i; g < j; ++g)
        unfixable.push_back((start + static_cast<std::int64_t>(g)).to_string());
    }
    i = j;
  }
  if (!unfixable.empty()) {
    std::ostringstream msg;
    msg << "temperature file '" << path << "' has unfillable gaps on:";
    for (const auto& d : unfixable) msg << ' ' << d;
    throw GapError(msg.str());
  }
  return values;
}

HolidayCalendar::HolidayCalendar(std::vector<Date> holidays, Date coverage_start,
                                 Date coverage_end)
    : holidays_(std::move(holidays)),
      coverage_start_(coverage_start),
      coverage_end_(coverage_end) {
  std::sort(holidays_.begin(), holidays_.end());
}

HolidayCalendar HolidayCalendar::us_federal() {
  std::vector<Date> days;
  for (int year = 2017; year <= 2020; ++year) {
    days.push_back(Date::from_ymd(year, 1, 1));             // New Year's Day
    days.push_back(nth_weekday_of_month(year, 1, 1, 3));    // M.L. King Jr. Day
    days.push_back(nth_weekday_of_month(year, 2, 1, 3));    // Washington's Birthday
    days.push_back(last_weekday_of_month(year, 5, 1));      // Memorial Day
    days.push_back(Date::from_ymd(year, 7, 4));             // Independence Day
    days.push_back(nth_weekday_of_month(year, 9, 1, 1));    // Labor Day
    days.push_back(nth_weekday_of_month(year, 10, 1, 2));   // Columbus Day
    days.push_back(Date::from_ymd(year, 11, 11));           // Veterans Day
    days.push_back(nth_weekday_of_month(year, 11, 4, 4));   // Thanksgiving
    days.push_back(Date::from_ymd(year, 12, 25));           // Christmas Day
  }
  return HolidayCalendar(std::move(days), Date::from_ymd(2017, 1, 1),
                         Date::from_ymd(2020, 12, 31));
}

bool HolidayCalendar::contains(Date d) const {
  return std::binary_search(holidays_.begin(), holidays_.end(), d);
}

std::vector<double> holiday_column(Date start, Date end,
                                   const HolidayCalendar& calendar) {
  if (start < calendar.coverage_start() || end > calendar.coverage_end())
    throw CoverageError("holiday calendar covers " +
                        calendar.coverage_start().to_string() + ".." +
                        calendar.coverage_end().to_string() +
                        " but the range is " + start.to_string() + ".." +
                        end.to_string());
  const std::size_t n = static_cast<std::size_t>(end - start) + 1;
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (calendar.contains(start + static_cast<std::int64_t>(i))) out[i] = 1.0;
  return out;
}

}  // namespace impactlens
