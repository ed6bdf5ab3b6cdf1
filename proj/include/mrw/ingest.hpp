#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mrw/series.hpp"

namespace mrw {

struct IngestConfig {
    std::string path;                  // "-" reads standard input
    std::string date_column = "date";  // header name, or a 0-based index
    std::string value_column = "value";
    std::string date_format = "%Y-%m";  // tokens %Y %m %d, other characters literal
    std::string series_name;           // defaults to the value column name
};

struct IngestReport {
    std::size_t records = 0;
    std::size_t skipped_missing = 0;  // rows whose value is empty, "." or NA
    std::size_t gap_months = 0;       // months absent between first and last
    MonthIndex first = 0;
    MonthIndex last = 0;
};

[[nodiscard]] MonthIndex make_month(int year, int month);
[[nodiscard]] std::string format_month(MonthIndex m);
// Parses `text` with a date pattern; throws Parse on mismatch.
[[nodiscard]] MonthIndex parse_month(const std::string& text, const std::string& format);

[[nodiscard]] SeriesRecord read_csv(std::istream& in, const IngestConfig& cfg,
                                    IngestReport* report = nullptr);
[[nodiscard]] SeriesRecord ingest_csv(const IngestConfig& cfg, IngestReport* report = nullptr);

// Restricts both series to their common months. Throws EmptyIntersection.
[[nodiscard]] std::pair<SeriesRecord, SeriesRecord> align(const SeriesRecord& a,
                                                          const SeriesRecord& b);

// "%.17g" rendering used by every CSV writer.
[[nodiscard]] std::string format_real(double v);

// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

// Renders a series in the ingest schema (header "date,value").
[[nodiscard]] std::string series_to_csv(const SeriesRecord& series);

}  // namespace mrw
