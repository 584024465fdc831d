#pragma once

#include "gvm/measures.hpp"

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gvm {

enum class DateFormat {
    Iso, ///< YYYY-MM-DD
    Mdy, ///< M/D/YYYY (US)
    Dmy, ///< D/M/YYYY or D.M.YYYY
};

DateFormat date_format_from_string(const std::string& name);

struct ColumnSpec {
    std::string date_column = "Date";
    std::string close_column = "Close";
    DateFormat date_format = DateFormat::Iso;
};

struct PriceSeries {
    std::string symbol;
    std::vector<std::chrono::year_month_day> dates; ///< strictly increasing
    std::vector<double> closes;                     ///< strictly positive
    std::size_t gaps = 0;                           ///< malformed rows skipped

    std::size_t size() const { return closes.size(); }
};

/// Parses a CSV with a header row. Rows with unparseable dates or prices, or
/// nonpositive closes, are skipped and counted in `gaps`. Output is sorted by
/// date. Throws ParseError for a missing file or column, no valid rows, or a
/// repeated date.
PriceSeries parse_prices(const std::filesystem::path& path, const ColumnSpec& spec = {});
PriceSeries parse_prices(std::istream& in, const ColumnSpec& spec = {}, std::string symbol = {});

std::chrono::year_month_day parse_date(const std::string& text, DateFormat format);

/// r(t) = log close(t) - log close(t-1) over consecutive rows.
ReturnSeries price_log_returns(const PriceSeries& p);

} // namespace gvm
