#include "gvm/ingest.hpp"

#include "gvm/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

namespace gvm {

namespace {

std::string trim(std::string s)
{
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (const char c : line) {
        if (c == '"') {
            quoted = !quoted;
            cur += c;
        } else if (c == ',' && !quoted) {
            fields.push_back(trim(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

std::optional<int> to_int(std::string_view s)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

std::optional<double> to_double(const std::string& s)
{
    if (s.empty())
        return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name)
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw ParseError("column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - header.begin());
}

} // namespace

DateFormat date_format_from_string(const std::string& name)
{
    if (name == "iso")
        return DateFormat::Iso;
    if (name == "mdy" || name == "us")
        return DateFormat::Mdy;
    if (name == "dmy" || name == "eu")
        return DateFormat::Dmy;
    throw InvalidParameter("unknown date format '" + name + "' (expected iso|mdy|dmy)");
}

std::chrono::year_month_day parse_date(const std::string& text, DateFormat format)
{
    std::vector<std::string_view> parts;
    std::string_view rest(text);
    const char sep = format == DateFormat::Iso ? '-' : (text.find('.') != std::string::npos ? '.' : '/');
    for (;;) {
        const auto pos = rest.find(sep);
        parts.push_back(rest.substr(0, pos));
        if (pos == std::string_view::npos)
            break;
        rest.remove_prefix(pos + 1);
    }
    if (parts.size() != 3)
        throw ParseError("bad date '" + text + "'");

    std::optional<int> y;
    std::optional<int> m;
    std::optional<int> d;
    switch (format) {
    case DateFormat::Iso:
        y = to_int(parts[0]), m = to_int(parts[1]), d = to_int(parts[2]);
        break;
    case DateFormat::Mdy:
        m = to_int(parts[0]), d = to_int(parts[1]), y = to_int(parts[2]);
        break;
    case DateFormat::Dmy:
        d = to_int(parts[0]), m = to_int(parts[1]), y = to_int(parts[2]);
        break;
    }
    if (!y || !m || !d)
        throw ParseError("bad date '" + text + "'");
    const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                          std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok())
        throw ParseError("invalid calendar date '" + text + "'");
    return ymd;
}

PriceSeries parse_prices(const std::filesystem::path& path, const ColumnSpec& spec)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open price file " + path.string());
    return parse_prices(in, spec, path.stem().string());
}

PriceSeries parse_prices(std::istream& in, const ColumnSpec& spec, std::string symbol)
{
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("price file is empty");
    const auto header = split_csv(line);
    const auto date_col = column_index(header, spec.date_column);
    const auto close_col = column_index(header, spec.close_column);

    std::vector<std::pair<std::chrono::year_month_day, double>> rows;
    std::size_t gaps = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        const auto fields = split_csv(line);
        if (fields.size() <= std::max(date_col, close_col)) {
            ++gaps;
            continue;
        }
        const auto close = to_double(fields[close_col]);
        if (!close || !(*close > 0.0)) {
            ++gaps;
            continue;
        }
        try {
            rows.emplace_back(parse_date(fields[date_col], spec.date_format), *close);
        } catch (const ParseError&) {
            ++gaps;
        }
    }
    if (rows.empty())
        throw ParseError("no valid price rows");

    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    PriceSeries p;
    p.symbol = std::move(symbol);
    p.gaps = gaps;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first == rows[i - 1].first) {
            std::ostringstream os;
            os << "duplicate date " << static_cast<int>(rows[i].first.year()) << '-'
               << static_cast<unsigned>(rows[i].first.month()) << '-' << static_cast<unsigned>(rows[i].first.day());
            throw ParseError(os.str());
        }
        p.dates.push_back(rows[i].first);
        p.closes.push_back(rows[i].second);
    }
    return p;
}

ReturnSeries price_log_returns(const PriceSeries& p)
{
    if (p.size() < 2)
        throw TooShortSeries("price_log_returns: need at least two closes");
    ReturnSeries r;
    r.source = SeriesSource::MarketData;
    r.values.resize(static_cast<Eigen::Index>(p.size() - 1));
    for (std::size_t t = 1; t < p.size(); ++t)
        r.values[static_cast<Eigen::Index>(t - 1)] = std::log(p.closes[t]) - std::log(p.closes[t - 1]);
    return r;
}

} // namespace gvm
