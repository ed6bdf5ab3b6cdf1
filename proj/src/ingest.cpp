#include "mrw/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mrw/errors.hpp"

namespace mrw {

MonthIndex make_month(int year, int month) {
    return static_cast<MonthIndex>(year) * 12 + (month - 1);
}

std::string format_month(MonthIndex m) {
    const MonthIndex year = m >= 0 ? m / 12 : -((-m + 11) / 12);
    const int month = static_cast<int>(m - year * 12) + 1;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02d", static_cast<long long>(year), month);
    return buf;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Splits one CSV record; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

bool parse_int(std::string_view s, int& out) {
    const auto* b = s.data();
    const auto* e = s.data() + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e;
}

std::size_t resolve_column(const std::vector<std::string>& header, const std::string& spec,
                           const char* role) {
    const auto it = std::find(header.begin(), header.end(), spec);
    if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    int idx = 0;
    if (!spec.empty() && parse_int(spec, idx) && idx >= 0 &&
        static_cast<std::size_t>(idx) < header.size()) {
        return static_cast<std::size_t>(idx);
    }
    throw Error(ErrorKind::Parse, std::string(role) + " column '" + spec + "' not found in header");
}

bool is_missing(const std::string& v) {
    return v.empty() || v == "." || v == "NA" || v == "NaN" || v == "nan";
}

}  // namespace

MonthIndex parse_month(const std::string& text, const std::string& format) {
    const std::string s = trim(text);
    std::size_t pos = 0;
    int year = 0;
    int month = 0;
    bool have_year = false;
    bool have_month = false;
    auto fail = [&] {
        throw Error(ErrorKind::Parse, "date '" + s + "' does not match format '" + format + "'");
    };
    auto digits = [&](std::size_t min_len, std::size_t max_len) {
        const std::size_t b = pos;
        if (pos < s.size() && s[pos] == '-' && max_len > 2) ++pos;  // negative years
        while (pos < s.size() && pos - b < max_len && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        int v = 0;
        if (pos - b < min_len || !parse_int(std::string_view(s).substr(b, pos - b), v)) fail();
        return v;
    };
    for (std::size_t f = 0; f < format.size(); ++f) {
        if (format[f] == '%' && f + 1 < format.size()) {
            const char tok = format[++f];
            if (tok == 'Y') {
                year = digits(4, 9);
                have_year = true;
            } else if (tok == 'm') {
                month = digits(1, 2);
                have_month = true;
            } else if (tok == 'd') {
                const int day = digits(1, 2);
                if (day < 1 || day > 31) fail();
            } else {
                throw Error(ErrorKind::Parse, "unsupported date token %" + std::string(1, tok));
            }
        } else {
            if (pos >= s.size() || s[pos] != format[f]) fail();
            ++pos;
        }
    }
    if (pos != s.size() || !have_year || !have_month || month < 1 || month > 12) fail();
    return make_month(year, month);
}

SeriesRecord read_csv(std::istream& in, const IngestConfig& cfg, IngestReport* report) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (!trim(line).empty()) {
            header = split_record(line);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorKind::EmptyFile, "input '" + cfg.path + "' is empty");
    const std::size_t dcol = resolve_column(header, cfg.date_column, "date");
    const std::size_t vcol = resolve_column(header, cfg.value_column, "value");
    if (dcol == vcol) throw Error(ErrorKind::Parse, "date and value columns must differ");

    std::vector<std::pair<MonthIndex, double>> rows;
    IngestReport rep;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_record(line);
        if (fields.size() <= std::max(dcol, vcol)) {
            throw Error(ErrorKind::Parse, "row " + std::to_string(row) + ": expected at least " +
                                              std::to_string(std::max(dcol, vcol) + 1) + " columns");
        }
        MonthIndex m = 0;
        try {
            m = parse_month(fields[dcol], cfg.date_format);
        } catch (const Error& e) {
            throw Error(ErrorKind::Parse, "row " + std::to_string(row) + ", column " +
                                              std::to_string(dcol) + ": " + e.what());
        }
        const std::string& v = fields[vcol];
        if (is_missing(v)) {
            ++rep.skipped_missing;
            continue;
        }
        double value = 0.0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
        if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(value)) {
            throw Error(ErrorKind::Parse, "row " + std::to_string(row) + ", column " +
                                              std::to_string(vcol) + ": cannot parse value '" + v + "'");
        }
        rows.emplace_back(m, value);
    }
    if (rows.empty()) throw Error(ErrorKind::EmptyFile, "input '" + cfg.path + "' has no data rows");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first) {
            throw Error(ErrorKind::DuplicateMonth, "duplicate month " + format_month(rows[i].first));
        }
    }
    std::vector<MonthIndex> ts;
    std::vector<double> vs;
    ts.reserve(rows.size());
    vs.reserve(rows.size());
    for (const auto& [m, v] : rows) {
        ts.push_back(m);
        vs.push_back(v);
    }
    rep.records = rows.size();
    rep.first = ts.front();
    rep.last = ts.back();
    rep.gap_months = static_cast<std::size_t>(rep.last - rep.first + 1) - rows.size();
    if (report != nullptr) *report = rep;
    if (rows.size() < 2) {
        throw Error(ErrorKind::InvalidSeries, "input '" + cfg.path + "' has fewer than 2 observations");
    }
    const std::string name = cfg.series_name.empty() ? header[vcol] : cfg.series_name;
    return SeriesRecord(name, std::move(ts), std::move(vs), 1);
}

SeriesRecord ingest_csv(const IngestConfig& cfg, IngestReport* report) {
    if (cfg.path == "-") return read_csv(std::cin, cfg, report);
    std::ifstream f(cfg.path);
    if (!f) throw Error(ErrorKind::Io, "cannot open '" + cfg.path + "'");
    return read_csv(f, cfg, report);
}

std::pair<SeriesRecord, SeriesRecord> align(const SeriesRecord& a, const SeriesRecord& b) {
    std::vector<MonthIndex> ts;
    std::vector<double> va;
    std::vector<double> vb;
    std::size_t i = 0;
    std::size_t j = 0;
    const auto& ta = a.timestamps();
    const auto& tb = b.timestamps();
    while (i < ta.size() && j < tb.size()) {
        if (ta[i] < tb[j]) {
            ++i;
        } else if (tb[j] < ta[i]) {
            ++j;
        } else {
            ts.push_back(ta[i]);
            va.push_back(a.values()[i]);
            vb.push_back(b.values()[j]);
            ++i;
            ++j;
        }
    }
    if (ts.empty()) {
        throw Error(ErrorKind::EmptyIntersection, "series '" + a.name() + "' and '" + b.name() +
                                                      "' share no months");
    }
    if (ts.size() < 2) {
        throw Error(ErrorKind::EmptyIntersection, "series share a single month only");
    }
    return {SeriesRecord(a.name(), ts, std::move(va), a.cadence()),
            SeriesRecord(b.name(), ts, std::move(vb), b.cadence())};
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = fs::path(path + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
        f << content;
        f.flush();
        if (!f) throw Error(ErrorKind::Io, "write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot rename onto '" + path + "': " + ec.message());
}

std::string series_to_csv(const SeriesRecord& series) {
    std::string out = "date,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += format_month(series.timestamps()[i]);
        out += ',';
        out += format_real(series.values()[i]);
        out += '\n';
    }
    return out;
}

}  // namespace mrw
