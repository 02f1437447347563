#include "epi/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "epi/errors.hpp"

namespace epi {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

struct Series {
    std::string path;
    std::map<Date, std::vector<double>> rows;
};

Series read_series(const std::string& path, std::size_t width, bool integer_counts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    Series s{path, {}};
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    auto fail = [&](const std::string& what) {
        throw DataError(path + ":" + std::to_string(lineno) + ": " + what + ": '" + line + "'");
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto fields = split(t);
        if (!header_seen) {
            header_seen = true;
            if (fields.empty() || fields.front() != "date") fail("header must start with 'date'");
            if (fields.size() != width + 1) fail("expected " + std::to_string(width + 1) + " columns");
            continue;
        }
        if (fields.size() != width + 1) fail("expected " + std::to_string(width + 1) + " columns");
        Date d;
        try {
            d = parse_date(fields[0]);
        } catch (const DataError&) {
            fail("malformed date");
        }
        std::vector<double> values;
        for (std::size_t k = 1; k <= width; ++k) {
            double v = 0.0;
            const auto& f = fields[k];
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v))
                fail("malformed number");
            if (v < 0.0) throw ValidationError(path + ":" + std::to_string(lineno) + ": negative count on " +
                                               fields[0] + ": '" + line + "'");
            if (integer_counts && v != std::floor(v)) fail("count is not an integer");
            values.push_back(v);
        }
        if (!s.rows.emplace(d, std::move(values)).second) fail("duplicate date " + fields[0]);
    }
    if (!header_seen) throw DataError(path + ": missing header");
    if (s.rows.empty()) throw DataError(path + ": no data rows");
    return s;
}

// Aligns a series to [first, last], zero-filling absent edges and, under zero-fill,
// interior gaps.
std::vector<std::vector<double>> align(const Series& s, Date first, Date last, std::size_t width, GapPolicy policy,
                                       LoadReport& report) {
    const Date own_first = s.rows.begin()->first;
    const Date own_last = s.rows.rbegin()->first;
    std::vector<std::vector<double>> out;
    for (Date d = first; d <= last; d += std::chrono::days{1}) {
        const auto it = s.rows.find(d);
        if (it != s.rows.end()) {
            out.push_back(it->second);
            continue;
        }
        if (d < own_first || d > own_last) {
            ++report.edge_filled;
        } else if (policy == GapPolicy::strict) {
            throw DataError(s.path + ": missing interior date " + format_date(d));
        } else {
            ++report.interior_filled;
            report.warnings.push_back(s.path + ": zero-filled missing date " + format_date(d));
        }
        out.emplace_back(width, 0.0);
    }
    return out;
}

void write_header(std::ofstream& out, const std::string& series, const std::string& units, const std::string& command) {
    out << "# series: " << series << "\n# units: " << units << "\n# command: " << command << "\n";
}

}  // namespace

Date parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (text.size() != 10 || std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 || text[4] != '-' ||
        text[7] != '-')
        throw DataError("not an ISO-8601 date: '" + text + "'");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw DataError("invalid calendar date: '" + text + "'");
    return Date{ymd};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_number(double v) {
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<double> Dataset::vaccination_series() const {
    return has_vaccinations() ? vaccinations : std::vector<double>(dates.size(), 0.0);
}

void Dataset::validate() const {
    const std::size_t n = dates.size();
    if (n == 0) throw ValidationError("dataset is empty");
    if (deaths.size() != n) throw ValidationError("deaths do not cover the calendar");
    if (has_cases() && cases.size() != n) throw ValidationError("cases do not cover the calendar");
    if (has_vaccinations() && vaccinations.size() != n) throw ValidationError("vaccinations do not cover the calendar");
    if (has_cases_by_age() && cases_by_age.size() != n)
        throw ValidationError("cases by age do not cover the calendar");
    for (std::size_t i = 1; i < n; ++i)
        if (dates[i] - dates[i - 1] != std::chrono::days{1})
            throw ValidationError("calendar is not contiguous at " + format_date(dates[i]));
    auto count_ok = [](double v) { return std::isfinite(v) && v >= 0.0 && v == std::floor(v); };
    for (std::size_t i = 0; i < n; ++i) {
        const std::string day = format_date(dates[i]);
        if (!count_ok(deaths[i])) throw ValidationError("invalid death count on " + day);
        if (has_cases() && !count_ok(cases[i])) throw ValidationError("invalid case count on " + day);
        if (has_vaccinations() && !(std::isfinite(vaccinations[i]) && vaccinations[i] >= 0.0))
            throw ValidationError("invalid vaccination count on " + day);
        if (has_cases_by_age())
            for (double c : cases_by_age[i])
                if (!count_ok(c)) throw ValidationError("invalid age-group case count on " + day);
    }
}

GapPolicy gap_policy_from_string(const std::string& s) {
    if (s == "strict") return GapPolicy::strict;
    if (s == "zero-fill" || s == "zero_fill") return GapPolicy::zero_fill;
    throw ParameterError("unknown gap policy '" + s + "'");
}

Dataset load_dataset(const DatasetPaths& paths, GapPolicy policy, LoadReport* report) {
    if (paths.deaths.empty()) throw DataError("a deaths file is required");
    LoadReport local;
    LoadReport& rep = report ? *report : local;

    struct Entry {
        const std::string* path;
        std::size_t width;
        bool integer;
    };
    const Entry entries[] = {{&paths.deaths, 1, true},
                             {&paths.cases, 1, true},
                             {&paths.vaccinations, 1, false},
                             {&paths.cases_by_age, 4, true}};
    std::vector<std::optional<Series>> series;
    Date first = Date::max(), last = Date::min();
    for (const auto& e : entries) {
        if (e.path->empty()) {
            series.emplace_back();
            continue;
        }
        series.emplace_back(read_series(*e.path, e.width, e.integer));
        first = std::min(first, series.back()->rows.begin()->first);
        last = std::max(last, series.back()->rows.rbegin()->first);
    }

    Dataset data;
    for (Date d = first; d <= last; d += std::chrono::days{1}) data.dates.push_back(d);
    auto scalar = [&](std::size_t i, std::vector<double>& target) {
        if (!series[i]) return;
        for (auto& row : align(*series[i], first, last, 1, policy, rep)) target.push_back(row[0]);
    };
    scalar(0, data.deaths);
    scalar(1, data.cases);
    scalar(2, data.vaccinations);
    if (series[3])
        for (auto& row : align(*series[3], first, last, 4, policy, rep))
            data.cases_by_age.push_back({row[0], row[1], row[2], row[3]});
    if (rep.interior_filled > 0)
        rep.warnings.push_back("zero-filled " + std::to_string(rep.interior_filled) + " interior days in total");
    data.validate();
    return data;
}

DatasetPaths export_dataset(const Dataset& data, const std::string& directory, const std::string& command) {
    data.validate();
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    DatasetPaths paths;
    auto write_scalar = [&](const std::vector<double>& values, const std::string& name, const std::string& units) {
        const std::string path = (fs::path(directory) / (name + ".csv")).string();
        std::ofstream out(path);
        if (!out) throw DataError("cannot write " + path);
        write_header(out, name, units, command);
        out << "date," << name << "\n";
        for (std::size_t i = 0; i < values.size(); ++i)
            out << format_date(data.dates[i]) << "," << format_number(values[i]) << "\n";
        return path;
    };
    paths.deaths = write_scalar(data.deaths, "deaths", "persons per day");
    if (data.has_cases()) paths.cases = write_scalar(data.cases, "cases", "recorded cases per day");
    if (data.has_vaccinations())
        paths.vaccinations = write_scalar(data.vaccinations, "vaccinations", "first doses per day");
    if (data.has_cases_by_age()) {
        paths.cases_by_age = (fs::path(directory) / "cases_by_age.csv").string();
        std::ofstream out(paths.cases_by_age);
        if (!out) throw DataError("cannot write " + paths.cases_by_age);
        write_header(out, "cases_by_age", "recorded cases per day in each of four age groups", command);
        out << "date,group1,group2,group3,group4\n";
        for (std::size_t i = 0; i < data.cases_by_age.size(); ++i) {
            out << format_date(data.dates[i]);
            for (double c : data.cases_by_age[i]) out << "," << format_number(c);
            out << "\n";
        }
    }
    return paths;
}

}  // namespace epi
