#pragma once

#include <array>
#include <chrono>
#include <string>
#include <vector>

namespace epi {

using Date = std::chrono::sys_days;

Date parse_date(const std::string& text);
std::string format_date(Date d);

// Daily series on a contiguous calendar. Optional series are empty when absent.
struct Dataset {
    std::vector<Date> dates;
    std::vector<double> deaths;
    std::vector<double> cases;
    std::vector<double> vaccinations;
    std::vector<std::array<double, 4>> cases_by_age;

    int size() const noexcept { return static_cast<int>(dates.size()); }
    bool has_cases() const noexcept { return !cases.empty(); }
    bool has_vaccinations() const noexcept { return !vaccinations.empty(); }
    bool has_cases_by_age() const noexcept { return !cases_by_age.empty(); }
    // Vaccinations, or zeros when the series is absent.
    std::vector<double> vaccination_series() const;
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

// Empty paths mean the series is absent; deaths are required.
struct DatasetPaths {
    std::string deaths;
    std::string cases;
    std::string cases_by_age;
    std::string vaccinations;
};

enum class GapPolicy { strict, zero_fill };
GapPolicy gap_policy_from_string(const std::string& s);

struct LoadReport {
    int edge_filled = 0;      // leading/trailing days added to align series
    int interior_filled = 0;  // missing interior days set to zero
    std::vector<std::string> warnings;
};

// Reads CSV files with a `date,value` or `date,g1,g2,g3,g4` header; lines starting
// with '#' are comments.
Dataset load_dataset(const DatasetPaths& paths, GapPolicy policy = GapPolicy::strict, LoadReport* report = nullptr);

// Writes one CSV per present series into `directory` and returns their paths.
DatasetPaths export_dataset(const Dataset& data, const std::string& directory, const std::string& command);

// Shortest decimal form that reads back to the same double; integers print without a point.
std::string format_number(double v);

}  // namespace epi
