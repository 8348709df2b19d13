#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "etv/types.hpp"

namespace etv::csv {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

double parse_double(std::string_view field, std::string_view context);
long long parse_int(std::string_view field, std::string_view context);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Plain comma-separated numeric tables: no quoting, LF line endings
// (a trailing CR is tolerated), first line is the header.
Table read_table(const std::filesystem::path& path);
void write_table(const std::filesystem::path& path, const Table& table);

// users.csv + funds.csv inside `dir`.
Instance read_instance(const std::filesystem::path& dir);
void write_instance(const std::filesystem::path& dir, const Instance& instance);

std::vector<Observation> read_observations(const std::filesystem::path& path);
void write_observations(const std::filesystem::path& path, const std::vector<Observation>& observations);

// Header row holds the fund ids; one row of K values per user.
EtvMatrix read_etv(const std::filesystem::path& path);
void write_etv(const std::filesystem::path& path, const EtvMatrix& etv);

// Two columns: user_id,fund_id. Rows may come in any order but must cover
// every user exactly once.
AllocationPlan read_plan(const std::filesystem::path& path);
void write_plan(const std::filesystem::path& path, const AllocationPlan& plan);

}  // namespace etv::csv
