#include "etv/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace etv::csv {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

double parse_double(std::string_view field, std::string_view context) {
  double value = 0.0;
  const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc() || result.ptr != field.data() + field.size()) {
    throw Error(ErrorKind::ShapeError, std::string(context) + ": cannot parse '" + std::string(field) + "' as a number");
  }
  return value;
}

long long parse_int(std::string_view field, std::string_view context) {
  long long value = 0;
  const auto result = std::from_chars(field.data(), field.data() + field.size(), value);
  if (result.ec != std::errc() || result.ptr != field.data() + field.size()) {
    throw Error(ErrorKind::ShapeError,
                std::string(context) + ": cannot parse '" + std::string(field) + "' as an integer");
  }
  return value;
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

void expect_columns(const Table& table, std::size_t count, const fs::path& path) {
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != count) {
      throw Error(ErrorKind::ShapeError, path.string() + " row " + std::to_string(r + 2) + " has " +
                                             std::to_string(table.rows[r].size()) + " fields, expected " +
                                             std::to_string(count));
    }
  }
}

void expect_header_prefix(const Table& table, const std::vector<std::string>& names, const fs::path& path) {
  if (table.header.size() < names.size()) {
    throw Error(ErrorKind::ShapeError, path.string() + ": header too short");
  }
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (table.header[c] != names[c]) {
      throw Error(ErrorKind::ShapeError,
                  path.string() + ": column " + std::to_string(c) + " should be '" + names[c] + "'");
    }
  }
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t count) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < count; ++c) names.push_back(prefix + std::to_string(c));
  return names;
}

int to_int(const std::string& field, const std::string& context) {
  return static_cast<int>(parse_int(field, context));
}

}  // namespace

Table read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  Table table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      table.header = split(line);
      first = false;
    } else {
      table.rows.push_back(split(line));
    }
  }
  if (first) throw Error(ErrorKind::IoError, path.string() + " is empty");
  return table;
}

void write_table(const fs::path& path, const Table& table) {
  std::ostringstream out;
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c > 0) out << ',';
      out << fields[c];
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  file << out.str();
  if (!file) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

Instance read_instance(const fs::path& dir) {
  Instance instance;
  const fs::path users_path = dir / "users.csv";
  const fs::path funds_path = dir / "funds.csv";

  const Table users = read_table(users_path);
  expect_header_prefix(users, {"id", "tolerance"}, users_path);
  instance.user_feature_dim = users.header.size() - 2;
  expect_columns(users, users.header.size(), users_path);
  for (const auto& row : users.rows) {
    UserRecord user;
    user.id = to_int(row[0], users_path.string());
    user.risk_tolerance = to_int(row[1], users_path.string());
    for (std::size_t c = 2; c < row.size(); ++c) user.features.push_back(parse_double(row[c], users_path.string()));
    instance.users.push_back(std::move(user));
  }

  const Table funds = read_table(funds_path);
  expect_header_prefix(funds, {"id", "risk_level", "demand"}, funds_path);
  instance.fund_feature_dim = funds.header.size() - 3;
  expect_columns(funds, funds.header.size(), funds_path);
  for (const auto& row : funds.rows) {
    FundType fund;
    fund.id = to_int(row[0], funds_path.string());
    fund.risk_level = to_int(row[1], funds_path.string());
    fund.demand = to_int(row[2], funds_path.string());
    for (std::size_t c = 3; c < row.size(); ++c) fund.features.push_back(parse_double(row[c], funds_path.string()));
    instance.funds.push_back(std::move(fund));
  }
  return instance;
}

void write_instance(const fs::path& dir, const Instance& instance) {
  Table users;
  users.header = {"id", "tolerance"};
  for (auto& name : numbered("f", instance.user_feature_dim)) users.header.push_back(name);
  for (const auto& user : instance.users) {
    std::vector<std::string> row{std::to_string(user.id), std::to_string(user.risk_tolerance)};
    for (double f : user.features) row.push_back(format_double(f));
    users.rows.push_back(std::move(row));
  }
  write_table(dir / "users.csv", users);

  Table funds;
  funds.header = {"id", "risk_level", "demand"};
  for (auto& name : numbered("g", instance.fund_feature_dim)) funds.header.push_back(name);
  for (const auto& fund : instance.funds) {
    std::vector<std::string> row{std::to_string(fund.id), std::to_string(fund.risk_level),
                                 std::to_string(fund.demand)};
    for (double g : fund.features) row.push_back(format_double(g));
    funds.rows.push_back(std::move(row));
  }
  write_table(dir / "funds.csv", funds);
}

std::vector<Observation> read_observations(const fs::path& path) {
  const Table table = read_table(path);
  expect_header_prefix(table, {"user_id", "fund_id", "converted", "amount"}, path);
  expect_columns(table, 4, path);
  std::vector<Observation> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Observation obs;
    obs.user_id = to_int(row[0], path.string());
    obs.fund_id = to_int(row[1], path.string());
    const long long converted = parse_int(row[2], path.string());
    if (converted != 0 && converted != 1) throw Error(ErrorKind::ShapeError, path.string() + ": converted must be 0/1");
    obs.converted = converted == 1;
    obs.amount = parse_double(row[3], path.string());
    check_observation(obs);
    out.push_back(obs);
  }
  return out;
}

void write_observations(const fs::path& path, const std::vector<Observation>& observations) {
  Table table;
  table.header = {"user_id", "fund_id", "converted", "amount"};
  table.rows.reserve(observations.size());
  for (const auto& obs : observations) {
    table.rows.push_back({std::to_string(obs.user_id), std::to_string(obs.fund_id), obs.converted ? "1" : "0",
                          format_double(obs.amount)});
  }
  write_table(path, table);
}

EtvMatrix read_etv(const fs::path& path) {
  const Table table = read_table(path);
  const std::size_t k = table.header.size();
  for (std::size_t c = 0; c < k; ++c) {
    if (table.header[c] != std::to_string(c)) {
      throw Error(ErrorKind::ShapeError, path.string() + ": header must list fund ids 0.." + std::to_string(k - 1));
    }
  }
  expect_columns(table, k, path);
  std::vector<double> values;
  values.reserve(table.rows.size() * k);
  for (const auto& row : table.rows) {
    for (const auto& field : row) values.push_back(parse_double(field, path.string()));
  }
  return EtvMatrix(table.rows.size(), k, std::move(values));
}

void write_etv(const fs::path& path, const EtvMatrix& etv) {
  Table table;
  for (std::size_t j = 0; j < etv.cols(); ++j) table.header.push_back(std::to_string(j));
  table.rows.reserve(etv.rows());
  for (std::size_t i = 0; i < etv.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(etv.cols());
    for (double v : etv.row(i)) row.push_back(format_double(v));
    table.rows.push_back(std::move(row));
  }
  write_table(path, table);
}

AllocationPlan read_plan(const fs::path& path) {
  const Table table = read_table(path);
  expect_header_prefix(table, {"user_id", "fund_id"}, path);
  expect_columns(table, 2, path);
  const std::size_t n = table.rows.size();
  AllocationPlan plan;
  plan.assignment.assign(n, -1);
  for (const auto& row : table.rows) {
    const long long user = parse_int(row[0], path.string());
    if (user < 0 || static_cast<std::size_t>(user) >= n || plan.assignment[user] != -1) {
      throw Error(ErrorKind::ShapeError, path.string() + ": user ids must cover 0..N-1 exactly once");
    }
    plan.assignment[user] = to_int(row[1], path.string());
  }
  return plan;
}

void write_plan(const fs::path& path, const AllocationPlan& plan) {
  Table table;
  table.header = {"user_id", "fund_id"};
  table.rows.reserve(plan.assignment.size());
  for (std::size_t i = 0; i < plan.assignment.size(); ++i) {
    table.rows.push_back({std::to_string(i), std::to_string(plan.assignment[i])});
  }
  write_table(path, table);
}

}  // namespace etv::csv
