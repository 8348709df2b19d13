#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "etv/cli/commands.hpp"

namespace testing {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliRun etvalloc(std::vector<std::string> args) {
  args.insert(args.begin(), "etvalloc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = etv::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// gen-data, train per loss, predict, allocate per strategy and evaluate
// --append, mirroring the in-process experiment runner. Returns the first
// nonzero exit code, or 0; the report lands in dir/report.csv.
inline int run_pipeline(const std::filesystem::path& dir, const std::string& seed,
                        const std::vector<std::string>& extra_gen = {}) {
  const std::string train = (dir / "train").string();
  const std::string test = (dir / "test").string();
  const std::string report = (dir / "report.csv").string();
  std::filesystem::remove(report);
  for (const auto& [role, path] : {std::pair{"train", train}, std::pair{"test", test}}) {
    std::vector<std::string> args{"gen-data", "--instance", path, "--role", role, "--seed", seed};
    args.insert(args.end(), extra_gen.begin(), extra_gen.end());
    if (int c = etvalloc(args).code) return c;
  }
  for (const std::string loss : {"esj", "ziln", "ce_mse"}) {
    const std::string model = (dir / (loss + ".json")).string();
    const std::string etv = (dir / (loss + "_etv.csv")).string();
    if (int c = etvalloc({"train", "--instance", train, "--model", model, "--loss", loss, "--seed", seed}).code) return c;
    if (int c = etvalloc({"predict", "--model", model, "--instance", test, "--etv", etv}).code) return c;
    for (const std::string strategy : {"ha", "exact", "manual", "greedy"}) {
      const std::string plan = (dir / (loss + "_" + strategy + ".csv")).string();
      std::vector<std::string> alloc{"allocate", "--instance", test, "--etv", etv, "--plan", plan, "--strategy", strategy};
      if (strategy == "manual") {
        alloc.push_back("--priority");
        alloc.push_back("auto");
      }
      if (int c = etvalloc(alloc).code) return c;
      if (int c = etvalloc({"evaluate", "--instance", test, "--etv", etv, "--plan", plan, "--report", report,
                            "--strategy", strategy, "--source", loss, "--seed", seed, "--append"})
                      .code) {
        return c;
      }
    }
  }
  return 0;
}

}  // namespace testing
