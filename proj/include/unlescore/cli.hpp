#pragma once

// Subcommands: score, evaluate, detect, bench.
//
// Exit codes are a stable contract:
//   0 ok, 1 internal error, 2 validation failure, 3 parse failure,
//   4 anomaly alarm (detect only).
// Diagnostics go to the error stream; data goes to files or standard output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "unlescore/anomaly.hpp"
#include "unlescore/report.hpp"

namespace unlescore::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kValidation = 2,
  kParse = 3,
  kAnomaly = 4,
};

struct RunConfig {
  std::string command;
  std::string input;
  std::string shadow;
  std::string output;  // empty: standard output (bench: no report tree)
  io::ReportFormat format = io::ReportFormat::json;
  std::vector<double> fpr_targets{1e-3};
  anomaly::AnomalyConfig anomaly;
  std::string preset = "utility";
  std::optional<std::string> algorithm;
  std::uint64_t seed = 7;
  bool timing = false;
  unsigned workers = 1;
  std::string config_path;
  // Raw "bench" section of the config file, applied over the preset.
  nlohmann::json bench_overrides = nlohmann::json::object();
};

nlohmann::json to_json(const RunConfig& config);

int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_detect(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv-style arguments (without the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace unlescore::cli
