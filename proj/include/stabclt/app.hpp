#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabclt/config.hpp"

namespace stabclt {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kManifestVersion = 1;

struct RunRequest {
  std::string experiment;  // one of kExperimentKinds
  ExperimentConfig config;
  unsigned threads = 1;
};

struct RunOutcome {
  std::filesystem::path directory;
  std::vector<std::string> files;  // relative to directory
  nlohmann::json summary;
  std::string table;  // one-screen human summary
};

/// Runs one experiment and writes summary.json, replications.csv,
/// timings.csv, manifest.json and any experiment-specific files into
/// config.output_directory. Only timings.csv and the manifest timestamps
/// depend on the machine or the worker count.
RunOutcome run_experiment(const RunRequest& request);

/// Exit codes: 0 success, 1 usage error, 2 config or input error,
/// 3 output error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stabclt
