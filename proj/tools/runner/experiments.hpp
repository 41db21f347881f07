#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace abphase::runner {

struct Dataset {
  std::string file;  // relative to the output directory
  std::string description;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunReport {
  std::string experiment;
  std::vector<Dataset> datasets;
  std::vector<std::string> summary;   // "key = value" lines for the manifest
  std::vector<std::string> failures;  // failed numerical checks; outputs are still written
};

/// Runs the configured experiment fully in memory. Module errors propagate;
/// checks that miss their tolerance are listed in RunReport::failures.
RunReport run_experiment(const Config& cfg);

/// Writes every dataset as CSV plus manifest.txt. Returns the written paths.
std::vector<std::filesystem::path> write_report(const RunReport& report, const Config& cfg,
                                                const std::filesystem::path& out_dir);

}  // namespace abphase::runner
