#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hydro/model.hpp"
#include "hydro/synthdata.hpp"
#include "hydro/timeseries.hpp"
#include "hydro/windows.hpp"

namespace hydro {

struct ModelSpec {
  std::string family;
  /// `model.<family>.<key>` entries, used by both tasks.
  ModelOptions options;
  /// `task<N>.model.<family>.<key>` entries, layered over `options`.
  std::map<int, ModelOptions> task_options;
};

/// Everything one experiment run needs. See configs/ for the file format.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  /// Scenario seed; when unset in the file it follows the master seed.
  bool scenario_seed_set = false;
  CatchmentScenario scenario;
  SplitSpec split{1996, 1999, 2000, 2000};
  WindowSpec task1{24, 24};
  WindowSpec task2{24, 1};
  int max_gap_hours = 24;
  int clean_window = 5;
  double clean_k = 5.0;
  std::size_t pdf_bins = 40;
  std::vector<ModelSpec> models;
  std::filesystem::path output_dir = "out";

  /// Throws InvalidArgument on an inconsistent configuration, including
  /// unknown model options.
  void validate() const;

  CatchmentScenario effective_scenario() const;
  const WindowSpec& window(int task) const;
  ModelOptions options_for(const ModelSpec& spec, int task) const;
  std::vector<std::string> families() const;
};

/// Default config: all five families with library defaults.
ExperimentConfig default_config();

/// Parses `key = value` lines. `#` starts a comment. `source` prefixes error
/// messages ("source:line: ...").
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every effective setting, one per line, in the same format parse_config reads.
std::string config_to_text(const ExperimentConfig& config);

}  // namespace hydro
