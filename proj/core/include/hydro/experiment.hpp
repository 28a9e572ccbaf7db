#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hydro/config.hpp"
#include "hydro/error.hpp"
#include "hydro/metrics.hpp"
#include "hydro/model.hpp"
#include "hydro/report.hpp"
#include "hydro/timeseries.hpp"
#include "hydro/windows.hpp"

namespace hydro {

/// Failure of one pipeline stage. what() reads "<stage>: <cause>".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// The four raw series of a scenario.
struct ScenarioData {
  TimeSeries q_ton;
  TimeSeries h_lar;
  TimeSeries h_mar_physical;
  TimeSeries h_mar_observed;
};

ScenarioData generate_data(const ExperimentConfig& config);
void save_data(const ScenarioData& data, const std::filesystem::path& dir);
ScenarioData load_data(const std::filesystem::path& dir);

/// Train and test tables of one task.
///
/// Task 1: interpolated inputs, daily physical targets.
/// Task 2: interpolated inputs, hourly observed targets; the test-side stage
/// inputs and targets are spike-cleaned before interpolation.
/// Series are split by year before any resampling or cleaning.
struct TaskData {
  int task = 1;
  Dataset train;
  Dataset test;
  std::size_t cleaned_points = 0;
};

TaskData prepare_task(const ScenarioData& data, const ExperimentConfig& config, int task);

/// Seed of one model: derived from the master seed, the task and the family.
std::uint64_t model_seed(const ExperimentConfig& config, int task, const std::string& family);

std::unique_ptr<Regressor> train_model(const ExperimentConfig& config, const ModelSpec& spec,
                                       int task, const Dataset& train);

struct TaskResult {
  int task = 1;
  std::vector<EvalReport> reports;
  PredictionTable predictions;
};

/// Reports in model order. The FER reference is the "linear" model.
TaskResult evaluate_task(const TaskData& data, const std::vector<const Regressor*>& models,
                         const ExperimentConfig& config);

/// File layout under the output directory.
struct OutputLayout {
  std::filesystem::path root;

  std::filesystem::path data_dir() const { return root / "data"; }
  std::filesystem::path models_dir() const { return root / "models"; }
  std::filesystem::path figures_dir() const { return root / "figures"; }
  std::filesystem::path model_file(int task, const std::string& family) const;
  std::filesystem::path predictions_file(int task) const;
  std::filesystem::path metrics_file() const { return root / "metrics.csv"; }
  std::filesystem::path report_file() const { return root / "report.txt"; }
  std::filesystem::path effective_config_file() const { return root / "config.effective.cfg"; }
};

struct RunOptions {
  std::vector<int> tasks{1, 2};
  /// Progress messages; nullptr silences them.
  std::ostream* log = nullptr;
};

/// Scenario → data/*.csv.
void run_generate(const ExperimentConfig& config, const RunOptions& options);
/// data/*.csv → models/task<N>_<family>.json.
void run_train(const ExperimentConfig& config, const RunOptions& options);
/// Saved models + data → metrics.csv, predictions_task<N>.csv, report.txt.
std::vector<TaskResult> run_evaluate(const ExperimentConfig& config, const RunOptions& options);
/// metrics.csv + predictions → figures/*.svg.
void run_report(const ExperimentConfig& config, const RunOptions& options);
/// generate, train, evaluate and report. Files written by a failed run are removed.
std::vector<TaskResult> run_experiment(const ExperimentConfig& config, const RunOptions& options);

struct AuditEntry {
  int task = 1;
  std::string family;
  bool identical = false;
};

/// Retrains every model after perturbing all test-period values and compares
/// the serialized parameters with the unperturbed training (the saved model
/// when present, otherwise a fresh fit).
std::vector<AuditEntry> audit_test_isolation(const ExperimentConfig& config,
                                             const RunOptions& options);

/// Every test-year value shifted and scaled; train-year values untouched.
ScenarioData perturb_test_period(const ScenarioData& data, const SplitSpec& split);

}  // namespace hydro
