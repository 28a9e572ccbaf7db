#include "hydro/experiment.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hydro/error.hpp"
#include "hydro/synthdata.hpp"

namespace hydro {

namespace fs = std::filesystem;

StageError::StageError(std::string stage, const std::string& cause)
    : Error(stage + ": " + cause), stage_(std::move(stage)) {}

namespace {

// Files created during a run, removed again if the run fails.
class Artifacts {
 public:
  void created(const fs::path& p) {
    if (!fs::exists(p)) fresh_.push_back(p);
  }
  void rollback() noexcept {
    for (auto it = fresh_.rbegin(); it != fresh_.rend(); ++it) {
      std::error_code ec;
      fs::remove(*it, ec);
    }
    fresh_.clear();
  }
  void commit() noexcept { fresh_.clear(); }

 private:
  std::vector<fs::path> fresh_;
};

void make_dir(const fs::path& dir, Artifacts& art) {
  std::vector<fs::path> chain;
  for (fs::path p = dir; !p.empty() && !fs::exists(p); p = p.parent_path()) {
    chain.push_back(p);
    if (p == p.parent_path()) break;
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) art.created(*it);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

void log(const RunOptions& o, const std::string& msg) {
  if (o.log) *o.log << msg << std::endl;
}

std::string task_name(int task) { return "task" + std::to_string(task); }

template <typename F>
auto staged(const std::string& stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text, Artifacts& art) {
  art.created(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

const char* const kDataFiles[] = {"q_ton.csv", "h_lar.csv", "h_mar_physical.csv",
                                  "h_mar_observed.csv"};

void generate_into(const ExperimentConfig& config, const RunOptions& options, Artifacts& art) {
  const OutputLayout out{config.output_dir};
  staged("generate", [&] {
    make_dir(out.data_dir(), art);
    write_text(out.effective_config_file(), config_to_text(config), art);
    const auto data = generate_data(config);
    for (const char* f : kDataFiles) art.created(out.data_dir() / f);
    save_data(data, out.data_dir());
    log(options, "[generate] " + std::to_string(data.q_ton.size()) + " hourly boundary values, " +
                     std::to_string(data.h_mar_physical.size()) + " daily and " +
                     std::to_string(data.h_mar_observed.size()) +
                     " hourly target values -> " + out.data_dir().string());
    return 0;
  });
}

ScenarioData load_stage_data(const ExperimentConfig& config, const std::string& stage) {
  const OutputLayout out{config.output_dir};
  return staged(stage, [&] {
    if (!fs::exists(out.data_dir() / kDataFiles[0])) {
      throw Error("no data in " + out.data_dir().string() + " (run `generate` first)");
    }
    return load_data(out.data_dir());
  });
}

void train_into(const ExperimentConfig& config, const RunOptions& options, Artifacts& art,
                bool write_config = false) {
  const OutputLayout out{config.output_dir};
  const auto data = load_stage_data(config, "train");
  staged("train", [&] {
    if (write_config) write_text(out.effective_config_file(), config_to_text(config), art);
    make_dir(out.models_dir(), art);
    return 0;
  });
  for (int task : options.tasks) {
    const auto td = staged("prepare", [&] { return prepare_task(data, config, task); });
    log(options, "[train] " + task_name(task) + ": " + std::to_string(td.train.size()) +
                     " training windows (" + std::to_string(td.train.excluded) + " excluded)");
    for (const auto& spec : config.models) {
      const std::string stage = "train[" + task_name(task) + "/" + spec.family + "]";
      staged(stage, [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto model = train_model(config, spec, task, td.train);
        const auto path = out.model_file(task, spec.family);
        art.created(path);
        save_model(*model, path);
        std::ostringstream msg;
        msg.precision(3);
        msg << "[train] " << task_name(task) << " " << spec.family << ": " << seconds_since(t0)
            << " s";
        log(options, msg.str());
        return 0;
      });
    }
  }
}

std::vector<TaskResult> evaluate_into(const ExperimentConfig& config, const RunOptions& options,
                                      Artifacts& art) {
  const OutputLayout out{config.output_dir};
  const auto data = load_stage_data(config, "evaluate");
  std::vector<TaskResult> results;
  for (int task : options.tasks) {
    const auto td = staged("prepare", [&] { return prepare_task(data, config, task); });
    results.push_back(staged("evaluate", [&] {
      std::vector<std::unique_ptr<Regressor>> models;
      std::vector<const Regressor*> ptrs;
      for (const auto& spec : config.models) {
        const auto path = out.model_file(task, spec.family);
        if (!fs::exists(path)) throw Error("missing model " + path.string() + " (run `train` first)");
        models.push_back(load_model(path));
        if (models.back()->family() != spec.family) {
          throw Error(path.string() + " holds a '" + models.back()->family() + "' model");
        }
        ptrs.push_back(models.back().get());
      }
      auto r = evaluate_task(td, ptrs, config);
      log(options, "[evaluate] " + task_name(task) + ": " + std::to_string(td.test.size()) +
                       " test samples");
      return r;
    }));
  }
  staged("evaluate", [&] {
    std::vector<EvalReport> all;
    std::ostringstream text;
    for (const auto& r : results) {
      for (const auto& rep : r.reports) {
        all.push_back(rep);
        write_report_text(text, rep);
        text << "\n";
      }
      art.created(out.predictions_file(r.task));
      write_predictions_csv(r.predictions, out.predictions_file(r.task));
    }
    art.created(out.metrics_file());
    write_metrics_csv(all, out.metrics_file());
    write_text(out.report_file(), text.str(), art);
    for (const auto& rep : all) {
      std::ostringstream msg;
      msg.precision(4);
      msg << "[evaluate] " << rep.task << " " << rep.model_name << ": rmse " << rep.rmse * 100.0
          << " cm, fer " << rep.fer << ", max error " << rep.max_error * 100.0 << " cm";
      log(options, msg.str());
    }
    return 0;
  });
  return results;
}

void report_into(const ExperimentConfig& config, const RunOptions& options, Artifacts& art) {
  const OutputLayout out{config.output_dir};
  staged("report", [&] {
    if (!fs::exists(out.metrics_file())) {
      throw Error("missing " + out.metrics_file().string() + " (run `evaluate` first)");
    }
    const auto metrics = read_metrics_csv(out.metrics_file());
    make_dir(out.figures_dir(), art);
    auto save = [&](const svg::Document& doc, const std::string& name) {
      const auto path = out.figures_dir() / name;
      art.created(path);
      doc.save(path);
    };
    for (int task : options.tasks) {
      const auto tn = task_name(task);
      std::vector<EvalReport> rows;
      for (const auto& r : metrics) {
        if (r.task == tn) rows.push_back(r);
      }
      if (rows.empty()) throw Error("metrics.csv has no rows for " + tn);
      const auto table = read_predictions_csv(out.predictions_file(task));
      const std::string label = task == 1 ? "Task 1 (daily physical target)"
                                          : "Task 2 (hourly observed target)";
      save(fer_rmse_chart(label, rows), tn + "_fer_rmse.svg");
      save(max_error_chart(label, rows), tn + "_max_error.svg");
      save(error_series_chart(label + ": prediction - target", table), tn + "_errors.svg");
      save(error_pdf_chart(label + ": error PDF", table, config.pdf_bins), tn + "_error_pdf.svg");
    }
    log(options, "[report] figures -> " + out.figures_dir().string());
    return 0;
  });
}

template <typename F>
auto transactional(F&& body) {
  Artifacts art;
  try {
    if constexpr (std::is_void_v<decltype(body(art))>) {
      body(art);
      art.commit();
    } else {
      auto r = body(art);
      art.commit();
      return r;
    }
  } catch (...) {
    art.rollback();
    throw;
  }
}

TimeSeries shift_test(const TimeSeries& ts, const SplitSpec& split, double scale, double offset) {
  std::vector<Timestamp> t(ts.timestamps().begin(), ts.timestamps().end());
  std::vector<double> v(ts.values().begin(), ts.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const int y = year_of(t[i]);
    if (y >= split.test_start && y <= split.test_end) v[i] = v[i] * scale + offset;
  }
  return TimeSeries(ts.station(), ts.quantity(), std::move(t), std::move(v));
}

}  // namespace

ScenarioData generate_data(const ExperimentConfig& config) {
  const auto scenario = config.effective_scenario();
  auto b = generate_boundaries(scenario);
  ScenarioData d;
  d.h_mar_physical = route_to_target(b.q_ton, b.h_lar, scenario, TargetMode::physical);
  d.h_mar_observed = route_to_target(b.q_ton, b.h_lar, scenario, TargetMode::observed);
  d.q_ton = std::move(b.q_ton);
  d.h_lar = std::move(b.h_lar);
  return d;
}

void save_data(const ScenarioData& data, const fs::path& dir) {
  save_csv(data.q_ton, dir / kDataFiles[0]);
  save_csv(data.h_lar, dir / kDataFiles[1]);
  save_csv(data.h_mar_physical, dir / kDataFiles[2]);
  save_csv(data.h_mar_observed, dir / kDataFiles[3]);
}

ScenarioData load_data(const fs::path& dir) {
  ScenarioData d;
  d.q_ton = load_csv(dir / kDataFiles[0]);
  d.h_lar = load_csv(dir / kDataFiles[1]);
  d.h_mar_physical = load_csv(dir / kDataFiles[2]);
  d.h_mar_observed = load_csv(dir / kDataFiles[3]);
  if (d.q_ton.quantity() != Quantity::discharge || d.h_lar.quantity() != Quantity::stage ||
      d.h_mar_physical.quantity() != Quantity::stage ||
      d.h_mar_observed.quantity() != Quantity::stage) {
    throw InvalidArgument("data files in " + dir.string() + " carry unexpected quantities");
  }
  return d;
}

TaskData prepare_task(const ScenarioData& data, const ExperimentConfig& config, int task) {
  const auto& window = config.window(task);
  const auto [q_train, q_test] = split_by_period(data.q_ton, config.split);
  const auto [h_train, h_test] = split_by_period(data.h_lar, config.split);
  const auto& target = task == 1 ? data.h_mar_physical : data.h_mar_observed;
  const auto [y_train, y_test] = split_by_period(target, config.split);

  TaskData td;
  td.task = task;
  const auto qi_train = resample_hourly(q_train, config.max_gap_hours);
  const auto hi_train = resample_hourly(h_train, config.max_gap_hours);
  td.train = build_dataset(qi_train, hi_train, y_train, window);

  const auto qi_test = resample_hourly(q_test, config.max_gap_hours);
  TimeSeries hi_test, y_eval = y_test;
  if (task == 2) {
    const auto h_clean = clean_spikes(h_test, config.clean_window, config.clean_k);
    const auto y_clean = clean_spikes(y_test, config.clean_window, config.clean_k);
    td.cleaned_points = h_clean.removed + y_clean.removed;
    hi_test = resample_hourly(h_clean.series, config.max_gap_hours);
    y_eval = resample_hourly(y_clean.series, config.max_gap_hours);
  } else {
    hi_test = resample_hourly(h_test, config.max_gap_hours);
  }
  td.test = with_norm_stats(build_dataset(qi_test, hi_test, y_eval, window), td.train.norm);
  if (td.train.size() == 0) throw InvalidArgument(task_name(task) + ": empty training set");
  if (td.test.size() == 0) throw InvalidArgument(task_name(task) + ": empty test set");
  return td;
}

std::uint64_t model_seed(const ExperimentConfig& config, int task, const std::string& family) {
  return derive_seed(config.seed, task_name(task) + "/" + family);
}

std::unique_ptr<Regressor> train_model(const ExperimentConfig& config, const ModelSpec& spec,
                                       int task, const Dataset& train) {
  auto model = make_model(spec.family, config.options_for(spec, task),
                          model_seed(config, task, spec.family));
  model->fit(train);
  return model;
}

TaskResult evaluate_task(const TaskData& data, const std::vector<const Regressor*>& models,
                         const ExperimentConfig& config) {
  TaskResult r;
  r.task = data.task;
  r.predictions.timestamps = data.test.timestamps;
  r.predictions.target = data.test.y;
  const Regressor* baseline = nullptr;
  for (const auto* m : models) {
    r.predictions.models.push_back(m->family());
    r.predictions.predictions.push_back(m->predict(data.test.x));
    if (m->family() == "linear") baseline = m;
  }
  if (!baseline) throw InvalidArgument("the linear baseline is required for FER");
  double mse_reg = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i] == baseline) mse_reg = mse(data.test.y, r.predictions.predictions[i]);
  }
  for (std::size_t i = 0; i < models.size(); ++i) {
    r.reports.push_back(evaluate_predictions(task_name(data.task), models[i]->family(),
                                             data.test.y, r.predictions.predictions[i], mse_reg,
                                             config.pdf_bins));
  }
  return r;
}

fs::path OutputLayout::model_file(int task, const std::string& family) const {
  return models_dir() / (task_name(task) + "_" + family + ".json");
}

fs::path OutputLayout::predictions_file(int task) const {
  return root / ("predictions_" + task_name(task) + ".csv");
}

void run_generate(const ExperimentConfig& config, const RunOptions& options) {
  transactional([&](Artifacts& art) { generate_into(config, options, art); });
}

void run_train(const ExperimentConfig& config, const RunOptions& options) {
  transactional([&](Artifacts& art) { train_into(config, options, art, true); });
}

std::vector<TaskResult> run_evaluate(const ExperimentConfig& config, const RunOptions& options) {
  return transactional([&](Artifacts& art) { return evaluate_into(config, options, art); });
}

void run_report(const ExperimentConfig& config, const RunOptions& options) {
  transactional([&](Artifacts& art) { report_into(config, options, art); });
}

std::vector<TaskResult> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  return transactional([&](Artifacts& art) {
    generate_into(config, options, art);
    train_into(config, options, art);
    auto results = evaluate_into(config, options, art);
    report_into(config, options, art);
    return results;
  });
}

ScenarioData perturb_test_period(const ScenarioData& data, const SplitSpec& split) {
  ScenarioData p;
  p.q_ton = shift_test(data.q_ton, split, 1.7, 300.0);
  p.h_lar = shift_test(data.h_lar, split, 1.3, 2.0);
  p.h_mar_physical = shift_test(data.h_mar_physical, split, 1.3, 3.0);
  p.h_mar_observed = shift_test(data.h_mar_observed, split, 1.3, 3.0);
  return p;
}

std::vector<AuditEntry> audit_test_isolation(const ExperimentConfig& config,
                                             const RunOptions& options) {
  const OutputLayout out{config.output_dir};
  return staged("audit", [&] {
    const ScenarioData data = fs::exists(out.data_dir() / kDataFiles[0])
                                  ? load_data(out.data_dir())
                                  : generate_data(config);
    const ScenarioData perturbed = perturb_test_period(data, config.split);
    std::vector<AuditEntry> entries;
    for (int task : options.tasks) {
      const auto base = prepare_task(data, config, task);
      const auto pert = prepare_task(perturbed, config, task);
      for (const auto& spec : config.models) {
        std::string reference;
        const auto path = out.model_file(task, spec.family);
        if (fs::exists(path)) {
          std::ifstream in(path, std::ios::binary);
          std::ostringstream buf;
          buf << in.rdbuf();
          reference = buf.str();
          if (!reference.empty() && reference.back() == '\n') reference.pop_back();
        } else {
          reference = train_model(config, spec, task, base.train)->serialize();
        }
        const auto retrained = train_model(config, spec, task, pert.train)->serialize();
        entries.push_back({task, spec.family, retrained == reference});
        log(options, "[audit] " + task_name(task) + " " + spec.family + ": " +
                         (entries.back().identical ? "parameters unchanged" : "PARAMETERS CHANGED"));
      }
    }
    return entries;
  });
}

}  // namespace hydro
