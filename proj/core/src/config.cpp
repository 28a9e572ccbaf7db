#include "hydro/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "hydro/error.hpp"
#include "hydro/metrics.hpp"

namespace hydro {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidArgument("bad number '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct ScenarioField {
  const char* key;
  double CatchmentScenario::* real = nullptr;
  int CatchmentScenario::* integer = nullptr;
};

const std::vector<ScenarioField>& scenario_fields() {
  using S = CatchmentScenario;
  static const std::vector<ScenarioField> fields{
      {"start_year", nullptr, &S::start_year},
      {"n_years", nullptr, &S::n_years},
      {"base_discharge", &S::base_discharge},
      {"seasonal_amplitude", &S::seasonal_amplitude},
      {"storm_rate", &S::storm_rate},
      {"storm_magnitude_shape", &S::storm_magnitude_shape},
      {"storm_magnitude_scale", &S::storm_magnitude_scale},
      {"storm_rise_hours", &S::storm_rise_hours},
      {"recession_hours", &S::recession_hours},
      {"lag_hours", &S::lag_hours},
      {"rating_a", &S::rating_a},
      {"rating_b", &S::rating_b},
      {"backwater_weight", &S::backwater_weight},
      {"lar_lag_hours", &S::lar_lag_hours},
      {"lar_rating_a", &S::lar_rating_a},
      {"lar_rating_b", &S::lar_rating_b},
      {"lar_lowfreq_amplitude", &S::lar_lowfreq_amplitude},
      {"obs_noise_std", &S::obs_noise_std},
      {"ar1_coefficient", &S::ar1_coefficient},
      {"gap_rate", &S::gap_rate},
      {"gap_mean_hours", &S::gap_mean_hours},
      {"spike_rate", &S::spike_rate},
      {"spike_magnitude", &S::spike_magnitude},
      {"extreme_event_day", &S::extreme_event_day},
      {"extreme_event_magnitude", &S::extreme_event_magnitude},
  };
  return fields;
}

ModelSpec& spec_for(ExperimentConfig& c, const std::string& family) {
  for (auto& m : c.models) {
    if (m.family == family) return m;
  }
  throw InvalidArgument("options given for model '" + family + "' which is not in `models`");
}

// Applies one key; returns false when the key is unknown.
bool apply(ExperimentConfig& c, const std::string& key, const std::string& value,
           std::vector<std::pair<std::string, std::string>>& deferred) {
  if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(value);
  } else if (key == "output_dir") {
    c.output_dir = value;
  } else if (key == "models") {
    c.models.clear();
    for (const auto& f : split_list(value)) c.models.push_back({f, {}, {}});
  } else if (key == "max_gap_hours") {
    c.max_gap_hours = parse_number<int>(value);
  } else if (key == "clean.window") {
    c.clean_window = parse_number<int>(value);
  } else if (key == "clean.k") {
    c.clean_k = parse_number<double>(value);
  } else if (key == "pdf_bins") {
    c.pdf_bins = parse_number<std::size_t>(value);
  } else if (key == "split.train_start") {
    c.split.train_start = parse_number<int>(value);
  } else if (key == "split.train_end") {
    c.split.train_end = parse_number<int>(value);
  } else if (key == "split.test_start") {
    c.split.test_start = parse_number<int>(value);
  } else if (key == "split.test_end") {
    c.split.test_end = parse_number<int>(value);
  } else if (key == "task1.window_hours") {
    c.task1.window_hours = parse_number<int>(value);
  } else if (key == "task1.target_stride_hours") {
    c.task1.target_stride_hours = parse_number<int>(value);
  } else if (key == "task2.window_hours") {
    c.task2.window_hours = parse_number<int>(value);
  } else if (key == "task2.target_stride_hours") {
    c.task2.target_stride_hours = parse_number<int>(value);
  } else if (key == "scenario.seed") {
    c.scenario.seed = parse_number<std::uint64_t>(value);
    c.scenario_seed_set = true;
  } else if (key.starts_with("scenario.")) {
    const auto name = key.substr(9);
    for (const auto& f : scenario_fields()) {
      if (name == f.key) {
        if (f.real) c.scenario.*f.real = parse_number<double>(value);
        else c.scenario.*f.integer = parse_number<int>(value);
        return true;
      }
    }
    return false;
  } else if (key.starts_with("model.") || key.starts_with("task1.model.") ||
             key.starts_with("task2.model.")) {
    deferred.emplace_back(key, value);
  } else {
    return false;
  }
  return true;
}

void apply_model_option(ExperimentConfig& c, const std::string& key, const std::string& value) {
  int task = 0;
  std::string rest = key;
  if (key.starts_with("task")) {
    task = key[4] - '0';
    rest = key.substr(6);
  }
  rest = rest.substr(6);  // "model."
  const auto dot = rest.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == rest.size()) {
    throw InvalidArgument("expected <family>.<option> after 'model.'");
  }
  auto& spec = spec_for(c, rest.substr(0, dot));
  const auto option = rest.substr(dot + 1);
  if (task == 0) spec.options[option] = value;
  else spec.task_options[task][option] = value;
  // Unknown names are caught here so the error can carry the line number.
  try {
    make_model(spec.family, {{option, value}}, 0);
  } catch (const InvalidArgument& e) {
    if (std::string(e.what()).find("unknown option") != std::string::npos) throw;
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  effective_scenario().validate();
  split.validate();
  task1.validate();
  task2.validate();
  if (split.train_start < scenario.start_year ||
      split.test_end >= scenario.start_year + scenario.n_years) {
    throw InvalidArgument("config: split years fall outside the scenario's years");
  }
  if (max_gap_hours < 1) throw InvalidArgument("config: max_gap_hours must be >= 1");
  if (clean_window < 3 || clean_window % 2 == 0) {
    throw InvalidArgument("config: clean.window must be an odd integer >= 3");
  }
  if (!(clean_k > 0.0)) throw InvalidArgument("config: clean.k must be positive");
  if (pdf_bins < 1) throw InvalidArgument("config: pdf_bins must be >= 1");
  std::set<std::string> seen;
  for (const auto& m : models) {
    if (!seen.insert(m.family).second) {
      throw InvalidArgument("config: model '" + m.family + "' listed twice");
    }
    for (int task : {1, 2}) make_model(m.family, options_for(m, task), 0);
  }
  if (!seen.count("linear")) {
    throw InvalidArgument("config: the linear baseline must be among the models (FER reference)");
  }
}

CatchmentScenario ExperimentConfig::effective_scenario() const {
  CatchmentScenario s = scenario;
  if (!scenario_seed_set) s.seed = seed;
  return s;
}

const WindowSpec& ExperimentConfig::window(int task) const {
  if (task == 1) return task1;
  if (task == 2) return task2;
  throw InvalidArgument("task must be 1 or 2");
}

ModelOptions ExperimentConfig::options_for(const ModelSpec& spec, int task) const {
  ModelOptions out = spec.options;
  if (auto it = spec.task_options.find(task); it != spec.task_options.end()) {
    for (const auto& [k, v] : it->second) out[k] = v;
  }
  return out;
}

std::vector<std::string> ExperimentConfig::families() const {
  std::vector<std::string> out;
  for (const auto& m : models) out.push_back(m.family);
  return out;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  for (const auto& f : model_families()) c.models.push_back({f, {}, {}});
  return c;
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  ExperimentConfig c = default_config();
  std::vector<std::pair<std::string, std::string>> deferred;
  std::vector<int> deferred_lines;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + "expected 'key = value'");
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (key.empty()) throw InvalidArgument(where + "empty key");
    if (!seen.insert(key).second) throw InvalidArgument(where + "duplicate key '" + key + "'");
    try {
      const auto before = deferred.size();
      if (!apply(c, key, value, deferred)) throw InvalidArgument("unknown key '" + key + "'");
      if (deferred.size() != before) deferred_lines.push_back(line_no);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(where + e.what());
    }
  }
  for (std::size_t i = 0; i < deferred.size(); ++i) {
    try {
      apply_model_option(c, deferred[i].first, deferred[i].second);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(source + ":" + std::to_string(deferred_lines[i]) + ": " + e.what());
    }
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(source + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  const auto s = c.effective_scenario();
  out << "seed = " << c.seed << "\n"
      << "output_dir = " << c.output_dir.string() << "\n\n"
      << "scenario.seed = " << s.seed << "\n";
  for (const auto& f : scenario_fields()) {
    out << "scenario." << f.key << " = "
        << (f.real ? format_double(s.*f.real) : std::to_string(s.*f.integer)) << "\n";
  }
  out << "\nsplit.train_start = " << c.split.train_start << "\n"
      << "split.train_end = " << c.split.train_end << "\n"
      << "split.test_start = " << c.split.test_start << "\n"
      << "split.test_end = " << c.split.test_end << "\n\n"
      << "task1.window_hours = " << c.task1.window_hours << "\n"
      << "task1.target_stride_hours = " << c.task1.target_stride_hours << "\n"
      << "task2.window_hours = " << c.task2.window_hours << "\n"
      << "task2.target_stride_hours = " << c.task2.target_stride_hours << "\n\n"
      << "max_gap_hours = " << c.max_gap_hours << "\n"
      << "clean.window = " << c.clean_window << "\n"
      << "clean.k = " << format_double(c.clean_k) << "\n"
      << "pdf_bins = " << c.pdf_bins << "\n\n"
      << "models = ";
  for (std::size_t i = 0; i < c.models.size(); ++i) out << (i ? ", " : "") << c.models[i].family;
  out << "\n";
  for (const auto& m : c.models) {
    for (int task : {1, 2}) {
      auto model = make_model(m.family, c.options_for(m, task), 0);
      for (const auto& [k, v] : model->hyperparams()) {
        out << "# task" << task << " " << m.family << "." << k << " = " << v << "\n";
      }
    }
    for (const auto& [k, v] : m.options) out << "model." << m.family << "." << k << " = " << v << "\n";
    for (const auto& [task, opts] : m.task_options) {
      for (const auto& [k, v] : opts) {
        out << "task" << task << ".model." << m.family << "." << k << " = " << v << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace hydro
