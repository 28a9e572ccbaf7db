#include "hydro/model.hpp"

#include <fstream>
#include <sstream>

#include "hydro/error.hpp"
#include "hydro/gbt.hpp"
#include "hydro/gpr.hpp"
#include "hydro/neuralnet.hpp"
#include "json.hpp"

namespace hydro {

void Regressor::require_fitted() const {
  if (!fitted_) throw InvalidArgument(family() + ": predict called before fit");
}

const std::vector<std::string>& model_families() {
  static const std::vector<std::string> families{"linear", "gpr", "gbt", "mlp", "cnn"};
  return families;
}

std::unique_ptr<Regressor> make_model(const std::string& family, const ModelOptions& options,
                                      std::uint64_t seed) {
  if (family == "linear") {
    if (!options.empty()) {
      throw InvalidArgument("linear: unknown option '" + options.begin()->first + "'");
    }
    return std::make_unique<LinearRegression>();
  }
  if (family == "gpr") return std::make_unique<GprRegressor>(GprConfig::from_options(options, seed));
  if (family == "gbt") return std::make_unique<GbtRegressor>(GbtConfig::from_options(options));
  if (family == "mlp" || family == "cnn") {
    return std::make_unique<NetworkRegressor>(
        family == "mlp" ? Architecture::mlp : Architecture::cnn,
        TrainConfig::from_options(options, seed));
  }
  throw InvalidArgument("unknown model family '" + family + "'");
}

std::unique_ptr<Regressor> deserialize_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.contains("format") || doc["format"] != "hydrosurrogate-model") {
    throw InvalidArgument("not a hydrosurrogate model document");
  }
  if (doc.value("version", 0) != 1) throw InvalidArgument("unsupported model document version");
  const std::string family = doc.value("family", "");
  if (family == "linear") return LinearRegression::from_json_text(text);
  if (family == "gpr") return GprRegressor::from_json_text(text);
  if (family == "gbt") return GbtRegressor::from_json_text(text);
  if (family == "mlp" || family == "cnn") return NetworkRegressor::from_json_text(text);
  throw InvalidArgument("model document has unknown family '" + family + "'");
}

void save_model(const Regressor& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << model.serialize() << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

std::unique_ptr<Regressor> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view family) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : family) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = master ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace hydro
