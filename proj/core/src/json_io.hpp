#pragma once

// JSON helpers shared by the model serializers.

#include <string>
#include <string_view>

#include "hydro/error.hpp"
#include "hydro/model.hpp"
#include "hydro/numerics/matrix.hpp"
#include "hydro/pca.hpp"
#include "hydro/windows.hpp"
#include "json.hpp"

namespace hydro::detail {

using json = nlohmann::json;

inline json header(const Regressor& m) {
  json doc;
  doc["format"] = "hydrosurrogate-model";
  doc["version"] = 1;
  doc["family"] = m.family();
  json hp = json::object();
  for (const auto& [k, v] : m.hyperparams()) hp[k] = v;
  doc["hyperparams"] = hp;
  return doc;
}

inline json parse_document(std::string_view text, const std::string& family) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("model file is not valid JSON: ") + e.what());
  }
  if (doc.value("family", "") != family) {
    throw InvalidArgument("model document is not a '" + family + "' model");
  }
  return doc;
}

inline json to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()},
              {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

inline Matrix matrix_from_json(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

inline json to_json(const NormStats& s) {
  return json{{"x_mean", s.x_mean}, {"x_std", s.x_std}, {"y_mean", s.y_mean}, {"y_std", s.y_std}};
}

inline NormStats norm_from_json(const json& j) {
  NormStats s;
  s.x_mean = j.at("x_mean").get<Vector>();
  s.x_std = j.at("x_std").get<Vector>();
  s.y_mean = j.at("y_mean").get<double>();
  s.y_std = j.at("y_std").get<double>();
  return s;
}

inline json to_json(const PcaBasis& b) {
  return json{{"mean", b.mean},
              {"components", to_json(b.components)},
              {"singular_values", b.singular_values},
              {"energy_fraction", b.energy_fraction}};
}

inline PcaBasis pca_from_json(const json& j) {
  PcaBasis b;
  b.mean = j.at("mean").get<Vector>();
  b.components = matrix_from_json(j.at("components"));
  b.singular_values = j.at("singular_values").get<Vector>();
  b.energy_fraction = j.at("energy_fraction").get<double>();
  return b;
}

/// Wraps nlohmann exceptions raised while reading a document.
template <typename F>
auto read_document(const std::string& family, F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw InvalidArgument(family + " model document is malformed: " + e.what());
  }
}

}  // namespace hydro::detail
