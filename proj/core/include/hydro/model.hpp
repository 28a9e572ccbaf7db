#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hydro/numerics/matrix.hpp"
#include "hydro/windows.hpp"

namespace hydro {

/// Hyperparameter description for reports, in declaration order.
using HyperParams = std::vector<std::pair<std::string, std::string>>;

/// Free-form overrides coming from the experiment config (`model.<family>.<key>`).
using ModelOptions = std::map<std::string, std::string>;

/// Common surface of every model family. Models take raw windowed features
/// and return water levels in meters; z-scoring happens inside.
class Regressor {
 public:
  virtual ~Regressor() = default;

  virtual std::string family() const = 0;
  virtual void fit(const Dataset& train) = 0;
  /// Throws InvalidArgument on a width mismatch or non-finite input.
  virtual Vector predict(const Matrix& x) const = 0;
  virtual HyperParams hyperparams() const = 0;

  /// Versioned JSON document carrying the family tag, the hyperparameters and
  /// every trained parameter. Doubles round-trip exactly.
  virtual std::string serialize() const = 0;
  bool fitted() const noexcept { return fitted_; }

 protected:
  void mark_fitted() noexcept { fitted_ = true; }
  void require_fitted() const;

 private:
  bool fitted_ = false;
};

/// Family names accepted by make_model: linear, gpr, gbt, mlp, cnn.
const std::vector<std::string>& model_families();

/// Untrained model of `family` configured from `options`. Unknown families or
/// option keys throw InvalidArgument.
std::unique_ptr<Regressor> make_model(const std::string& family, const ModelOptions& options,
                                      std::uint64_t seed);

/// Rebuilds a trained model from serialize() output.
std::unique_ptr<Regressor> deserialize_model(std::string_view text);

void save_model(const Regressor& model, const std::filesystem::path& path);
std::unique_ptr<Regressor> load_model(const std::filesystem::path& path);

/// Seed of one family derived from the master seed (FNV-1a of the family name
/// mixed with the seed through splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::string_view family);

/// Linear least-squares baseline over all features plus an intercept.
class LinearRegression final : public Regressor {
 public:
  std::string family() const override { return "linear"; }
  void fit(const Dataset& train) override;
  Vector predict(const Matrix& x) const override;
  HyperParams hyperparams() const override;
  std::string serialize() const override;

  /// Coefficients on the z-scored features.
  const Vector& coefficients() const noexcept { return coef_; }
  double intercept() const noexcept { return intercept_; }
  const NormStats& norm_stats() const noexcept { return norm_; }

  static std::unique_ptr<LinearRegression> from_json_text(std::string_view text);

 private:
  Vector coef_;
  double intercept_ = 0.0;
  NormStats norm_;
};

}  // namespace hydro
