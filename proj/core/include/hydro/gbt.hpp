#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "hydro/model.hpp"

namespace hydro {

/// CART regression tree stored as a flat node array; node 0 is the root.
class RegressionTree {
 public:
  struct Node {
    // Internal node when left >= 0: rows with x[feature] <= threshold go left.
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // leaf value (also kept on internal nodes as the node mean)

    bool is_leaf() const noexcept { return left < 0; }
  };

  RegressionTree() = default;
  RegressionTree(std::vector<Node> nodes, int max_depth);

  double predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  int max_depth() const noexcept { return max_depth_; }
  /// Longest root-to-leaf path, in edges.
  int depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<Node> nodes_;
  int max_depth_ = 0;
};

/// Per-feature row orders sorted by value; shared across the trees of one fit.
class SortedColumns {
 public:
  explicit SortedColumns(const Matrix& x);
  std::span<const std::uint32_t> order(std::size_t feature) const {
    return {orders_.data() + feature * n_, n_};
  }
  std::size_t rows() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<std::uint32_t> orders_;
};

/// Greedy squared-error CART. Candidate thresholds are midpoints between
/// consecutive distinct feature values; leaves hold the mean residual.
RegressionTree fit_tree(const Matrix& x, std::span<const double> residuals, int max_depth,
                        int min_leaf);
RegressionTree fit_tree(const Matrix& x, const SortedColumns& sorted,
                        std::span<const double> residuals, int max_depth, int min_leaf);

struct GbtConfig {
  int n_stages = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_leaf = 1;
  /// Training rows kept (evenly spaced); 0 keeps all.
  std::size_t max_train_samples = 0;

  void validate() const;
  static GbtConfig from_options(const ModelOptions& options);
};

/// init + learning_rate × Σ trees, on z-scored features.
struct GbtEnsemble {
  double init_value = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  /// Training MSE after stage 0 (the constant) and after every tree.
  std::vector<double> train_mse;

  double predict(std::span<const double> x) const;
};

GbtEnsemble fit_gbt(const Matrix& x, std::span<const double> y, const GbtConfig& config);

class GbtRegressor final : public Regressor {
 public:
  explicit GbtRegressor(GbtConfig config) : config_(config) { config_.validate(); }

  std::string family() const override { return "gbt"; }
  void fit(const Dataset& train) override;
  Vector predict(const Matrix& x) const override;
  HyperParams hyperparams() const override;
  std::string serialize() const override;

  const GbtEnsemble& ensemble() const noexcept { return ensemble_; }

  static std::unique_ptr<GbtRegressor> from_json_text(std::string_view text);

 private:
  GbtConfig config_;
  NormStats norm_;
  GbtEnsemble ensemble_;
};

}  // namespace hydro
