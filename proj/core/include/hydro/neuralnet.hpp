#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "hydro/model.hpp"

namespace hydro {

enum class Activation { relu, identity };

/// y = act(W x + b), W stored out × in row-major.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  Activation activation = Activation::relu;
  Vector weights;
  Vector bias;
};

/// Valid 1-D cross-correlation along time, stride 1, summed over input
/// channels. Filters stored out × in × kernel row-major.
struct Conv1dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_width = 3;
  std::size_t input_length = 0;
  Activation activation = Activation::relu;
  Vector filters;
  Vector bias;

  std::size_t output_length() const noexcept { return input_length - kernel_width + 1; }
};

using Layer = std::variant<DenseLayer, Conv1dLayer>;

/// Input tensor layout. A flat input is one channel; a channelled input is
/// stored channel-major (channel c, step t at c * length + t), which is the
/// layout of a windowed dataset row with the discharge block as channel 0.
struct InputShape {
  std::size_t channels = 1;
  std::size_t length = 0;

  std::size_t size() const noexcept { return channels * length; }
  bool operator==(const InputShape&) const = default;
};

/// Convolutional layers first, an implicit channel-major flatten, then dense
/// layers ending in a single identity output.
class Network {
 public:
  Network() = default;
  /// Throws InvalidArgument when the layer shapes do not compose.
  Network(InputShape input, std::vector<Layer> layers);

  const InputShape& input_shape() const noexcept { return input_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& layers() noexcept { return layers_; }

  std::size_t parameter_count() const;
  /// All weights and biases, layer by layer (weights before bias).
  Vector flat_parameters() const;
  void set_flat_parameters(std::span<const double> params);

 private:
  InputShape input_;
  std::vector<Layer> layers_;
};

/// Seed-driven He-uniform weights (limit sqrt(6 / fan_in)), zero biases.
void initialize_he_uniform(Network& net, std::uint64_t seed);

/// 2W → 7 × dense(100, ReLU) → dense(1).
Network build_mlp(int window_hours, std::uint64_t seed);
/// (2, W) → 3 × conv(128 filters, width 3, ReLU) → flatten → dense(40, ReLU)
/// → dense(20, ReLU) → dense(1). Requires W >= 7.
Network build_cnn(int window_hours, std::uint64_t seed);

double forward(const Network& net, std::span<const double> x);
/// One output per row of `x`.
Vector forward_batch(const Network& net, const Matrix& x);

/// Gradient of ½ (forward(x) − y)² for every parameter, in flat_parameters() order.
Vector backward(const Network& net, std::span<const double> x, double y_true);

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;
  /// Training rows kept (evenly spaced); 0 keeps all.
  std::size_t max_train_samples = 0;

  void validate() const;
  static TrainConfig from_options(const ModelOptions& options, std::uint64_t seed);
};

struct TrainHistory {
  /// Mean squared error of each epoch, from the per-sample losses seen while
  /// training (summed in sample order).
  std::vector<double> epoch_mse;
};

/// Mini-batch training on the mean of ½ (f(x) − y)². Aborts with NumericalError
/// naming the epoch if the loss becomes non-finite.
TrainHistory train(Network& net, const Matrix& x, std::span<const double> y,
                   const TrainConfig& config);

enum class Architecture { mlp, cnn };

class NetworkRegressor final : public Regressor {
 public:
  NetworkRegressor(Architecture arch, TrainConfig config);

  std::string family() const override { return arch_ == Architecture::mlp ? "mlp" : "cnn"; }
  void fit(const Dataset& train) override;
  Vector predict(const Matrix& x) const override;
  HyperParams hyperparams() const override;
  std::string serialize() const override;

  const Network& network() const noexcept { return net_; }
  const TrainHistory& history() const noexcept { return history_; }

  static std::unique_ptr<NetworkRegressor> from_json_text(std::string_view text);

 private:
  Architecture arch_;
  TrainConfig config_;
  NormStats norm_;
  Network net_;
  TrainHistory history_;
};

}  // namespace hydro
