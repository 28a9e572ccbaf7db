#include "hydro/neuralnet.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "hydro/error.hpp"
#include "json_io.hpp"
#include "options.hpp"

namespace hydro {

namespace {

using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

std::size_t weight_count(const Layer& l) {
  return std::visit(
      [](const auto& layer) {
        if constexpr (std::is_same_v<std::decay_t<decltype(layer)>, DenseLayer>) {
          return layer.inputs * layer.outputs;
        } else {
          return layer.out_channels * layer.in_channels * layer.kernel_width;
        }
      },
      l);
}

std::size_t bias_count(const Layer& l) {
  return std::visit(
      [](const auto& layer) {
        if constexpr (std::is_same_v<std::decay_t<decltype(layer)>, DenseLayer>) {
          return layer.outputs;
        } else {
          return layer.out_channels;
        }
      },
      l);
}

void apply_relu(Mat& m) { m = m.cwiseMax(0.0); }

// Forward/backward state for one batch. Weights and gradients live in
// Eigen-owned storage so every reduction sees the same memory alignment.
class BatchEngine {
 public:
  explicit BatchEngine(const Network& net) : net_(net) {
    const auto& layers = net.layers();
    inputs_.resize(layers.size());
    outputs_.resize(layers.size());
    cols_.resize(layers.size());
    for (const auto& l : layers) {
      std::visit(
          [&](const auto& layer) {
            Eigen::Index rows = 0, cols = 0;
            const double* w = nullptr;
            if constexpr (std::is_same_v<std::decay_t<decltype(layer)>, DenseLayer>) {
              rows = static_cast<Eigen::Index>(layer.outputs);
              cols = static_cast<Eigen::Index>(layer.inputs);
              w = layer.weights.data();
            } else {
              rows = static_cast<Eigen::Index>(layer.out_channels);
              cols = static_cast<Eigen::Index>(layer.in_channels * layer.kernel_width);
              w = layer.filters.data();
            }
            weights_.emplace_back(ConstRowMap(w, rows, cols));
            bias_.emplace_back(ConstVecMap(layer.bias.data(), rows));
            grad_w_.push_back(RowMat::Zero(rows, cols));
            grad_b_.push_back(Eigen::VectorXd::Zero(rows));
          },
          l);
    }
  }

  // `x` holds `batch` consecutive rows of width input_shape().size().
  // Returns the network outputs (1 × batch).
  const Mat& forward(const double* x, std::size_t batch) {
    batch_ = batch;
    const auto& shape = net_.input_shape();
    const auto& layers = net_.layers();
    const bool conv_first = std::holds_alternative<Conv1dLayer>(layers.front());
    Mat current;
    if (conv_first) {
      const std::size_t c_n = shape.channels, len = shape.length;
      current.resize(static_cast<Eigen::Index>(c_n), static_cast<Eigen::Index>(len * batch));
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < c_n; ++c)
          for (std::size_t t = 0; t < len; ++t)
            current(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * len + t)) =
                x[b * shape.size() + c * len + t];
    } else {
      current = Eigen::Map<const Mat>(x, static_cast<Eigen::Index>(shape.size()),
                                      static_cast<Eigen::Index>(batch));
    }

    for (std::size_t i = 0; i < layers.size(); ++i) {
      Activation act = Activation::relu;
      if (const auto* conv = std::get_if<Conv1dLayer>(&layers[i])) {
        inputs_[i] = std::move(current);
        im2col(*conv, inputs_[i], cols_[i]);
        outputs_[i].noalias() = weights_[i] * cols_[i];
        act = conv->activation;
      } else {
        const auto& dense = std::get<DenseLayer>(layers[i]);
        if (i > 0 && std::holds_alternative<Conv1dLayer>(layers[i - 1])) {
          const auto& prev = std::get<Conv1dLayer>(layers[i - 1]);
          current = flatten(current, prev.out_channels, prev.output_length());
        }
        inputs_[i] = std::move(current);
        outputs_[i].noalias() = weights_[i] * inputs_[i];
        act = dense.activation;
      }
      outputs_[i].colwise() += bias_[i];
      if (act == Activation::relu) apply_relu(outputs_[i]);
      current = outputs_[i];
    }
    return outputs_.back();
  }

  void zero_grad() {
    for (auto& g : grad_w_) g.setZero();
    for (auto& g : grad_b_) g.setZero();
  }

  // Accumulates Σ_b delta_b ∂f_b/∂θ, where `delta` is 1 × batch.
  void backward(Mat delta) {
    const auto& layers = net_.layers();
    for (std::size_t ii = layers.size(); ii-- > 0;) {
      const auto* conv = std::get_if<Conv1dLayer>(&layers[ii]);
      const Activation act =
          conv ? conv->activation : std::get<DenseLayer>(layers[ii]).activation;
      if (act == Activation::relu) {
        delta = (outputs_[ii].array() > 0.0).select(delta, 0.0);
      }
      const Mat& in = conv ? cols_[ii] : inputs_[ii];
      grad_w_[ii].noalias() += delta * in.transpose();
      grad_b_[ii] += delta.rowwise().sum();
      if (ii == 0) break;
      Mat din;
      din.noalias() = weights_[ii].transpose() * delta;
      if (conv) {
        delta = col2im(*conv, din);
      } else if (const auto* prev = std::get_if<Conv1dLayer>(&layers[ii - 1])) {
        delta = unflatten(din, prev->out_channels, prev->output_length());
      } else {
        delta = std::move(din);
      }
    }
  }

  // Calls f(param, grad, n) for every parameter block in flat_parameters() order.
  template <typename F>
  void for_each_block(F&& f) {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      f(weights_[i].data(), grad_w_[i].data(), static_cast<std::size_t>(weights_[i].size()));
      f(bias_[i].data(), grad_b_[i].data(), static_cast<std::size_t>(bias_[i].size()));
    }
  }

  Vector flat_gradient() {
    Vector g;
    for_each_block([&](double*, const double* grad, std::size_t n) { g.insert(g.end(), grad, grad + n); });
    return g;
  }

  // Copies the engine's weights into `net` (same layout).
  void store(Network& net) {
    Vector p;
    for_each_block([&](double* param, const double*, std::size_t n) { p.insert(p.end(), param, param + n); });
    net.set_flat_parameters(p);
  }

 private:
  void im2col(const Conv1dLayer& conv, const Mat& in, Mat& cols) const {
    const std::size_t k_w = conv.kernel_width, l_in = conv.input_length,
                      l_out = conv.output_length();
    cols.resize(static_cast<Eigen::Index>(conv.in_channels * k_w),
                static_cast<Eigen::Index>(l_out * batch_));
    for (std::size_t b = 0; b < batch_; ++b)
      for (std::size_t t = 0; t < l_out; ++t) {
        const auto col = static_cast<Eigen::Index>(b * l_out + t);
        for (std::size_t c = 0; c < conv.in_channels; ++c)
          for (std::size_t k = 0; k < k_w; ++k)
            cols(static_cast<Eigen::Index>(c * k_w + k), col) =
                in(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * l_in + t + k));
      }
  }

  Mat col2im(const Conv1dLayer& conv, const Mat& dcols) const {
    const std::size_t k_w = conv.kernel_width, l_in = conv.input_length,
                      l_out = conv.output_length();
    Mat din = Mat::Zero(static_cast<Eigen::Index>(conv.in_channels),
                        static_cast<Eigen::Index>(l_in * batch_));
    for (std::size_t b = 0; b < batch_; ++b)
      for (std::size_t t = 0; t < l_out; ++t) {
        const auto col = static_cast<Eigen::Index>(b * l_out + t);
        for (std::size_t c = 0; c < conv.in_channels; ++c)
          for (std::size_t k = 0; k < k_w; ++k)
            din(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * l_in + t + k)) +=
                dcols(static_cast<Eigen::Index>(c * k_w + k), col);
      }
    return din;
  }

  // (C, L·B) → (C·L, B), feature index c·L + t.
  Mat flatten(const Mat& m, std::size_t channels, std::size_t len) const {
    Mat out(static_cast<Eigen::Index>(channels * len), static_cast<Eigen::Index>(batch_));
    for (std::size_t b = 0; b < batch_; ++b)
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t t = 0; t < len; ++t)
          out(static_cast<Eigen::Index>(c * len + t), static_cast<Eigen::Index>(b)) =
              m(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * len + t));
    return out;
  }

  Mat unflatten(const Mat& m, std::size_t channels, std::size_t len) const {
    Mat out(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(len * batch_));
    for (std::size_t b = 0; b < batch_; ++b)
      for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t t = 0; t < len; ++t)
          out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(b * len + t)) =
              m(static_cast<Eigen::Index>(c * len + t), static_cast<Eigen::Index>(b));
    return out;
  }

  const Network& net_;
  std::size_t batch_ = 0;
  std::vector<RowMat> weights_;
  std::vector<Eigen::VectorXd> bias_;
  std::vector<RowMat> grad_w_;
  std::vector<Eigen::VectorXd> grad_b_;
  std::vector<Mat> inputs_;
  std::vector<Mat> outputs_;
  std::vector<Mat> cols_;
};

std::vector<std::span<double>> parameter_blocks(Network& net) {
  std::vector<std::span<double>> blocks;
  for (auto& l : net.layers()) {
    std::visit(
        [&](auto& layer) {
          if constexpr (std::is_same_v<std::decay_t<decltype(layer)>, DenseLayer>) {
            blocks.emplace_back(layer.weights);
          } else {
            blocks.emplace_back(layer.filters);
          }
          blocks.emplace_back(layer.bias);
        },
        l);
  }
  return blocks;
}

void check_input(const Network& net, std::size_t width) {
  if (net.layers().empty()) throw InvalidArgument("network has no layers");
  if (width != net.input_shape().size()) {
    throw InvalidArgument("network input has " + std::to_string(width) + " values, expected " +
                          std::to_string(net.input_shape().size()));
  }
}

}  // namespace

Network::Network(InputShape input, std::vector<Layer> layers)
    : input_(input), layers_(std::move(layers)) {
  if (input_.size() == 0) throw InvalidArgument("network: empty input shape");
  if (layers_.empty()) throw InvalidArgument("network: no layers");
  std::size_t channels = input_.channels;
  std::size_t length = input_.length;
  bool seen_dense = false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string where = "network layer " + std::to_string(i) + ": ";
    if (auto* conv = std::get_if<Conv1dLayer>(&layers_[i])) {
      if (seen_dense) throw InvalidArgument(where + "convolution after a dense layer");
      if (conv->kernel_width % 2 == 0) throw InvalidArgument(where + "kernel width must be odd");
      if (conv->in_channels != channels || conv->input_length != length) {
        throw InvalidArgument(where + "convolution input shape does not match");
      }
      if (conv->kernel_width > length) {
        throw InvalidArgument(where + "kernel wider than its input");
      }
      if (conv->filters.size() != conv->out_channels * conv->in_channels * conv->kernel_width ||
          conv->bias.size() != conv->out_channels) {
        throw InvalidArgument(where + "parameter count mismatch");
      }
      if (conv->activation != Activation::relu) {
        throw InvalidArgument(where + "convolutions use ReLU");
      }
      channels = conv->out_channels;
      length = conv->output_length();
    } else {
      auto& dense = std::get<DenseLayer>(layers_[i]);
      const std::size_t expected = seen_dense ? length : channels * length;
      if (dense.inputs != expected) throw InvalidArgument(where + "dense input width does not match");
      if (dense.weights.size() != dense.inputs * dense.outputs || dense.bias.size() != dense.outputs) {
        throw InvalidArgument(where + "parameter count mismatch");
      }
      seen_dense = true;
      channels = 1;
      length = dense.outputs;
    }
  }
  const auto* last = std::get_if<DenseLayer>(&layers_.back());
  if (!last || last->outputs != 1 || last->activation != Activation::identity) {
    throw InvalidArgument("network: last layer must be a dense layer with one identity output");
  }
  for (double v : flat_parameters()) {
    if (!std::isfinite(v)) throw InvalidArgument("network: non-finite parameter");
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += weight_count(l) + bias_count(l);
  return n;
}

Vector Network::flat_parameters() const {
  Vector out;
  out.reserve(parameter_count());
  for (auto block : parameter_blocks(const_cast<Network&>(*this))) {
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

void Network::set_flat_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw InvalidArgument("network: parameter count mismatch");
  std::size_t pos = 0;
  for (auto block : parameter_blocks(*this)) {
    std::copy(params.begin() + static_cast<std::ptrdiff_t>(pos),
              params.begin() + static_cast<std::ptrdiff_t>(pos + block.size()), block.begin());
    pos += block.size();
  }
}

void initialize_he_uniform(Network& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& l : net.layers()) {
    std::visit(
        [&](auto& layer) {
          std::size_t fan_in = 0;
          Vector* w = nullptr;
          if constexpr (std::is_same_v<std::decay_t<decltype(layer)>, DenseLayer>) {
            fan_in = layer.inputs;
            w = &layer.weights;
          } else {
            fan_in = layer.in_channels * layer.kernel_width;
            w = &layer.filters;
          }
          const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
          std::uniform_real_distribution<double> u(-limit, limit);
          for (double& v : *w) v = u(rng);
          std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
        },
        l);
  }
}

namespace {

DenseLayer make_dense(std::size_t in, std::size_t out, Activation act) {
  return {in, out, act, Vector(in * out, 0.0), Vector(out, 0.0)};
}

Conv1dLayer make_conv(std::size_t in_ch, std::size_t out_ch, std::size_t len) {
  return {in_ch, out_ch, 3, len, Activation::relu, Vector(out_ch * in_ch * 3, 0.0),
          Vector(out_ch, 0.0)};
}

}  // namespace

Network build_mlp(int window_hours, std::uint64_t seed) {
  if (window_hours < 1) throw InvalidArgument("build_mlp: window must be >= 1");
  const auto in = static_cast<std::size_t>(2 * window_hours);
  std::vector<Layer> layers;
  layers.push_back(make_dense(in, 100, Activation::relu));
  for (int i = 0; i < 6; ++i) layers.push_back(make_dense(100, 100, Activation::relu));
  layers.push_back(make_dense(100, 1, Activation::identity));
  Network net({1, in}, std::move(layers));
  initialize_he_uniform(net, seed);
  return net;
}

Network build_cnn(int window_hours, std::uint64_t seed) {
  if (window_hours < 7) {
    throw InvalidArgument("build_cnn: window of " + std::to_string(window_hours) +
                          " h is too short for three width-3 valid convolutions (need >= 7)");
  }
  auto len = static_cast<std::size_t>(window_hours);
  std::vector<Layer> layers;
  std::size_t ch = 2;
  for (int i = 0; i < 3; ++i) {
    layers.push_back(make_conv(ch, 128, len));
    ch = 128;
    len -= 2;
  }
  layers.push_back(make_dense(ch * len, 40, Activation::relu));
  layers.push_back(make_dense(40, 20, Activation::relu));
  layers.push_back(make_dense(20, 1, Activation::identity));
  Network net({2, static_cast<std::size_t>(window_hours)}, std::move(layers));
  initialize_he_uniform(net, seed);
  return net;
}

namespace {

// Inference always runs full chunks so a row's output does not depend on
// which other rows share its batch.
constexpr std::size_t kInferenceChunk = 256;

Vector forward_rows(const Network& net, const double* x, std::size_t rows) {
  const std::size_t width = net.input_shape().size();
  Vector out(rows);
  BatchEngine engine(net);
  std::vector<double> buf(kInferenceChunk * width, 0.0);
  for (std::size_t start = 0; start < rows; start += kInferenceChunk) {
    const std::size_t b = std::min(kInferenceChunk, rows - start);
    std::copy(x + start * width, x + (start + b) * width, buf.begin());
    std::fill(buf.begin() + static_cast<std::ptrdiff_t>(b * width), buf.end(), 0.0);
    const Mat& y = engine.forward(buf.data(), kInferenceChunk);
    for (std::size_t i = 0; i < b; ++i) out[start + i] = y(0, static_cast<Eigen::Index>(i));
  }
  return out;
}

}  // namespace

double forward(const Network& net, std::span<const double> x) {
  check_input(net, x.size());
  return forward_rows(net, x.data(), 1)[0];
}

Vector forward_batch(const Network& net, const Matrix& x) {
  check_input(net, x.cols());
  if (x.rows() == 0) return {};
  return forward_rows(net, x.row(0).data(), x.rows());
}

Vector backward(const Network& net, std::span<const double> x, double y_true) {
  check_input(net, x.size());
  BatchEngine engine(net);
  const double f = engine.forward(x.data(), 1)(0, 0);
  Mat delta(1, 1);
  delta(0, 0) = f - y_true;
  engine.backward(std::move(delta));
  return engine.flat_gradient();
}

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidArgument("train: epochs must be non-negative");
  if (batch_size == 0) throw InvalidArgument("train: batch_size must be positive");
  if (!(learning_rate >= 0.0 && learning_rate < 1.0)) {
    throw InvalidArgument("train: learning_rate must lie in [0, 1)");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    throw InvalidArgument("train: invalid Adam parameters");
  }
}

TrainConfig TrainConfig::from_options(const ModelOptions& options, std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  detail::OptionReader r(options, "network");
  r.read("epochs", c.epochs);
  r.read("batch_size", c.batch_size);
  r.read("learning_rate", c.learning_rate);
  std::string opt = "adam";
  r.read("optimizer", opt);
  if (opt == "adam") c.optimizer = OptimizerKind::adam;
  else if (opt == "sgd") c.optimizer = OptimizerKind::sgd;
  else throw InvalidArgument("network: unknown optimizer '" + opt + "'");
  r.read("beta1", c.beta1);
  r.read("beta2", c.beta2);
  r.read("epsilon", c.epsilon);
  r.read("shuffle", c.shuffle);
  r.read("max_train_samples", c.max_train_samples);
  r.read("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

TrainHistory train(Network& net, const Matrix& x, std::span<const double> y,
                   const TrainConfig& config) {
  config.validate();
  const std::size_t n = x.rows();
  if (n == 0 || y.size() != n) throw InvalidArgument("train: empty or mismatched dataset");
  check_input(net, x.cols());

  const std::size_t width = x.cols();
  const std::size_t n_params = net.parameter_count();

  std::mt19937_64 rng(config.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  Vector m1(n_params, 0.0), m2(n_params, 0.0);
  Vector sq_err(n);
  std::vector<double> xb;
  std::uint64_t step = 0;
  BatchEngine engine(net);
  TrainHistory history;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t b = std::min(config.batch_size, n - start);
      xb.resize(b * width);
      for (std::size_t i = 0; i < b; ++i) {
        auto row = x.row(order[start + i]);
        std::copy(row.begin(), row.end(), xb.begin() + static_cast<std::ptrdiff_t>(i * width));
      }
      const Mat& f = engine.forward(xb.data(), b);
      Mat delta(1, static_cast<Eigen::Index>(b));
      for (std::size_t i = 0; i < b; ++i) {
        const double r = f(0, static_cast<Eigen::Index>(i)) - y[order[start + i]];
        sq_err[order[start + i]] = r * r;
        delta(0, static_cast<Eigen::Index>(i)) = r / static_cast<double>(b);
      }
      engine.zero_grad();
      engine.backward(std::move(delta));

      ++step;
      std::size_t pos = 0;
      if (config.optimizer == OptimizerKind::adam) {
        const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
        engine.for_each_block([&](double* p, const double* g, std::size_t len) {
          for (std::size_t j = 0; j < len; ++j, ++pos) {
            m1[pos] = config.beta1 * m1[pos] + (1.0 - config.beta1) * g[j];
            m2[pos] = config.beta2 * m2[pos] + (1.0 - config.beta2) * g[j] * g[j];
            p[j] -= config.learning_rate * (m1[pos] / c1) / (std::sqrt(m2[pos] / c2) + config.epsilon);
          }
        });
      } else {
        engine.for_each_block([&](double* p, const double* g, std::size_t len) {
          for (std::size_t j = 0; j < len; ++j) p[j] -= config.learning_rate * g[j];
        });
      }
    }
    const double mse = std::accumulate(sq_err.begin(), sq_err.end(), 0.0) / static_cast<double>(n);
    if (!std::isfinite(mse)) {
      throw NumericalError("train: loss diverged at epoch " + std::to_string(epoch + 1));
    }
    history.epoch_mse.push_back(mse);
  }
  engine.store(net);
  return history;
}

NetworkRegressor::NetworkRegressor(Architecture arch, TrainConfig config)
    : arch_(arch), config_(config) {
  config_.validate();
}

void NetworkRegressor::fit(const Dataset& train) {
  norm_ = train.norm;
  net_ = arch_ == Architecture::mlp ? build_mlp(train.window_hours, config_.seed)
                                    : build_cnn(train.window_hours, config_.seed);
  const auto idx = even_subsample(train.size(), config_.max_train_samples);
  const Dataset part = train.subset(idx);
  const Matrix xn = normalize_features(part.x, norm_);
  const Vector yn = normalize_target(part.y, norm_);
  history_ = hydro::train(net_, xn, yn, config_);
  mark_fitted();
}

Vector NetworkRegressor::predict(const Matrix& x) const {
  require_fitted();
  const Matrix xn = normalize_features(x, norm_);
  return denormalize_target(forward_batch(net_, xn), norm_);
}

HyperParams NetworkRegressor::hyperparams() const {
  auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  return {{"architecture", arch_ == Architecture::mlp ? "7x dense(100) + dense(1)"
                                                      : "3x conv(128,k3) + dense(40,20,1)"},
          {"epochs", std::to_string(config_.epochs)},
          {"batch_size", std::to_string(config_.batch_size)},
          {"learning_rate", num(config_.learning_rate)},
          {"optimizer", config_.optimizer == OptimizerKind::adam ? "adam" : "sgd"},
          {"max_train_samples", std::to_string(config_.max_train_samples)},
          {"seed", std::to_string(config_.seed)}};
}

std::string NetworkRegressor::serialize() const {
  require_fitted();
  auto doc = detail::header(*this);
  doc["norm"] = detail::to_json(norm_);
  doc["input"] = {{"channels", net_.input_shape().channels}, {"length", net_.input_shape().length}};
  auto layers = detail::json::array();
  for (const auto& l : net_.layers()) {
    if (const auto* d = std::get_if<DenseLayer>(&l)) {
      layers.push_back({{"type", "dense"},
                        {"inputs", d->inputs},
                        {"outputs", d->outputs},
                        {"activation", d->activation == Activation::relu ? "relu" : "identity"}});
    } else {
      const auto& c = std::get<Conv1dLayer>(l);
      layers.push_back({{"type", "conv1d"},
                        {"in_channels", c.in_channels},
                        {"out_channels", c.out_channels},
                        {"kernel_width", c.kernel_width},
                        {"input_length", c.input_length}});
    }
  }
  doc["layers"] = std::move(layers);
  doc["parameters"] = net_.flat_parameters();
  doc["epoch_mse"] = history_.epoch_mse;
  return doc.dump();
}

std::unique_ptr<NetworkRegressor> NetworkRegressor::from_json_text(std::string_view text) {
  detail::json probe;
  try {
    probe = detail::json::parse(text);
  } catch (const detail::json::exception& e) {
    throw InvalidArgument(std::string("model file is not valid JSON: ") + e.what());
  }
  const std::string family = probe.value("family", "");
  const auto doc = detail::parse_document(text, family == "cnn" ? "cnn" : "mlp");
  return detail::read_document(family, [&] {
    const auto& hp = doc.at("hyperparams");
    TrainConfig c;
    c.epochs = std::stoi(hp.at("epochs").get<std::string>());
    c.batch_size = std::stoul(hp.at("batch_size").get<std::string>());
    c.learning_rate = std::stod(hp.at("learning_rate").get<std::string>());
    c.optimizer = hp.at("optimizer").get<std::string>() == "sgd" ? OptimizerKind::sgd
                                                                  : OptimizerKind::adam;
    c.max_train_samples = std::stoul(hp.at("max_train_samples").get<std::string>());
    c.seed = std::stoull(hp.at("seed").get<std::string>());
    auto m = std::make_unique<NetworkRegressor>(
        family == "cnn" ? Architecture::cnn : Architecture::mlp, c);
    m->norm_ = detail::norm_from_json(doc.at("norm"));
    std::vector<Layer> layers;
    for (const auto& jl : doc.at("layers")) {
      if (jl.at("type") == "dense") {
        layers.push_back(make_dense(jl.at("inputs").get<std::size_t>(),
                                    jl.at("outputs").get<std::size_t>(),
                                    jl.at("activation") == "relu" ? Activation::relu
                                                                  : Activation::identity));
      } else {
        Conv1dLayer conv = make_conv(jl.at("in_channels").get<std::size_t>(),
                                     jl.at("out_channels").get<std::size_t>(),
                                     jl.at("input_length").get<std::size_t>());
        conv.kernel_width = jl.at("kernel_width").get<std::size_t>();
        conv.filters.assign(conv.out_channels * conv.in_channels * conv.kernel_width, 0.0);
        layers.push_back(std::move(conv));
      }
    }
    InputShape input{doc.at("input").at("channels").get<std::size_t>(),
                     doc.at("input").at("length").get<std::size_t>()};
    m->net_ = Network(input, std::move(layers));
    m->net_.set_flat_parameters(doc.at("parameters").get<Vector>());
    m->history_.epoch_mse = doc.at("epoch_mse").get<Vector>();
    m->mark_fitted();
    return m;
  });
}

}  // namespace hydro
