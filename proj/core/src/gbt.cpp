#include "hydro/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hydro/error.hpp"
#include "json_io.hpp"
#include "options.hpp"

namespace hydro {

RegressionTree::RegressionTree(std::vector<Node> nodes, int max_depth)
    : nodes_(std::move(nodes)), max_depth_(max_depth) {
  if (nodes_.empty()) throw InvalidArgument("regression tree: no nodes");
  for (const auto& n : nodes_) {
    if (!std::isfinite(n.value)) throw InvalidArgument("regression tree: non-finite leaf value");
    if (!n.is_leaf()) {
      const auto sz = static_cast<std::int32_t>(nodes_.size());
      if (n.right < 0 || n.left >= sz || n.right >= sz || n.feature < 0) {
        throw InvalidArgument("regression tree: dangling child index");
      }
    }
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const Node& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return nodes_[i].value;
}

int RegressionTree::depth() const {
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
    }
  }
  return deepest;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

SortedColumns::SortedColumns(const Matrix& x) : n_(x.rows()), orders_(x.rows() * x.cols()) {
  std::vector<std::uint32_t> idx(n_);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::iota(idx.begin(), idx.end(), 0u);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    std::copy(idx.begin(), idx.end(), orders_.begin() + static_cast<std::ptrdiff_t>(f * n_));
  }
}

RegressionTree fit_tree(const Matrix& x, std::span<const double> residuals, int max_depth,
                        int min_leaf) {
  return fit_tree(x, SortedColumns(x), residuals, max_depth, min_leaf);
}

RegressionTree fit_tree(const Matrix& x, const SortedColumns& sorted,
                        std::span<const double> residuals, int max_depth, int min_leaf) {
  const std::size_t n = x.rows();
  const std::size_t n_features = x.cols();
  if (residuals.size() != n) throw InvalidArgument("fit_tree: residual count mismatch");
  if (max_depth < 0) throw InvalidArgument("fit_tree: negative max_depth");
  if (min_leaf < 1) throw InvalidArgument("fit_tree: min_leaf must be >= 1");
  if (n < 2 * static_cast<std::size_t>(min_leaf)) {
    throw InvalidArgument("fit_tree: fewer than 2 * min_leaf rows");
  }
  const auto min_leaf_n = static_cast<std::size_t>(min_leaf);

  using Node = RegressionTree::Node;
  struct Stats {
    std::size_t count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  std::vector<Node> nodes(1);
  std::vector<Stats> stats(1);
  std::vector<std::int32_t> node_of(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    stats[0].count++;
    stats[0].sum += residuals[r];
    stats[0].sum_sq += residuals[r] * residuals[r];
  }
  nodes[0].value = stats[0].sum / static_cast<double>(n);

  std::vector<std::int32_t> frontier{0};
  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    // slot_of[node] = index into the per-level scan state, or -1.
    std::vector<std::int32_t> slot_of(nodes.size(), -1);
    std::vector<std::int32_t> active;
    for (std::int32_t id : frontier) {
      if (stats[static_cast<std::size_t>(id)].count >= 2 * min_leaf_n) {
        slot_of[static_cast<std::size_t>(id)] = static_cast<std::int32_t>(active.size());
        active.push_back(id);
      }
    }
    if (active.empty()) break;

    struct Best {
      double gain = 0.0;
      std::int32_t feature = -1;
      double threshold = 0.0;
    };
    struct Scan {
      std::size_t left_count = 0;
      double left_sum = 0.0;
      double last_value = 0.0;
    };
    std::vector<Best> best(active.size());
    std::vector<Scan> scan(active.size());

    for (std::size_t f = 0; f < n_features; ++f) {
      std::fill(scan.begin(), scan.end(), Scan{});
      for (std::uint32_t r : sorted.order(f)) {
        const std::int32_t slot = node_of[r] >= 0 ? slot_of[static_cast<std::size_t>(node_of[r])] : -1;
        if (slot < 0) continue;
        auto& s = scan[static_cast<std::size_t>(slot)];
        const Stats& total = stats[static_cast<std::size_t>(active[static_cast<std::size_t>(slot)])];
        const double v = x(r, f);
        if (s.left_count >= min_leaf_n && total.count - s.left_count >= min_leaf_n &&
            v > s.last_value) {
          const auto nl = static_cast<double>(s.left_count);
          const auto nr = static_cast<double>(total.count - s.left_count);
          const double right_sum = total.sum - s.left_sum;
          const double gain = s.left_sum * s.left_sum / nl + right_sum * right_sum / nr -
                              total.sum * total.sum / static_cast<double>(total.count);
          auto& b = best[static_cast<std::size_t>(slot)];
          if (gain > b.gain) {
            double thr = s.last_value + 0.5 * (v - s.last_value);
            if (!(thr < v)) thr = s.last_value;
            b = {gain, static_cast<std::int32_t>(f), thr};
          }
        }
        s.left_count++;
        s.left_sum += residuals[r];
        s.last_value = v;
      }
    }

    std::vector<std::int32_t> next;
    std::vector<std::int32_t> left_of(nodes.size(), -1);
    for (std::size_t slot = 0; slot < active.size(); ++slot) {
      const std::int32_t id = active[slot];
      const auto& b = best[slot];
      const Stats& total = stats[static_cast<std::size_t>(id)];
      // Rounding noise can produce a tiny positive gain on constant residuals.
      if (b.feature < 0 || !(b.gain > 1e-12 * std::max(total.sum_sq, 1e-300))) continue;
      const auto left = static_cast<std::int32_t>(nodes.size());
      nodes.push_back({});
      nodes.push_back({});
      stats.push_back({});
      stats.push_back({});
      Node& parent = nodes[static_cast<std::size_t>(id)];
      parent.feature = b.feature;
      parent.threshold = b.threshold;
      parent.left = left;
      parent.right = left + 1;
      left_of[static_cast<std::size_t>(id)] = left;
      next.push_back(left);
      next.push_back(left + 1);
    }
    left_of.resize(nodes.size(), -1);
    for (std::size_t r = 0; r < n; ++r) {
      const std::int32_t id = node_of[r];
      if (id < 0) continue;
      const std::int32_t left = left_of[static_cast<std::size_t>(id)];
      if (left < 0) {
        node_of[r] = -1;  // settled in a leaf
        continue;
      }
      const Node& parent = nodes[static_cast<std::size_t>(id)];
      const std::int32_t child =
          x(r, static_cast<std::size_t>(parent.feature)) <= parent.threshold ? left : left + 1;
      node_of[r] = child;
      auto& st = stats[static_cast<std::size_t>(child)];
      st.count++;
      st.sum += residuals[r];
      st.sum_sq += residuals[r] * residuals[r];
    }
    for (std::int32_t id : next) {
      const auto& st = stats[static_cast<std::size_t>(id)];
      nodes[static_cast<std::size_t>(id)].value = st.sum / static_cast<double>(st.count);
    }
    frontier = std::move(next);
  }
  return RegressionTree(std::move(nodes), max_depth);
}

void GbtConfig::validate() const {
  if (n_stages < 0) throw InvalidArgument("gbt: n_stages must be non-negative");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw InvalidArgument("gbt: learning_rate must lie in (0, 1]");
  }
  if (max_depth < 0) throw InvalidArgument("gbt: max_depth must be non-negative");
  if (min_leaf < 1) throw InvalidArgument("gbt: min_leaf must be >= 1");
}

GbtConfig GbtConfig::from_options(const ModelOptions& options) {
  GbtConfig c;
  detail::OptionReader r(options, "gbt");
  r.read("n_stages", c.n_stages);
  r.read("learning_rate", c.learning_rate);
  r.read("max_depth", c.max_depth);
  r.read("min_leaf", c.min_leaf);
  r.read("max_train_samples", c.max_train_samples);
  r.finish();
  c.validate();
  return c;
}

double GbtEnsemble::predict(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& t : trees) s += t.predict(x);
  return init_value + learning_rate * s;
}

GbtEnsemble fit_gbt(const Matrix& x, std::span<const double> y, const GbtConfig& config) {
  config.validate();
  const std::size_t n = x.rows();
  if (n == 0 || y.size() != n) throw InvalidArgument("fit_gbt: empty or mismatched data");
  GbtEnsemble e;
  e.learning_rate = config.learning_rate;
  e.init_value = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

  Vector pred(n, e.init_value);
  Vector residual(n);
  auto mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = y[i] - pred[i];
      s += residual[i] * residual[i];
    }
    return s / static_cast<double>(n);
  };
  e.train_mse.push_back(mse());
  if (config.n_stages == 0) return e;

  const SortedColumns sorted(x);
  for (int stage = 0; stage < config.n_stages; ++stage) {
    RegressionTree tree = fit_tree(x, sorted, residual, config.max_depth, config.min_leaf);
    for (std::size_t i = 0; i < n; ++i) pred[i] += config.learning_rate * tree.predict(x.row(i));
    e.trees.push_back(std::move(tree));
    e.train_mse.push_back(mse());
  }
  return e;
}

void GbtRegressor::fit(const Dataset& train) {
  norm_ = train.norm;
  const auto idx = even_subsample(train.size(), config_.max_train_samples);
  const Dataset part = train.subset(idx);
  const Matrix xn = normalize_features(part.x, norm_);
  ensemble_ = fit_gbt(xn, part.y, config_);
  mark_fitted();
}

Vector GbtRegressor::predict(const Matrix& x) const {
  require_fitted();
  const Matrix xn = normalize_features(x, norm_);
  Vector out(xn.rows());
  for (std::size_t r = 0; r < xn.rows(); ++r) out[r] = ensemble_.predict(xn.row(r));
  return out;
}

HyperParams GbtRegressor::hyperparams() const {
  std::ostringstream lr;
  lr << config_.learning_rate;
  return {{"n_stages", std::to_string(config_.n_stages)},
          {"learning_rate", lr.str()},
          {"max_depth", std::to_string(config_.max_depth)},
          {"min_leaf", std::to_string(config_.min_leaf)},
          {"max_train_samples", std::to_string(config_.max_train_samples)}};
}

std::string GbtRegressor::serialize() const {
  require_fitted();
  auto doc = detail::header(*this);
  doc["norm"] = detail::to_json(norm_);
  doc["init_value"] = ensemble_.init_value;
  doc["learning_rate"] = ensemble_.learning_rate;
  doc["max_depth"] = config_.max_depth;
  doc["min_leaf"] = config_.min_leaf;
  doc["max_train_samples"] = config_.max_train_samples;
  doc["train_mse"] = ensemble_.train_mse;
  auto trees = detail::json::array();
  for (const auto& t : ensemble_.trees) {
    auto nodes = detail::json::array();
    for (const auto& nd : t.nodes()) {
      nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value});
    }
    trees.push_back(std::move(nodes));
  }
  doc["trees"] = std::move(trees);
  return doc.dump();
}

std::unique_ptr<GbtRegressor> GbtRegressor::from_json_text(std::string_view text) {
  const auto doc = detail::parse_document(text, "gbt");
  return detail::read_document("gbt", [&] {
    GbtConfig c;
    c.learning_rate = doc.at("learning_rate").get<double>();
    c.max_depth = doc.at("max_depth").get<int>();
    c.min_leaf = doc.at("min_leaf").get<int>();
    c.max_train_samples = doc.at("max_train_samples").get<std::size_t>();
    c.n_stages = static_cast<int>(doc.at("trees").size());
    auto m = std::make_unique<GbtRegressor>(c);
    m->norm_ = detail::norm_from_json(doc.at("norm"));
    m->ensemble_.init_value = doc.at("init_value").get<double>();
    m->ensemble_.learning_rate = c.learning_rate;
    m->ensemble_.train_mse = doc.at("train_mse").get<Vector>();
    for (const auto& jt : doc.at("trees")) {
      std::vector<RegressionTree::Node> nodes;
      for (const auto& jn : jt) {
        nodes.push_back({jn.at(0).get<std::int32_t>(), jn.at(1).get<double>(),
                         jn.at(2).get<std::int32_t>(), jn.at(3).get<std::int32_t>(),
                         jn.at(4).get<double>()});
      }
      m->ensemble_.trees.emplace_back(std::move(nodes), c.max_depth);
    }
    m->mark_fitted();
    return m;
  });
}

}  // namespace hydro
