#include "hydro/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hydro/error.hpp"
#include "json_io.hpp"
#include "options.hpp"

namespace hydro {

namespace {
const double kSqrt3 = std::sqrt(3.0);
}

double GprHyperparams::signal_variance() const { return std::exp(2.0 * log_signal_std); }
double GprHyperparams::nugget_variance() const { return std::exp(2.0 * log_nugget_std); }

Vector GprHyperparams::pack() const {
  Vector p = log_length_scales;
  p.push_back(log_signal_std);
  p.push_back(log_nugget_std);
  return p;
}

GprHyperparams GprHyperparams::unpack(std::span<const double> packed) {
  if (packed.size() < 3) throw InvalidArgument("gpr: packed hyperparameters too short");
  GprHyperparams h;
  h.log_length_scales.assign(packed.begin(), packed.end() - 2);
  h.log_signal_std = packed[packed.size() - 2];
  h.log_nugget_std = packed[packed.size() - 1];
  return h;
}

Bounds GprBounds::packed(std::size_t dim) const {
  Bounds b;
  b.low.assign(dim, log_length_low);
  b.high.assign(dim, log_length_high);
  b.low.push_back(log_signal_low);
  b.high.push_back(log_signal_high);
  b.low.push_back(log_nugget_low);
  b.high.push_back(log_nugget_high);
  return b;
}

namespace {

// Kernel evaluation with precomputed inverse length scales.
struct Matern32 {
  Vector inv_l;
  double s2;

  explicit Matern32(const GprHyperparams& h) : inv_l(h.dim()), s2(h.signal_variance()) {
    for (std::size_t i = 0; i < h.dim(); ++i) inv_l[i] = std::exp(-h.log_length_scales[i]);
  }

  double operator()(std::span<const double> a, std::span<const double> b) const {
    double r2 = 0.0;
    for (std::size_t i = 0; i < inv_l.size(); ++i) {
      const double d = (a[i] - b[i]) * inv_l[i];
      r2 += d * d;
    }
    const double sr = kSqrt3 * std::sqrt(r2);
    return s2 * (1.0 + sr) * std::exp(-sr);
  }
};

Matrix noisy_kernel(const Matrix& z, const GprHyperparams& hyper) {
  const Matern32 k(hyper);
  const std::size_t n = z.rows();
  const double nugget = hyper.nugget_variance();
  Matrix kmat(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    kmat(i, i) = k.s2 + nugget;
    for (std::size_t j = 0; j < i; ++j) {
      const double v = k(z.row(i), z.row(j));
      kmat(i, j) = v;
      kmat(j, i) = v;
    }
  }
  return kmat;
}

}  // namespace

double matern32(std::span<const double> z, std::span<const double> z2, const GprHyperparams& hyper) {
  if (z.size() != z2.size() || z.size() != hyper.dim()) {
    throw InvalidArgument("matern32: dimension mismatch");
  }
  return Matern32(hyper)(z, z2);
}

Matrix kernel_matrix(const Matrix& z, const GprHyperparams& hyper) {
  if (z.cols() != hyper.dim()) throw InvalidArgument("kernel_matrix: dimension mismatch");
  GprHyperparams no_nugget = hyper;
  no_nugget.log_nugget_std = -std::numeric_limits<double>::infinity();
  return noisy_kernel(z, no_nugget);
}

double log_marginal_likelihood(const GprHyperparams& hyper, const Matrix& z,
                               std::span<const double> y_centered) {
  if (z.rows() != y_centered.size() || z.rows() == 0) {
    throw InvalidArgument("log_marginal_likelihood: size mismatch");
  }
  if (z.cols() != hyper.dim()) throw InvalidArgument("log_marginal_likelihood: dimension mismatch");
  const auto n = static_cast<double>(z.rows());
  try {
    const CholeskyFactor chol(noisy_kernel(z, hyper));
    const Vector w = chol.solve_lower(y_centered);
    return -0.5 * dot(w, w) - 0.5 * chol.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
  } catch (const NotPositiveDefinite&) {
    return -std::numeric_limits<double>::infinity();
  }
}

GaussianProcess GaussianProcess::condition(Matrix z, Vector y, const GprHyperparams& hyper) {
  if (z.rows() != y.size() || z.rows() == 0) throw InvalidArgument("gpr: size mismatch");
  if (z.cols() != hyper.dim()) throw InvalidArgument("gpr: hyperparameter dimension mismatch");
  GaussianProcess gp;
  gp.hyper_ = hyper;
  double mean = 0.0;
  for (double v : y) mean += v;
  gp.y_mean_ = mean / static_cast<double>(y.size());
  Vector centered(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) centered[i] = y[i] - gp.y_mean_;
  gp.chol_ = std::make_shared<const CholeskyFactor>(noisy_kernel(z, hyper));
  gp.alpha_ = gp.chol_->solve(centered);
  gp.z_ = std::move(z);
  gp.y_ = std::move(y);
  return gp;
}

GaussianProcess GaussianProcess::restore(Matrix z, Vector y, const GprHyperparams& hyper) {
  return condition(std::move(z), std::move(y), hyper);
}

GprHyperparams GaussianProcess::default_start(const Matrix& z, std::span<const double> y,
                                              const GprBounds& bounds) {
  const std::size_t n = z.rows();
  GprHyperparams h;
  for (std::size_t c = 0; c < z.cols(); ++c) {
    double m = 0.0, v = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += z(r, c);
    m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) v += (z(r, c) - m) * (z(r, c) - m);
    const double sd = std::sqrt(v / static_cast<double>(n));
    h.log_length_scales.push_back(
        std::clamp(std::log(std::max(sd, 1e-12)), bounds.log_length_low, bounds.log_length_high));
  }
  double m = 0.0, v = 0.0;
  for (double yi : y) m += yi;
  m /= static_cast<double>(n);
  for (double yi : y) v += (yi - m) * (yi - m);
  const double sd = std::max(std::sqrt(v / static_cast<double>(n)), 1e-12);
  h.log_signal_std = std::clamp(std::log(sd), bounds.log_signal_low, bounds.log_signal_high);
  h.log_nugget_std = std::clamp(std::log(0.1 * sd), bounds.log_nugget_low, bounds.log_nugget_high);
  return h;
}

GaussianProcess GaussianProcess::fit(Matrix z, Vector y, const GprSearchOptions& opts,
                                     std::optional<GprHyperparams> start, GprFitTrace* trace) {
  if (z.rows() < 3) throw InvalidArgument("gpr: need at least 3 training samples");
  if (z.rows() != y.size()) throw InvalidArgument("gpr: size mismatch");
  const std::size_t dim = z.cols();
  const GprHyperparams h0 = start ? *start : default_start(z, y, opts.bounds);
  if (h0.dim() != dim) throw InvalidArgument("gpr: starting point dimension mismatch");

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  Vector centered(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) centered[i] = y[i] - mean;

  const Objective neg_lml = [&](std::span<const double> p) {
    const double l = log_marginal_likelihood(GprHyperparams::unpack(p), z, centered);
    return std::isfinite(l) ? -l : std::numeric_limits<double>::infinity();
  };

  BasinHoppingOptions bh;
  bh.n_hops = opts.n_hops;
  bh.step_scale = opts.step_scale;
  bh.temperature = opts.temperature;
  bh.seed = opts.seed;
  bh.bounds = opts.bounds.packed(dim);
  bh.local.max_iter = opts.local_max_iter;
  bh.local.x_tol = 1e-4;
  bh.local.f_tol = 1e-6;

  Vector p0 = h0.pack();
  for (std::size_t i = 0; i < p0.size(); ++i) {
    p0[i] = std::clamp(p0[i], bh.bounds->low[i], bh.bounds->high[i]);
  }
  double f0 = neg_lml(p0);
  // Raise the nugget until the starting point factorizes.
  while (!std::isfinite(f0) && p0.back() < bh.bounds->high.back()) {
    p0.back() = std::min(p0.back() + 1.0, bh.bounds->high.back());
    f0 = neg_lml(p0);
  }
  if (!std::isfinite(f0)) {
    throw NumericalError("gpr: no positive-definite starting point inside the bounds");
  }

  std::vector<double> history;
  const OptResult best = basin_hopping(neg_lml, p0, bh, &history);
  if (trace) {
    trace->initial_log_likelihood = -f0;
    trace->final_log_likelihood = -best.f_best;
    trace->best_history.clear();
    for (double f : history) trace->best_history.push_back(-f);
    trace->n_evals = best.n_evals;
  }
  return condition(std::move(z), std::move(y), GprHyperparams::unpack(best.x_best));
}

GprPrediction GaussianProcess::predict(std::span<const double> z_star) const {
  if (!chol_) throw InvalidArgument("gpr: predict on an unconditioned process");
  if (z_star.size() != z_.cols()) throw InvalidArgument("gpr: input dimension mismatch");
  const Matern32 k(hyper_);
  Vector ks(z_.rows());
  for (std::size_t i = 0; i < z_.rows(); ++i) ks[i] = k(z_.row(i), z_star);
  GprPrediction p;
  p.mean = y_mean_ + dot(alpha_, ks);
  const Vector v = chol_->solve_lower(ks);
  const double var = k.s2 - dot(v, v);
  p.variance = std::max(var, 0.0);
  return p;
}

GprConfig GprConfig::from_options(const ModelOptions& options, std::uint64_t seed) {
  GprConfig c;
  c.search.seed = seed;
  detail::OptionReader r(options, "gpr");
  double energy = 0.99;
  std::size_t fixed_k = 0;
  r.read("pca_energy", energy);
  r.read("pca_components", fixed_k);
  if (fixed_k > 0) c.pca = FixedComponents{fixed_k};
  else c.pca = MinEnergy{energy};
  r.read_list("pca_grid", c.pca_grid);
  r.read("max_train_samples", c.max_train_samples);
  r.read("max_condition_samples", c.max_condition_samples);
  r.read("n_hops", c.search.n_hops);
  r.read("step_scale", c.search.step_scale);
  r.read("temperature", c.search.temperature);
  r.read("local_max_iter", c.search.local_max_iter);
  r.read("log_length_low", c.search.bounds.log_length_low);
  r.read("log_length_high", c.search.bounds.log_length_high);
  r.read("log_signal_low", c.search.bounds.log_signal_low);
  r.read("log_signal_high", c.search.bounds.log_signal_high);
  r.read("log_nugget_low", c.search.bounds.log_nugget_low);
  r.read("log_nugget_high", c.search.bounds.log_nugget_high);
  r.read("seed", c.search.seed);
  r.finish();
  return c;
}

Vector GprRegressor::reduce(std::span<const double> xn) const {
  const Vector zq = transform(q_basis_, xn.first(window_));
  const Vector zh = transform(h_basis_, xn.subspan(window_, window_));
  Vector z = zq;
  z.insert(z.end(), zh.begin(), zh.end());
  return z;
}

void GprRegressor::fit_with_selector(const Dataset& train, const PcaSelector& selector) {
  norm_ = train.norm;
  window_ = static_cast<std::size_t>(train.window_hours);
  if (train.width() != 2 * window_) throw InvalidArgument("gpr: dataset width is not 2W");
  const Matrix xn = normalize_features(train.x, norm_);
  q_basis_ = fit_pca(xn.col_block(0, window_), selector);
  h_basis_ = fit_pca(xn.col_block(window_, window_), selector);

  const std::size_t k = q_basis_.n_components() + h_basis_.n_components();
  auto reduced = [&](std::size_t max_rows) {
    const auto idx = even_subsample(train.size(), max_rows);
    std::pair<Matrix, Vector> out{Matrix(idx.size(), k), Vector(idx.size())};
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const Vector zi = reduce(xn.row(idx[i]));
      std::copy(zi.begin(), zi.end(), out.first.row(i).begin());
      out.second[i] = train.y[idx[i]];
    }
    return out;
  };
  auto [z, y] = reduced(config_.max_train_samples);
  gp_ = GaussianProcess::fit(std::move(z), std::move(y), config_.search, std::nullopt, &trace_);
  const auto n_search = even_subsample(train.size(), config_.max_train_samples).size();
  const auto n_cond = even_subsample(train.size(), config_.max_condition_samples).size();
  if (n_cond != n_search) {
    auto [zc, yc] = reduced(config_.max_condition_samples);
    gp_ = GaussianProcess::condition(std::move(zc), std::move(yc), gp_.hyperparams());
  }
  mark_fitted();
}

void GprRegressor::fit(const Dataset& train) {
  if (config_.pca_grid.empty()) {
    fit_with_selector(train, config_.pca);
    return;
  }
  // Chronological hold-out: first 80% to fit, last 20% to score each k.
  const std::size_t n = train.size();
  const std::size_t n_fit = n * 4 / 5;
  if (n_fit < 3 || n_fit == n) throw InvalidArgument("gpr: too few samples for the PCA grid");
  std::vector<std::size_t> fit_idx(n_fit), val_idx(n - n_fit);
  for (std::size_t i = 0; i < n_fit; ++i) fit_idx[i] = i;
  for (std::size_t i = n_fit; i < n; ++i) val_idx[i - n_fit] = i;
  const Dataset fit_part = train.subset(fit_idx);
  const Dataset val_part = train.subset(val_idx);

  std::size_t best_k = 0;
  double best_mse = std::numeric_limits<double>::infinity();
  for (std::size_t k : config_.pca_grid) {
    if (k == 0 || k > static_cast<std::size_t>(train.window_hours)) continue;
    GprRegressor candidate(config_);
    candidate.fit_with_selector(fit_part, FixedComponents{k});
    const Vector pred = candidate.predict(val_part.x);
    double mse = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      mse += (pred[i] - val_part.y[i]) * (pred[i] - val_part.y[i]);
    }
    mse /= static_cast<double>(pred.size());
    if (mse < best_mse) {
      best_mse = mse;
      best_k = k;
    }
  }
  if (best_k == 0) throw InvalidArgument("gpr: no usable entry in pca_grid");
  config_.pca = FixedComponents{best_k};
  fit_with_selector(train, config_.pca);
}

GprPrediction GprRegressor::predict_one(std::span<const double> x) const {
  require_fitted();
  if (x.size() != 2 * window_) {
    throw InvalidArgument("gpr: input width " + std::to_string(x.size()) + ", expected " +
                          std::to_string(2 * window_));
  }
  Matrix row(1, x.size(), Vector(x.begin(), x.end()));
  const Matrix xn = normalize_features(row, norm_);
  return gp_.predict(reduce(xn.row(0)));
}

std::vector<GprPrediction> GprRegressor::predict_with_variance(const Matrix& x) const {
  require_fitted();
  const Matrix xn = normalize_features(x, norm_);
  std::vector<GprPrediction> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(gp_.predict(reduce(xn.row(r))));
  return out;
}

Vector GprRegressor::predict(const Matrix& x) const {
  const auto p = predict_with_variance(x);
  Vector out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i].mean;
  return out;
}

HyperParams GprRegressor::hyperparams() const {
  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };
  HyperParams hp;
  hp.emplace_back("max_train_samples", std::to_string(config_.max_train_samples));
  hp.emplace_back("max_condition_samples", std::to_string(config_.max_condition_samples));
  hp.emplace_back("n_hops", std::to_string(config_.search.n_hops));
  if (fitted()) {
    hp.emplace_back("q_modes", std::to_string(q_basis_.n_components()));
    hp.emplace_back("h_modes", std::to_string(h_basis_.n_components()));
    const auto& h = gp_.hyperparams();
    std::string ls;
    for (double l : h.log_length_scales) ls += (ls.empty() ? "" : " ") + fmt(std::exp(l));
    hp.emplace_back("length_scales", ls);
    hp.emplace_back("signal_std", fmt(std::exp(h.log_signal_std)));
    hp.emplace_back("nugget_std", fmt(std::exp(h.log_nugget_std)));
    hp.emplace_back("log_likelihood", fmt(trace_.final_log_likelihood));
  }
  return hp;
}

std::string GprRegressor::serialize() const {
  require_fitted();
  auto doc = detail::header(*this);
  doc["norm"] = detail::to_json(norm_);
  doc["window_hours"] = window_;
  doc["q_basis"] = detail::to_json(q_basis_);
  doc["h_basis"] = detail::to_json(h_basis_);
  const auto& h = gp_.hyperparams();
  doc["hyper"] = {{"log_length_scales", h.log_length_scales},
                  {"log_signal_std", h.log_signal_std},
                  {"log_nugget_std", h.log_nugget_std}};
  doc["z"] = detail::to_json(gp_.inputs());
  doc["y"] = gp_.targets();
  doc["y_mean"] = gp_.y_mean();
  doc["alpha"] = gp_.alpha();
  doc["trace"] = {{"initial_log_likelihood", trace_.initial_log_likelihood},
                  {"final_log_likelihood", trace_.final_log_likelihood}};
  return doc.dump();
}

std::unique_ptr<GprRegressor> GprRegressor::from_json_text(std::string_view text) {
  const auto doc = detail::parse_document(text, "gpr");
  return detail::read_document("gpr", [&] {
    auto m = std::make_unique<GprRegressor>(GprConfig{});
    const auto& hp = doc.at("hyperparams");
    m->config_.max_train_samples = std::stoul(hp.at("max_train_samples").get<std::string>());
    m->config_.max_condition_samples =
        std::stoul(hp.at("max_condition_samples").get<std::string>());
    m->config_.search.n_hops = std::stoi(hp.at("n_hops").get<std::string>());
    m->norm_ = detail::norm_from_json(doc.at("norm"));
    m->window_ = doc.at("window_hours").get<std::size_t>();
    m->q_basis_ = detail::pca_from_json(doc.at("q_basis"));
    m->h_basis_ = detail::pca_from_json(doc.at("h_basis"));
    GprHyperparams h;
    h.log_length_scales = doc.at("hyper").at("log_length_scales").get<Vector>();
    h.log_signal_std = doc.at("hyper").at("log_signal_std").get<double>();
    h.log_nugget_std = doc.at("hyper").at("log_nugget_std").get<double>();
    m->gp_ = GaussianProcess::restore(detail::matrix_from_json(doc.at("z")),
                                      doc.at("y").get<Vector>(), h);
    // The refactorization is deterministic; a mismatch means a corrupted file.
    if (m->gp_.alpha() != doc.at("alpha").get<Vector>()) {
      throw InvalidArgument("gpr model document: stored weights do not match its inputs");
    }
    m->trace_.initial_log_likelihood = doc.at("trace").at("initial_log_likelihood").get<double>();
    m->trace_.final_log_likelihood = doc.at("trace").at("final_log_likelihood").get<double>();
    m->mark_fitted();
    return m;
  });
}

}  // namespace hydro
