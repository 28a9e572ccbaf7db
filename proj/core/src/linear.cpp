#include "hydro/error.hpp"
#include "hydro/model.hpp"
#include "hydro/numerics/linalg.hpp"
#include "json_io.hpp"

namespace hydro {

void LinearRegression::fit(const Dataset& train) {
  const std::size_t n = train.size();
  const std::size_t d = train.width();
  if (n <= d + 1) {
    throw InvalidArgument("linear: need more than " + std::to_string(d + 1) + " samples, got " +
                          std::to_string(n));
  }
  norm_ = train.norm;
  const Matrix z = normalize_features(train.x, norm_);
  Matrix design(n, d + 1);
  for (std::size_t r = 0; r < n; ++r) {
    design(r, 0) = 1.0;
    auto src = z.row(r);
    std::copy(src.begin(), src.end(), design.row(r).begin() + 1);
  }
  const Vector c = least_squares(design, train.y);
  intercept_ = c[0];
  coef_.assign(c.begin() + 1, c.end());
  mark_fitted();
}

Vector LinearRegression::predict(const Matrix& x) const {
  require_fitted();
  const Matrix z = normalize_features(x, norm_);
  Vector out(z.rows());
  for (std::size_t r = 0; r < z.rows(); ++r) out[r] = intercept_ + dot(coef_, z.row(r));
  return out;
}

HyperParams LinearRegression::hyperparams() const {
  return {{"features", std::to_string(norm_.x_mean.size())}, {"intercept", "yes"}};
}

std::string LinearRegression::serialize() const {
  require_fitted();
  auto doc = detail::header(*this);
  doc["norm"] = detail::to_json(norm_);
  doc["intercept"] = intercept_;
  doc["coefficients"] = coef_;
  return doc.dump();
}

std::unique_ptr<LinearRegression> LinearRegression::from_json_text(std::string_view text) {
  const auto doc = detail::parse_document(text, "linear");
  return detail::read_document("linear", [&] {
    auto m = std::make_unique<LinearRegression>();
    m->norm_ = detail::norm_from_json(doc.at("norm"));
    m->intercept_ = doc.at("intercept").get<double>();
    m->coef_ = doc.at("coefficients").get<Vector>();
    if (m->coef_.size() != m->norm_.x_mean.size()) {
      throw InvalidArgument("linear model document: coefficient count mismatch");
    }
    m->mark_fitted();
    return m;
  });
}

}  // namespace hydro
