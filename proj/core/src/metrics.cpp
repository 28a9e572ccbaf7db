#include "hydro/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include "hydro/error.hpp"

namespace hydro {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.empty()) throw InvalidArgument(std::string(what) + ": empty input");
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

double mse(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred, "mse");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_pred[i] - y_true[i];
    s += e * e;
  }
  return s / static_cast<double>(y_true.size());
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  return std::sqrt(mse(y_true, y_pred));
}

double fer(double mse_model, double mse_reg) {
  if (!(mse_reg > 0.0)) {
    throw InvalidArgument("fer: baseline MSE is zero, FER is undefined");
  }
  return 1.0 - mse_model / mse_reg;
}

MaxError max_error(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred, "max_error");
  MaxError m;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = std::abs(y_pred[i] - y_true[i]);
    if (e > m.value) m = {e, i};
  }
  return m;
}

Vector errors(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred, "errors");
  Vector e(y_true.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = y_pred[i] - y_true[i];
  return e;
}

Vector ErrorPdf::centers() const {
  Vector c(counts.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (edges[i] + edges[i + 1]);
  return c;
}

Vector ErrorPdf::density() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  Vector d(counts.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double w = edges[i + 1] - edges[i];
    d[i] = w > 0.0 ? static_cast<double>(counts[i]) / (static_cast<double>(n) * w) : 0.0;
  }
  return d;
}

ErrorPdf error_pdf(std::span<const double> errs, std::size_t n_bins) {
  if (errs.size() < 2) throw InvalidArgument("error_pdf: need at least 2 errors");
  if (n_bins < 1) throw InvalidArgument("error_pdf: n_bins must be >= 1");
  ErrorPdf pdf;
  const double n = static_cast<double>(errs.size());
  double sum = 0.0;
  for (double e : errs) sum += e;
  pdf.bias = sum / n;
  double ss = 0.0;
  for (double e : errs) ss += (e - pdf.bias) * (e - pdf.bias);
  pdf.std = std::sqrt(ss / (n - 1.0));

  const auto [lo_it, hi_it] = std::minmax_element(errs.begin(), errs.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    pdf.edges = {lo, hi};
    pdf.counts = {errs.size()};
  } else {
    pdf.edges.resize(n_bins + 1);
    const double w = (hi - lo) / static_cast<double>(n_bins);
    for (std::size_t i = 0; i <= n_bins; ++i) pdf.edges[i] = lo + w * static_cast<double>(i);
    pdf.edges.back() = hi;
    pdf.counts.assign(n_bins, 0);
    for (double e : errs) {
      auto bin = static_cast<std::size_t>((e - lo) / w);
      pdf.counts[std::min(bin, n_bins - 1)] += 1;
    }
  }
  pdf.gaussian.assign(pdf.counts.size(), 0.0);
  if (pdf.std > 0.0) {
    const auto c = pdf.centers();
    const double norm = 1.0 / (pdf.std * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double z = (c[i] - pdf.bias) / pdf.std;
      pdf.gaussian[i] = norm * std::exp(-0.5 * z * z);
    }
  }
  return pdf;
}

EvalReport evaluate_predictions(std::string task, std::string model_name,
                                std::span<const double> y_true, std::span<const double> y_pred,
                                double mse_reg, std::size_t n_bins) {
  EvalReport r;
  r.task = std::move(task);
  r.model_name = std::move(model_name);
  r.n_samples = y_true.size();
  r.mse = mse(y_true, y_pred);
  r.rmse = std::sqrt(r.mse);
  r.fer = fer(r.mse, mse_reg);
  const auto m = max_error(y_true, y_pred);
  r.max_error = m.value;
  r.max_error_index = m.index;
  const auto e = errors(y_true, y_pred);
  if (e.size() >= 2) {
    r.histogram = error_pdf(e, n_bins);
    r.bias = r.histogram.bias;
    r.error_std = r.histogram.std;
  } else {
    r.bias = e[0];
  }
  return r;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string metrics_csv_header() {
  return "task,model,n_samples,mse_m2,rmse_m,fer,max_error_m,max_error_index,bias_m,error_std_m";
}

std::string metrics_csv_row(const EvalReport& r) {
  return r.task + "," + r.model_name + "," + std::to_string(r.n_samples) + "," +
         format_double(r.mse) + "," + format_double(r.rmse) + "," + format_double(r.fer) + "," +
         format_double(r.max_error) + "," + std::to_string(r.max_error_index) + "," +
         format_double(r.bias) + "," + format_double(r.error_std);
}

void write_report_text(std::ostream& out, const EvalReport& r) {
  out << "[" << r.task << " / " << r.model_name << "]\n"
      << "  samples    " << r.n_samples << "\n"
      << "  rmse       " << r.rmse * 100.0 << " cm\n"
      << "  fer        " << r.fer << "\n"
      << "  max error  " << r.max_error * 100.0 << " cm (sample " << r.max_error_index << ")\n"
      << "  bias       " << r.bias * 100.0 << " cm\n"
      << "  error std  " << r.error_std * 100.0 << " cm\n";
}

}  // namespace hydro
