#include "hydro/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hydro/error.hpp"

namespace hydro {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(where + ": bad number '" + s + "'");
  }
}

struct Panel {
  double x, y, w, h;
};

// Draws labelled bars into `p`; returns nothing, bars get class="bar".
void draw_bars(svg::Document& doc, const Panel& p, const std::string& title,
               std::span<const std::string> labels, std::span<const double> values, int digits) {
  doc.text(p.x + p.w / 2, p.y + 16, title, 14, "middle");
  const double top = p.y + 30, bottom = p.y + p.h - 30;
  double lo = 0.0, hi = 0.0;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) hi = lo + 1.0;
  const double scale = (bottom - top) / (hi - lo);
  const double zero_y = top + hi * scale;
  const double slot = p.w / static_cast<double>(std::max<std::size_t>(values.size(), 1));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    const double h = std::abs(v) * scale;
    const double x = p.x + slot * static_cast<double>(i) + slot * 0.15;
    const double y = v >= 0 ? zero_y - h : zero_y;
    doc.rect(x, y, slot * 0.7, h, svg::color(i),
             "class=\"bar\" data-value=\"" + format_double(v) + "\"");
    doc.text(x + slot * 0.35, v >= 0 ? y - 4 : y + h + 12, svg::num(v, digits), 11, "middle");
    doc.text(x + slot * 0.35, bottom + 18, labels[i], 12, "middle");
  }
  doc.line(p.x, zero_y, p.x + p.w, zero_y, "#333333");
}

Vector column(std::span<const EvalReport> reports, double EvalReport::* field, double factor) {
  Vector v;
  for (const auto& r : reports) v.push_back(r.*field * factor);
  return v;
}

std::vector<std::string> names(std::span<const EvalReport> reports) {
  std::vector<std::string> v;
  for (const auto& r : reports) v.push_back(r.model_name);
  return v;
}

}  // namespace

void write_predictions_csv(const PredictionTable& t, const std::filesystem::path& path) {
  if (t.predictions.size() != t.models.size()) {
    throw InvalidArgument("prediction table: model count mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "timestamp,target";
  for (const auto& m : t.models) out << "," << m;
  out << "\n";
  for (std::size_t i = 0; i < t.timestamps.size(); ++i) {
    out << format_iso8601(t.timestamps[i]) << "," << format_double(t.target[i]);
    for (const auto& p : t.predictions) out << "," << format_double(p[i]);
    out << "\n";
  }
  if (!out) throw Error("failed writing " + path.string());
}

PredictionTable read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": empty file");
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "timestamp" || header[1] != "target") {
    throw InvalidArgument(path.string() + ":1: expected 'timestamp,target,...' header");
  }
  PredictionTable t;
  t.models.assign(header.begin() + 2, header.end());
  t.predictions.resize(t.models.size());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw InvalidArgument(where + ": wrong column count");
    try {
      t.timestamps.push_back(parse_iso8601(cells[0]));
    } catch (const Error& e) {
      throw InvalidArgument(where + ": " + e.what());
    }
    t.target.push_back(parse_cell(cells[1], where));
    for (std::size_t m = 0; m < t.models.size(); ++m) {
      t.predictions[m].push_back(parse_cell(cells[m + 2], where));
    }
  }
  return t;
}

void write_metrics_csv(std::span<const EvalReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << metrics_csv_header() << "\n";
  for (const auto& r : reports) out << metrics_csv_row(r) << "\n";
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<EvalReport> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != metrics_csv_header()) {
    throw InvalidArgument(path.string() + ":1: unexpected metrics header");
  }
  std::vector<EvalReport> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto c = split_csv(line);
    if (c.size() != 10) throw InvalidArgument(where + ": wrong column count");
    EvalReport r;
    r.task = c[0];
    r.model_name = c[1];
    r.n_samples = static_cast<std::size_t>(parse_cell(c[2], where));
    r.mse = parse_cell(c[3], where);
    r.rmse = parse_cell(c[4], where);
    r.fer = parse_cell(c[5], where);
    r.max_error = parse_cell(c[6], where);
    r.max_error_index = static_cast<std::size_t>(parse_cell(c[7], where));
    r.bias = parse_cell(c[8], where);
    r.error_std = parse_cell(c[9], where);
    out.push_back(std::move(r));
  }
  return out;
}

svg::Document bar_chart(const std::string& title, std::span<const std::string> labels,
                        std::span<const double> values, int digits) {
  if (labels.size() != values.size()) throw InvalidArgument("bar_chart: label count mismatch");
  svg::Document doc(480, 360);
  draw_bars(doc, {20, 10, 440, 340}, title, labels, values, digits);
  return doc;
}

svg::Document fer_rmse_chart(const std::string& title, std::span<const EvalReport> reports) {
  svg::Document doc(900, 380);
  doc.text(450, 20, title, 16, "middle");
  const auto labels = names(reports);
  const auto fer = column(reports, &EvalReport::fer, 1.0);
  const auto rmse = column(reports, &EvalReport::rmse, 100.0);
  draw_bars(doc, {20, 30, 420, 340}, "FER", labels, fer, 3);
  draw_bars(doc, {460, 30, 420, 340}, "RMSE (cm)", labels, rmse, 1);
  return doc;
}

svg::Document max_error_chart(const std::string& title, std::span<const EvalReport> reports) {
  const auto labels = names(reports);
  const auto values = column(reports, &EvalReport::max_error, 100.0);
  svg::Document doc(480, 380);
  doc.text(240, 20, title, 16, "middle");
  draw_bars(doc, {20, 30, 440, 340}, "Maximum error (cm)", labels, values, 1);
  return doc;
}

svg::Document error_series_chart(const std::string& title, const PredictionTable& t) {
  const double w = 960, h = 420, left = 60, right = 20, top = 40, bottom = 50;
  svg::Document doc(w, h);
  doc.text(w / 2, 22, title, 16, "middle");
  if (t.timestamps.empty()) return doc;
  std::vector<Vector> err;
  double lo = 0.0, hi = 0.0;
  for (const auto& p : t.predictions) {
    Vector e = errors(t.target, p);
    for (double& v : e) {
      v *= 100.0;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    err.push_back(std::move(e));
  }
  if (hi == lo) hi = lo + 1.0;
  const double t0 = static_cast<double>(t.timestamps.front());
  const double t1 = std::max(static_cast<double>(t.timestamps.back()), t0 + 1.0);
  Vector xs(t.timestamps.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = left + (static_cast<double>(t.timestamps[i]) - t0) / (t1 - t0) * (w - left - right);
  }
  auto y_of = [&](double v) { return top + (hi - v) / (hi - lo) * (h - top - bottom); };
  doc.line(left, y_of(0.0), w - right, y_of(0.0), "#999999");
  doc.text(left - 6, y_of(hi) + 4, svg::num(hi, 0), 10, "end");
  doc.text(left - 6, y_of(lo) + 4, svg::num(lo, 0), 10, "end");
  doc.text(14, h / 2, "error (cm)", 11, "middle",
           "transform=\"rotate(-90 14 " + svg::num(h / 2) + ")\"");
  doc.text(left, h - 20, format_iso8601(t.timestamps.front()).substr(0, 10), 10, "start");
  doc.text(w - right, h - 20, format_iso8601(t.timestamps.back()).substr(0, 10), 10, "end");
  for (std::size_t m = 0; m < err.size(); ++m) {
    Vector ys(err[m].size());
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = y_of(err[m][i]);
    doc.polyline(xs, ys, svg::color(m), 0.8);
    doc.rect(left + 10 + 110.0 * static_cast<double>(m), h - 14, 10, 10, svg::color(m));
    doc.text(left + 24 + 110.0 * static_cast<double>(m), h - 5, t.models[m], 11);
  }
  return doc;
}

svg::Document error_pdf_chart(const std::string& title, const PredictionTable& t,
                              std::size_t n_bins) {
  const double pw = 300, ph = 220;
  const std::size_t cols = 3;
  const std::size_t rows = (t.models.size() + cols - 1) / cols;
  svg::Document doc(pw * cols, 40 + ph * static_cast<double>(std::max<std::size_t>(rows, 1)));
  doc.text(doc.width() / 2, 22, title, 16, "middle");
  for (std::size_t m = 0; m < t.models.size(); ++m) {
    const double x0 = pw * static_cast<double>(m % cols) + 30;
    const double y0 = 40 + ph * static_cast<double>(m / cols);
    const double w = pw - 50, h = ph - 60;
    Vector e = errors(t.target, t.predictions[m]);
    for (double& v : e) v *= 100.0;
    doc.text(x0 + w / 2, y0 + 14, t.models[m], 13, "middle");
    if (e.size() < 2) continue;
    const auto pdf = error_pdf(e, n_bins);
    const auto dens = pdf.density();
    double peak = 0.0;
    for (double d : dens) peak = std::max(peak, d);
    for (double g : pdf.gaussian) peak = std::max(peak, g);
    if (peak <= 0.0) peak = 1.0;
    const double lo = pdf.edges.front(), hi = std::max(pdf.edges.back(), lo + 1e-9);
    auto x_of = [&](double v) { return x0 + (v - lo) / (hi - lo) * w; };
    auto y_of = [&](double d) { return y0 + 24 + h * (1.0 - d / peak); };
    for (std::size_t b = 0; b < dens.size(); ++b) {
      const double xa = x_of(pdf.edges[b]), xb = x_of(pdf.edges[b + 1]);
      doc.rect(xa, y_of(dens[b]), std::max(xb - xa, 1.0), y_of(0.0) - y_of(dens[b]),
               svg::color(m), "fill-opacity=\"0.6\"");
    }
    const auto centers = pdf.centers();
    Vector gx(centers.size()), gy(centers.size());
    for (std::size_t b = 0; b < centers.size(); ++b) {
      gx[b] = x_of(centers[b]);
      gy[b] = y_of(pdf.gaussian[b]);
    }
    doc.polyline(gx, gy, "#222222", 1.2);
    doc.line(x0, y_of(0.0), x0 + w, y_of(0.0), "#333333");
    doc.text(x0, y_of(0.0) + 14, svg::num(lo, 0), 10, "start");
    doc.text(x0 + w, y_of(0.0) + 14, svg::num(hi, 0) + " cm", 10, "end");
    doc.text(x0 + w / 2, y_of(0.0) + 28,
             "bias " + svg::num(pdf.bias, 1) + " cm, std " + svg::num(pdf.std, 1) + " cm", 10,
             "middle");
  }
  return doc;
}

}  // namespace hydro
