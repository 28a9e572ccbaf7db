#include "hydro/svg.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "hydro/error.hpp"

namespace hydro::svg {

Document::Document(double width, double height) : width_(width), height_(height) {}

void Document::rect(double x, double y, double w, double h, const std::string& fill,
                    const std::string& extra) {
  body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
        << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"" << (extra.empty() ? "" : " ")
        << extra << "/>\n";
}

void Document::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                    double width) {
  body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
        << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
        << "\"/>\n";
}

void Document::polyline(std::span<const double> xs, std::span<const double> ys,
                        const std::string& stroke, double width) {
  if (xs.size() != ys.size()) throw InvalidArgument("svg polyline: coordinate count mismatch");
  body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width)
        << "\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    body_ << (i ? " " : "") << num(xs[i]) << "," << num(ys[i]);
  }
  body_ << "\"/>\n";
}

void Document::text(double x, double y, const std::string& content, double size,
                    const std::string& anchor, const std::string& extra) {
  body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size, 1)
        << "\" text-anchor=\"" << anchor << "\"" << (extra.empty() ? "" : " ") << extra << ">"
        << escape(content) << "</text>\n";
}

std::string Document::str() const {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_, 0) << "\" height=\""
      << num(height_, 0) << "\" viewBox=\"0 0 " << num(width_, 0) << " " << num(height_, 0)
      << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body_.str() << "</svg>\n";
  return out.str();
}

void Document::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << str();
  if (!out) throw Error("failed writing " + path.string());
}

const std::string& color(std::size_t i) {
  static const std::array<std::string, 6> palette{"#4e79a7", "#f28e2b", "#59a14f",
                                                  "#e15759", "#76b7b2", "#b07aa1"};
  return palette[i % palette.size()];
}

std::string num(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace hydro::svg
