#pragma once

#include <filesystem>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace hydro::svg {

/// Minimal self-contained SVG writer. Coordinates are in pixels, origin top-left.
class Document {
 public:
  Document(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& extra = {});
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0);
  void polyline(std::span<const double> xs, std::span<const double> ys,
                const std::string& stroke, double width = 1.0);
  /// anchor: start, middle or end.
  void text(double x, double y, const std::string& content, double size = 12.0,
            const std::string& anchor = "start", const std::string& extra = {});

  std::string str() const;
  void save(const std::filesystem::path& path) const;

  double width() const noexcept { return width_; }
  double height() const noexcept { return height_; }

 private:
  double width_;
  double height_;
  std::ostringstream body_;
};

/// Fixed palette, cycled by index.
const std::string& color(std::size_t i);

/// Fixed-point text with `digits` decimals.
std::string num(double v, int digits = 2);

std::string escape(const std::string& s);

}  // namespace hydro::svg
