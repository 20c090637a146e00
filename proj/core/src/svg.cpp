#include "moesim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "moesim/csvio.hpp"

namespace moesim {

namespace {

struct Rgb {
  int r, g, b;
};

constexpr Rgb kLow{0x21, 0x66, 0xac};   // -1
constexpr Rgb kMid{0xf7, 0xf7, 0xf7};   //  0
constexpr Rgb kHigh{0xb2, 0x18, 0x2b};  // +1

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  auto mix = [&](int x, int y) {
    return static_cast<int>(std::lround(x + t * (y - x)));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

std::string fill_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  Rgb c = v < 0 ? lerp(kMid, kLow, -v) : lerp(kMid, kHigh, v);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

}  // namespace

void emit_heatmap(const Eigen::MatrixXd& m, const std::string& out_path) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  const int cell = 24;
  const int margin = 42;
  const int width = margin + cols * cell + 8;
  const int height = margin + rows * cell + 8;

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("emit_heatmap: cannot open " + out_path);

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  out << "<text x=\"" << margin / 2 << "\" y=\"" << margin + rows * cell / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << margin / 2 << " " << margin + rows * cell / 2 << ")\">i</text>\n";
  out << "<text x=\"" << margin + cols * cell / 2 << "\" y=\""
      << margin / 2 << "\" font-size=\"12\" text-anchor=\"middle\">j</text>\n";

  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      int x = margin + j * cell;
      int y = margin + i * cell;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"" << fill_color(m(i, j))
          << "\" stroke=\"#cccccc\" stroke-width=\"0.5\">"
          << "<title>(" << i << ", " << j << ") = " << format_double(m(i, j))
          << "</title></rect>\n";
    }
  }

  for (int i = 0; i < rows; ++i)
    out << "<text x=\"" << margin - 6 << "\" y=\""
        << margin + i * cell + cell / 2 + 4
        << "\" font-size=\"9\" text-anchor=\"end\">" << i << "</text>\n";
  for (int j = 0; j < cols; ++j)
    out << "<text x=\"" << margin + j * cell + cell / 2 << "\" y=\""
        << margin - 6 << "\" font-size=\"9\" text-anchor=\"middle\">" << j
        << "</text>\n";

  out << "</svg>\n";
}

}  // namespace moesim
