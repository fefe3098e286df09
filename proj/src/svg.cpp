#include "modekit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace modekit {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

std::string polyline(std::span<const double> y, double x0, double y0, double width, double height) {
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi - lo < 1e-300) {
    lo -= 1.0;
    hi += 1.0;
  }
  // Decimate to at most ~2 points per horizontal pixel.
  const std::size_t n = y.size();
  const std::size_t step = std::max<std::size_t>(1, n / static_cast<std::size_t>(2 * width));
  std::string pts;
  for (std::size_t i = 0; i < n; i += step) {
    const double px = x0 + width * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, n - 1));
    const double py = y0 + height * (1.0 - (y[i] - lo) / (hi - lo));
    pts += num(px) + "," + num(py) + " ";
  }
  return "<polyline fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"1\" points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string render_modes_svg(std::span<const double> input, const Decomposition& decomp,
                             const std::string& title) {
  constexpr double kWidth = 900;
  constexpr double kPanel = 80;
  constexpr double kGap = 14;
  constexpr double kLeft = 70;
  constexpr double kTop = 36;

  std::vector<std::pair<std::string, std::span<const double>>> panels;
  panels.emplace_back("input", input);
  for (std::size_t k = 0; k < decomp.imfs.size(); ++k) {
    panels.emplace_back("IMF " + std::to_string(k + 1), decomp.imfs[k]);
  }
  panels.emplace_back("residue", decomp.residue);

  const double height = kTop + static_cast<double>(panels.size()) * (kPanel + kGap) + 10;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft) + "\" y=\"20\" font-size=\"14\">" + escape(title) + "</text>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double y0 = kTop + static_cast<double>(p) * (kPanel + kGap);
    svg += "<text x=\"4\" y=\"" + num(y0 + kPanel / 2) + "\">" + escape(panels[p].first) +
           "</text>\n";
    svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(y0) + "\" width=\"" +
           num(kWidth - kLeft - 10) + "\" height=\"" + num(kPanel) +
           "\" fill=\"none\" stroke=\"#ccc\"/>\n";
    if (!panels[p].second.empty()) {
      svg += polyline(panels[p].second, kLeft, y0, kWidth - kLeft - 10, kPanel);
    }
  }
  return svg + "</svg>\n";
}

std::string render_series_svg(const std::vector<std::string>& labels,
                               const std::vector<double>& values, const std::string& title,
                               const std::string& y_label) {
  constexpr double kWidth = 720;
  constexpr double kHeight = 420;
  constexpr double kLeft = 80;
  constexpr double kRight = 20;
  constexpr double kTop = 40;
  constexpr double kBottom = 90;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;

  const bool log_axis =
      !values.empty() && std::all_of(values.begin(), values.end(), [](double v) { return v > 0; });
  std::vector<double> y;
  for (const double v : values) y.push_back(log_axis ? std::log10(v) : v);

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft) + "\" y=\"22\" font-size=\"14\">" + escape(title) + "</text>\n";
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#999\"/>\n";
  svg += "<text x=\"12\" y=\"" + num(kTop + ph / 2) + "\" transform=\"rotate(-90 12 " +
         num(kTop + ph / 2) + ")\">" + escape(log_axis ? "log10 " + y_label : y_label) +
         "</text>\n";
  if (y.empty()) return svg + "</svg>\n";

  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  svg += "<text x=\"" + num(kLeft - 4) + "\" y=\"" + num(kTop + 4) + "\" text-anchor=\"end\">" +
         num(hi) + "</text>\n";
  svg += "<text x=\"" + num(kLeft - 4) + "\" y=\"" + num(kTop + ph) + "\" text-anchor=\"end\">" +
         num(lo) + "</text>\n";

  std::string pts;
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double px = kLeft + (n == 1 ? pw / 2 : pw * static_cast<double>(i) / static_cast<double>(n - 1));
    const double py = kTop + ph * (1.0 - (y[i] - lo) / (hi - lo));
    pts += num(px) + "," + num(py) + " ";
    svg += "<circle cx=\"" + num(px) + "\" cy=\"" + num(py) + "\" r=\"3\" fill=\"#c0392b\"/>\n";
    const std::string label = i < labels.size() ? labels[i] : std::to_string(i);
    svg += "<text x=\"" + num(px) + "\" y=\"" + num(kTop + ph + 14) + "\" transform=\"rotate(35 " +
           num(px) + " " + num(kTop + ph + 14) + ")\">" + escape(label) + "</text>\n";
  }
  svg += "<polyline fill=\"none\" stroke=\"#c0392b\" points=\"" + pts + "\"/>\n";
  return svg + "</svg>\n";
}

}  // namespace modekit
