#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "detect/report.hpp"

namespace detect {

namespace {

constexpr double kWidth = 820.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// 1, 2 or 5 times a power of ten, giving at most ~6 ticks up to `max`.
std::int64_t tick_step(std::int64_t max) {
  std::int64_t step = 1;
  for (;;) {
    for (std::int64_t m : {1, 2, 5}) {
      if (max / (step * m) <= 5) return step * m;
    }
    step *= 10;
  }
}

}  // namespace

std::string render_plot_svg(const DistributionTable& table, const PlotOptions& options) {
  if (table.times.empty() || table.leaves.empty()) throw InvalidArgument("cannot plot an empty distribution table");
  const std::size_t T = table.times.size();
  const std::size_t L = table.leaves.size();

  std::int64_t max_count = 1;
  for (std::int64_t c : table.counts) max_count = std::max(max_count, c);
  const std::int64_t step = tick_step(max_count);
  const std::int64_t y_max = (max_count + step - 1) / step * step;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double dx = T > 1 ? plot_w / static_cast<double>(T - 1) : 0.0;
  auto x_of = [&](std::size_t t) { return kLeft + (T > 1 ? dx * static_cast<double>(t) : plot_w / 2.0); };
  auto y_of = [&](double v) { return kTop + plot_h - plot_h * v / static_cast<double>(y_max); };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kTop / 2 + 5) +
         "\" text-anchor=\"middle\" font-size=\"15\">" + escape(options.title) + "</text>\n";

  if (options.mark) {
    auto it = std::find(table.times.begin(), table.times.end(), *options.mark);
    if (it == table.times.end()) throw InvalidArgument("mark time " + std::to_string(*options.mark) + " is not in the table");
    const std::size_t t = static_cast<std::size_t>(it - table.times.begin());
    const double band = T > 1 ? dx : plot_w / 4.0;
    svg += "<rect class=\"mark\" x=\"" + fmt(x_of(t) - band / 2) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(band) +
           "\" height=\"" + fmt(plot_h) + "\" fill=\"#d9d9d9\"/>\n";
  }

  // Axes, gridlines and ticks.
  for (std::int64_t v = 0; v <= y_max; v += step) {
    const double y = y_of(static_cast<double>(v));
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(kLeft + plot_w) + "\" y2=\"" + fmt(y) +
           "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" + std::to_string(v) +
           "</text>\n";
  }
  const std::size_t label_every = std::max<std::size_t>(1, (T + 19) / 20);
  for (std::size_t t = 0; t < T; t += label_every) {
    svg += "<text x=\"" + fmt(x_of(t)) + "\" y=\"" + fmt(kTop + plot_h + 18) + "\" text-anchor=\"middle\">" +
           std::to_string(table.times[t]) + "</text>\n";
  }
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" + fmt(kLeft + plot_w) + "\" y2=\"" +
         fmt(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" +
         fmt(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 15) + "\" text-anchor=\"middle\">" +
         escape(options.x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt(kTop + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         fmt(kTop + plot_h / 2) + ")\">" + escape(options.y_label) + "</text>\n";

  for (std::size_t l = 0; l < L; ++l) {
    const char* colour = kPalette[l % kPalette.size()];
    std::string points;
    for (std::size_t t = 0; t < T; ++t) {
      if (t) points += ' ';
      points += fmt(x_of(t)) + "," + fmt(y_of(static_cast<double>(table.at(t, l))));
    }
    svg += "<polyline class=\"leaf\" data-label=\"" + escape(table.leaves[l]) + "\" fill=\"none\" stroke=\"" + colour +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    const double ly = kTop + 10 + 20 * static_cast<double>(l);
    const double lx = kLeft + plot_w + 20;
    svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 24) + "\" y2=\"" + fmt(ly) +
           "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(ly + 4) + "\">" + escape(table.leaves[l]) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const DistributionTable& table, const std::filesystem::path& path, const PlotOptions& options) {
  const std::string svg = render_plot_svg(table, options);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write plot to '" + path.string() + "'");
  out << svg;
  if (!out) throw DataError("failed writing plot to '" + path.string() + "'");
}

}  // namespace detect
