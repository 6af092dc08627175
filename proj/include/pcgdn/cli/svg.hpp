// Copyright 2026 The pcgdn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "pcgdn/common.hpp"
#include "pcgdn/nn/params.hpp"

// Minimal SVG charts for the CLI. Coordinates are printed with fixed
// precision so output is byte-stable.
namespace pcgdn::cli::svg {

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> p = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return p;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

class Canvas {
 public:
  Canvas(double w, double h) : w_(w), h_(h) {}

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
             "\" fill=\"" + fill + "\"/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + fill +
             "\" fill-opacity=\"0.8\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#333") {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
             "\" stroke=\"" + stroke + "\" stroke-width=\"1\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12, const std::string& anchor = "start") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
             std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
  }

  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w_) + "\" height=\"" + num(h_) +
           "\" viewBox=\"0 0 " + num(w_) + " " + num(h_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write plot '" + path.string() + "'");
    out << str();
  }

 private:
  double w_, h_;
  std::string body_;
};

// Grouped bars: values[g][s] is series s in group g. Non-finite values are
// drawn as a hatched marker at the axis top.
inline Canvas bar_chart(const std::string& title, const std::vector<std::string>& groups,
                        const std::vector<std::string>& series, const std::vector<std::vector<double>>& values,
                        const std::string& y_label) {
  const double W = 120.0 + 90.0 * static_cast<double>(std::max<std::size_t>(groups.size(), 1)), H = 380.0;
  const double x0 = 60, y0 = 40, pw = W - x0 - 140, ph = H - y0 - 70;
  double lo = 0.0, hi = 1e-9;
  for (const auto& g : values)
    for (double v : g)
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  hi += 0.05 * (hi - lo);
  Canvas c(W, H);
  c.text(W / 2, 22, title, 14, "middle");
  c.line(x0, y0, x0, y0 + ph);
  c.line(x0, y0 + ph, x0 + pw, y0 + ph);
  auto ymap = [&](double v) { return y0 + ph - (v - lo) / (hi - lo) * ph; };
  if (lo < 0) c.line(x0, ymap(0), x0 + pw, ymap(0), "#999");
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    c.text(x0 - 6, ymap(v) + 4, num(v), 10, "end");
  }
  c.text(14, y0 + ph / 2, y_label, 11, "start");
  const double gw = pw / static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  const double bw = gw * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    c.text(x0 + gw * (static_cast<double>(g) + 0.5), y0 + ph + 16, groups[g], 11, "middle");
    for (std::size_t s = 0; s < series.size() && s < values[g].size(); ++s) {
      const double v = values[g][s];
      const double x = x0 + gw * static_cast<double>(g) + gw * 0.1 + bw * static_cast<double>(s);
      const auto& col = palette()[s % palette().size()];
      if (!std::isfinite(v)) {
        c.text(x + bw / 2, y0 + 10, "inf", 9, "middle");
        continue;
      }
      const double top = ymap(std::max(v, 0.0)), bot = ymap(std::min(v, 0.0));
      c.rect(x, top, bw * 0.95, std::max(bot - top, 0.5), col);
    }
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    c.rect(W - 130, y0 + 18.0 * static_cast<double>(s), 12, 12, palette()[s % palette().size()]);
    c.text(W - 112, y0 + 10 + 18.0 * static_cast<double>(s), series[s], 11);
  }
  return c;
}

// Scatter coloured by integer label; labels index `names`.
inline Canvas scatter(const std::string& title, const nn::Mat& xy, const std::vector<int>& labels,
                      const std::vector<std::string>& names) {
  const double W = 560, H = 480, x0 = 40, y0 = 40, pw = 380, ph = 400;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (nn::Index i = 0; i < xy.rows(); ++i) {
    xmin = std::min(xmin, xy(i, 0)), xmax = std::max(xmax, xy(i, 0));
    ymin = std::min(ymin, xy(i, 1)), ymax = std::max(ymax, xy(i, 1));
  }
  if (!(xmax > xmin)) xmin -= 1, xmax += 1;
  if (!(ymax > ymin)) ymin -= 1, ymax += 1;
  Canvas c(W, H);
  c.text(W / 2, 22, title, 14, "middle");
  c.line(x0, y0 + ph, x0 + pw, y0 + ph);
  c.line(x0, y0, x0, y0 + ph);
  for (nn::Index i = 0; i < xy.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)];
    const auto& col = l >= 0 ? palette()[static_cast<std::size_t>(l) % palette().size()] : std::string("#000");
    c.circle(x0 + (xy(i, 0) - xmin) / (xmax - xmin) * pw, y0 + ph - (xy(i, 1) - ymin) / (ymax - ymin) * ph, 3.0, col);
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    c.rect(x0 + pw + 30, y0 + 18.0 * static_cast<double>(k), 12, 12, palette()[k % palette().size()]);
    c.text(x0 + pw + 48, y0 + 10 + 18.0 * static_cast<double>(k), names[k], 11);
  }
  return c;
}

// Heat map of a [rows x cols] matrix, row 0 at the bottom (frequency axis).
inline Canvas heatmap(const std::string& title, const nn::Mat& m, double vmin, double vmax,
                      const std::string& x_label, const std::string& y_label) {
  const double W = 640, H = 400, x0 = 60, y0 = 40, pw = 540, ph = 310;
  Canvas c(W, H);
  c.text(W / 2, 22, title, 14, "middle");
  const nn::Index rows = m.rows(), cols = m.cols();
  const nn::Index rstep = std::max<nn::Index>(1, rows / 128), cstep = std::max<nn::Index>(1, cols / 256);
  const double cw = pw * static_cast<double>(cstep) / static_cast<double>(std::max<nn::Index>(cols, 1));
  const double rh = ph * static_cast<double>(rstep) / static_cast<double>(std::max<nn::Index>(rows, 1));
  for (nn::Index r = 0; r < rows; r += rstep)
    for (nn::Index k = 0; k < cols; k += cstep) {
      const double v = std::clamp((m(r, k) - vmin) / std::max(vmax - vmin, 1e-12), 0.0, 1.0);
      char col[8];
      const int R = static_cast<int>(255 * std::min(1.0, 2 * v)), G = static_cast<int>(255 * v * v),
                B = static_cast<int>(255 * (1 - v) * 0.6);
      std::snprintf(col, sizeof col, "#%02x%02x%02x", R, G, B);
      c.rect(x0 + pw * static_cast<double>(k) / static_cast<double>(cols),
             y0 + ph - ph * static_cast<double>(r + rstep) / static_cast<double>(rows), cw + 0.3, rh + 0.3, col);
    }
  c.text(x0 + pw / 2, H - 16, x_label, 11, "middle");
  c.text(8, y0 - 8, y_label, 11);
  return c;
}

}  // namespace pcgdn::cli::svg
