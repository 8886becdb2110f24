#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "pate/stats.hpp"

namespace pate::svg {

// Fixed two-decimal formatting keeps every coordinate byte-stable.
inline std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step)
    ticks.push_back(v);
  return ticks;
}

namespace detail {

inline constexpr double kW = 800.0, kH = 600.0;
inline constexpr double kML = 90.0, kMR = 30.0, kMT = 50.0, kMB = 60.0;

struct Frame {
  double xlo, xhi, ylo, yhi;

  double px(double x) const { return kML + (x - xlo) / (xhi - xlo) * (kW - kML - kMR); }
  double py(double y) const { return kH - kMB - (y - ylo) / (yhi - ylo) * (kH - kMT - kMB); }
};

inline void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
    return;
  }
  const double pad = (hi - lo) * 0.05;
  lo -= pad;
  hi += pad;
}

inline std::string open_doc(double w, double h, const std::string& title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(w) + "\" height=\"" +
       fmt2(h) + "\" viewBox=\"0 0 " + fmt2(w) + " " + fmt2(h) + "\">\n";
  s += "<rect width=\"" + fmt2(w) + "\" height=\"" + fmt2(h) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt2(w / 2) +
       "\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">" +
       escape(title) + "</text>\n";
  return s;
}

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<line x1=\"" + fmt2(kML) + "\" y1=\"" + fmt2(kH - kMB) + "\" x2=\"" + fmt2(kW - kMR) +
       "\" y2=\"" + fmt2(kH - kMB) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt2(kML) + "\" y1=\"" + fmt2(kMT) + "\" x2=\"" + fmt2(kML) +
       "\" y2=\"" + fmt2(kH - kMB) + "\" stroke=\"black\"/>\n";
  for (double t : nice_ticks(f.xlo, f.xhi)) {
    if (t < f.xlo || t > f.xhi) continue;
    const double x = f.px(t);
    s += "<line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(kH - kMB) + "\" x2=\"" + fmt2(x) +
         "\" y2=\"" + fmt2(kH - kMB + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt2(x) + "\" y=\"" + fmt2(kH - kMB + 20) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + fmt2(t) +
         "</text>\n";
  }
  for (double t : nice_ticks(f.ylo, f.yhi)) {
    if (t < f.ylo || t > f.yhi) continue;
    const double y = f.py(t);
    s += "<line x1=\"" + fmt2(kML - 5) + "\" y1=\"" + fmt2(y) + "\" x2=\"" + fmt2(kML) +
         "\" y2=\"" + fmt2(y) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt2(kML - 8) + "\" y=\"" + fmt2(y + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + fmt2(t) +
         "</text>\n";
  }
  s += "<text x=\"" + fmt2((kML + kW - kMR) / 2) + "\" y=\"" + fmt2(kH - 15) +
       "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
       escape(xlabel) + "</text>\n";
  s += "<text x=\"20\" y=\"" + fmt2((kMT + kH - kMB) / 2) +
       "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
       fmt2((kMT + kH - kMB) / 2) + ")\">" + escape(ylabel) + "</text>\n";
  return s;
}

inline std::string points_chart(const std::string& title, const std::string& xlabel,
                                const std::string& ylabel,
                                const std::vector<std::pair<double, double>>& pts,
                                bool diagonal_reference) {
  double xlo = pts.empty() ? 0.0 : pts[0].first, xhi = xlo;
  double ylo = pts.empty() ? 0.0 : pts[0].second, yhi = ylo;
  for (const auto& [x, y] : pts) {
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
    ylo = std::min(ylo, y);
    yhi = std::max(yhi, y);
  }
  if (diagonal_reference) {
    xlo = ylo = std::min(xlo, ylo);
    xhi = yhi = std::max(xhi, yhi);
  }
  pad_range(xlo, xhi);
  pad_range(ylo, yhi);
  const Frame f{xlo, xhi, ylo, yhi};

  std::string s = open_doc(kW, kH, title);
  s += axes(f, xlabel, ylabel);
  if (diagonal_reference) {
    const double a = std::max(xlo, ylo), b = std::min(xhi, yhi);
    s += "<line x1=\"" + fmt2(f.px(a)) + "\" y1=\"" + fmt2(f.py(a)) + "\" x2=\"" +
         fmt2(f.px(b)) + "\" y2=\"" + fmt2(f.py(b)) +
         "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
  } else if (ylo < 0.0 && yhi > 0.0) {
    s += "<line x1=\"" + fmt2(kML) + "\" y1=\"" + fmt2(f.py(0.0)) + "\" x2=\"" +
         fmt2(kW - kMR) + "\" y2=\"" + fmt2(f.py(0.0)) +
         "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& [x, y] : pts)
    s += "<circle cx=\"" + fmt2(f.px(x)) + "\" cy=\"" + fmt2(f.py(y)) +
         "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.55\"/>\n";
  s += "</svg>\n";
  return s;
}

inline std::string heat_color(double r) {
  // Diverging blue (-1) -> white (0) -> red (+1).
  r = std::clamp(r, -1.0, 1.0);
  const auto lerp = [](int a, int b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
  };
  int red, green, blue;
  if (r < 0.0) {
    const double t = r + 1.0;  // 0 at -1, 1 at 0
    red = lerp(0x21, 0xf7, t);
    green = lerp(0x66, 0xf7, t);
    blue = lerp(0xac, 0xf7, t);
  } else {
    red = lerp(0xf7, 0xb2, r);
    green = lerp(0xf7, 0x18, r);
    blue = lerp(0xf7, 0x2b, r);
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", red, green, blue);
  return buf;
}

}  // namespace detail

inline std::string scatter_chart(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel,
                                 const std::vector<std::pair<double, double>>& pts) {
  return detail::points_chart(title, xlabel, ylabel, pts, /*diagonal_reference=*/true);
}

inline std::string residual_chart(const std::string& title, const std::string& xlabel,
                                  const std::string& ylabel,
                                  const std::vector<std::pair<double, double>>& pts) {
  return detail::points_chart(title, xlabel, ylabel, pts, /*diagonal_reference=*/false);
}

inline std::string histogram_chart(const std::string& title, const std::string& xlabel,
                                   const std::vector<double>& values, int bins = 30) {
  using namespace detail;
  double lo = values.empty() ? 0.0 : values[0], hi = lo;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  std::vector<std::size_t> count(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * bins);
    if (b >= count.size()) b = count.size() - 1;
    count[b] += 1;
  }
  std::size_t peak = 1;
  for (std::size_t c : count) peak = std::max(peak, c);

  double xlo = lo, xhi = hi, ylo = 0.0, yhi = static_cast<double>(peak) * 1.05;
  const Frame f{xlo, xhi, ylo, yhi};
  std::string s = open_doc(kW, kH, title);
  s += axes(f, xlabel, "count");
  const double bw = (hi - lo) / bins;
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (count[b] == 0) continue;
    const double x0 = f.px(lo + bw * static_cast<double>(b));
    const double x1 = f.px(lo + bw * static_cast<double>(b + 1));
    const double y = f.py(static_cast<double>(count[b]));
    s += "<rect x=\"" + fmt2(x0) + "\" y=\"" + fmt2(y) + "\" width=\"" + fmt2(x1 - x0) +
         "\" height=\"" + fmt2(f.py(0.0) - y) +
         "\" fill=\"#1f77b4\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

inline std::string heatmap_chart(const std::string& title, const CorrelationMatrix& m) {
  const std::size_t n = m.size();
  const double cell = 24.0, left = 70.0, top = 70.0;
  const double w = left + cell * static_cast<double>(n) + 30.0;
  const double h = top + cell * static_cast<double>(n) + 30.0;
  std::string s = detail::open_doc(w, h, title);
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = left + cell * (static_cast<double>(i) + 0.5);
    s += "<text x=\"" + fmt2(cx) + "\" y=\"" + fmt2(top - 8) +
         "\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"start\" transform=\"rotate(-60 " +
         fmt2(cx) + " " + fmt2(top - 8) + ")\">" + escape(m.labels[i]) + "</text>\n";
    s += "<text x=\"" + fmt2(left - 6) + "\" y=\"" +
         fmt2(top + cell * (static_cast<double>(i) + 0.5) + 3) +
         "\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"end\">" +
         escape(m.labels[i]) + "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = left + cell * static_cast<double>(j);
      const double y = top + cell * static_cast<double>(i);
      const auto& v = m.at(i, j);
      const std::string fill = v ? detail::heat_color(*v) : std::string("#cccccc");
      s += "<rect x=\"" + fmt2(x) + "\" y=\"" + fmt2(y) + "\" width=\"" + fmt2(cell) +
           "\" height=\"" + fmt2(cell) + "\" fill=\"" + fill +
           "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

inline std::string bar_chart(const std::string& title, const std::string& xlabel,
                             const std::vector<std::pair<std::string, double>>& bars) {
  const double row = 22.0, left = 110.0, top = 50.0;
  const double w = 800.0;
  const double h = top + row * static_cast<double>(bars.size()) + 40.0;
  double peak = 1.0;
  for (const auto& [_, v] : bars) peak = std::max(peak, v);
  const double span = w - left - 60.0;

  std::string s = detail::open_doc(w, h, title);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double y = top + row * static_cast<double>(i);
    const double bw = bars[i].second / peak * span;
    s += "<text x=\"" + fmt2(left - 6) + "\" y=\"" + fmt2(y + row * 0.7) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
         escape(bars[i].first) + "</text>\n";
    s += "<rect x=\"" + fmt2(left) + "\" y=\"" + fmt2(y + 3) + "\" width=\"" + fmt2(bw) +
         "\" height=\"" + fmt2(row - 6) + "\" fill=\"#1f77b4\"/>\n";
    s += "<text x=\"" + fmt2(left + bw + 5) + "\" y=\"" + fmt2(y + row * 0.7) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + fmt2(bars[i].second) +
         "</text>\n";
  }
  s += "<text x=\"" + fmt2((left + w) / 2) + "\" y=\"" + fmt2(h - 12) +
       "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
       escape(xlabel) + "</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace pate::svg
