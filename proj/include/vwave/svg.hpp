#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace vwave::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool markers = true;
  bool dashed = false;
};

inline Series named(std::string label, bool markers = true, bool dashed = false) {
  Series s;
  s.label = std::move(label);
  s.markers = markers;
  s.dashed = dashed;
  return s;
}

/// Minimal static line plot. Non-positive values are dropped on log axes.
class Plot {
 public:
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
  std::vector<std::string> notes;  // drawn top-left inside the frame

  std::string render(int width = 640, int height = 420) const {
    const double left = 72, right = 160, top = 36, bottom = 52;
    const double pw = width - left - right, ph = height - top - bottom;
    double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
    for (const auto& s : series)
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!usable(s.x[i], log_x) || !usable(s.y[i], log_y)) continue;
        const double tx = tr(s.x[i], log_x), ty = tr(s.y[i], log_y);
        x0 = std::min(x0, tx), x1 = std::max(x1, tx), y0 = std::min(y0, ty), y1 = std::max(y1, ty);
      }
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"sans-serif\" "
                  "font-size=\"11\">\n<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                  width, height);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"20\" font-size=\"13\">%s</text>\n", left, escape(title).c_str());
    out += buf;
    if (!(x0 <= x1) || !(y0 <= y1)) {
      std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\">no plottable data</text>\n</svg>\n", left,
                    top + ph / 2);
      return out + buf;
    }
    pad(x0, x1);
    pad(y0, y1);
    auto px = [&](double v) { return left + (tr(v, log_x) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return top + ph - (tr(v, log_y) - y0) / (y1 - y0) * ph; };

    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                  left, top, pw, ph);
    out += buf;
    for (double t : ticks(x0, x1, log_x)) {
      const double X = left + (t - x0) / (x1 - x0) * pw;
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#ddd\"/>"
                    "<text x=\"%.2f\" y=\"%g\" text-anchor=\"middle\">%s</text>\n",
                    X, top, X, top + ph, X, top + ph + 14, label(t, log_x).c_str());
      out += buf;
    }
    for (double t : ticks(y0, y1, log_y)) {
      const double Y = top + ph - (t - y0) / (y1 - y0) * ph;
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#ddd\"/>"
                    "<text x=\"%g\" y=\"%.2f\" text-anchor=\"end\">%s</text>\n",
                    left, Y, left + pw, Y, left - 4, Y + 4, label(t, log_y).c_str());
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n", left + pw / 2,
                  static_cast<double>(height) - 12, escape(xlabel).c_str());
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"14\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 14 %g)\">%s</text>\n",
                  top + ph / 2, top + ph / 2, escape(ylabel).c_str());
    out += buf;

    for (std::size_t k = 0; k < series.size(); ++k) {
      const auto& s = series[k];
      const char* color = palette[k % palette.size()];
      std::string pts;
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!usable(s.x[i], log_x) || !usable(s.y[i], log_y)) continue;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
        pts += buf;
        if (s.markers) {
          std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", px(s.x[i]),
                        py(s.y[i]), color);
          out += buf;
        }
      }
      std::snprintf(buf, sizeof buf, "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\"%s points=\"", color,
                    s.dashed ? " stroke-dasharray=\"5,3\"" : "");
      out += buf + pts + "\"/>\n";
      std::snprintf(buf, sizeof buf,
                    "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"/>"
                    "<text x=\"%g\" y=\"%g\">%s</text>\n",
                    left + pw + 10, top + 10 + 16.0 * static_cast<double>(k), left + pw + 28,
                    top + 10 + 16.0 * static_cast<double>(k), color, left + pw + 32,
                    top + 14 + 16.0 * static_cast<double>(k), escape(s.label).c_str());
      out += buf;
    }
    for (std::size_t i = 0; i < notes.size(); ++i) {
      std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"#333\">%s</text>\n", left + 8,
                    top + 16 + 14.0 * static_cast<double>(i), escape(notes[i]).c_str());
      out += buf;
    }
    return out + "</svg>\n";
  }

 private:
  static constexpr double inf = std::numeric_limits<double>::infinity();
  static inline const std::vector<const char*> palette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                       "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  static bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }
  static double tr(double v, bool log) { return log ? std::log10(v) : v; }
  static void pad(double& lo, double& hi) {
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      const double d = 0.05 * (hi - lo);
      lo -= d;
      hi += d;
    }
  }
  static std::vector<double> ticks(double lo, double hi, bool log) {
    std::vector<double> t;
    if (log) {
      const double step = std::max(1.0, std::ceil((hi - lo) / 8.0));
      for (double v = std::ceil(lo); v <= hi; v += step) t.push_back(v);
      return t;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
    for (double v = std::ceil(lo / step) * step; v <= hi; v += step) t.push_back(std::abs(v) < 1e-14 * step ? 0.0 : v);
    return t;
  }
  static std::string label(double t, bool log) {
    char buf[32];
    if (log)
      std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(std::lround(t)));
    else
      std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
  }
  static std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  }
};

}  // namespace vwave::svg
