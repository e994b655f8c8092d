#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qspec::cli {

namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string f4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
    lo -= pad;
    hi += pad;
  }
}

Frame frame_for(const std::vector<double>& x, const std::vector<double>& y) {
  Frame f;
  if (!x.empty()) {
    f.x0 = *std::min_element(x.begin(), x.end());
    f.x1 = *std::max_element(x.begin(), x.end());
  }
  if (!y.empty()) {
    f.y0 = std::min(0.0, *std::min_element(y.begin(), y.end()));
    f.y1 = *std::max_element(y.begin(), y.end());
  }
  widen(f.x0, f.x1);
  widen(f.y0, f.y1);
  return f;
}

void open(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"14\">"
     << escape(title) << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xl, const std::string& yl,
          bool y_ticks = true) {
  const double xa = kHeight - kBottom, ya = kLeft;
  os << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << ya << "\" y1=\"" << xa << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << xa
     << "\"/>\n";
  os << "<line x1=\"" << ya << "\" y1=\"" << kTop << "\" x2=\"" << ya << "\" y2=\"" << xa << "\"/>\n";
  os << "</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << ya << "\" y=\"" << xa + 16 << "\" text-anchor=\"middle\">" << label(f.x0)
     << "</text>\n";
  os << "<text x=\"" << kWidth - kRight << "\" y=\"" << xa + 16 << "\" text-anchor=\"end\">"
     << label(f.x1) << "</text>\n";
  if (y_ticks) {
    os << "<text x=\"" << ya - 4 << "\" y=\"" << xa << "\" text-anchor=\"end\">" << label(f.y0)
       << "</text>\n";
    os << "<text x=\"" << ya - 4 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">" << label(f.y1)
       << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2 << "\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 16 "
     << (kTop + kHeight - kBottom) / 2 << ")\">" << escape(yl) << "</text>\n";
  os << "</g>\n";
}

void polyline(std::ostringstream& os, const Frame& f, const std::vector<double>& x,
              const std::vector<double>& y) {
  if (x.empty()) return;
  os << "<polyline class=\"data\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) os << ' ';
    os << f4(f.px(x[i])) << ',' << f4(f.py(y[i]));
  }
  os << "\"/>\n";
}

}  // namespace

std::string profile_svg(const std::vector<double>& x, const std::vector<double>& u,
                        const std::vector<double>& zeros, const std::string& title) {
  std::ostringstream os;
  const Frame f = frame_for(x, u);
  open(os, title);
  axes(os, f, "rho", "u");
  if (f.y0 < 0.0 && f.y1 > 0.0) {
    os << "<line stroke=\"gray\" stroke-dasharray=\"4 3\" x1=\"" << kLeft << "\" y1=\"" << f4(f.py(0))
       << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << f4(f.py(0)) << "\"/>\n";
  }
  polyline(os, f, x, u);
  for (double z : zeros) {
    os << "<circle class=\"zero\" cx=\"" << f4(f.px(z)) << "\" cy=\"" << f4(f.py(0))
       << "\" r=\"4\" fill=\"none\" stroke=\"crimson\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string spectrum_svg(const std::vector<double>& values, const std::vector<double>& cluster_points,
                         const std::string& title) {
  std::ostringstream os;
  std::vector<double> all = values;
  all.insert(all.end(), cluster_points.begin(), cluster_points.end());
  Frame f = frame_for(all, {});
  open(os, title);
  axes(os, f, "Lambda", "", false);
  const double base = kHeight - kBottom;
  for (double v : values) {
    os << "<line class=\"rug\" stroke=\"steelblue\" x1=\"" << f4(f.px(v)) << "\" y1=\"" << base
       << "\" x2=\"" << f4(f.px(v)) << "\" y2=\"" << base - 120 << "\"/>\n";
  }
  for (double c : cluster_points) {
    os << "<line class=\"cluster\" stroke=\"crimson\" stroke-width=\"2\" x1=\"" << f4(f.px(c))
       << "\" y1=\"" << base << "\" x2=\"" << f4(f.px(c)) << "\" y2=\"" << kTop + 20 << "\"/>\n";
    os << "<text font-family=\"sans-serif\" font-size=\"11\" fill=\"crimson\" x=\"" << f4(f.px(c))
       << "\" y=\"" << kTop + 14 << "\" text-anchor=\"middle\">" << label(c) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string sweep_svg(const std::vector<double>& x, const std::vector<double>& y,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::string& title) {
  std::ostringstream os;
  const Frame f = frame_for(x, y);
  open(os, title);
  axes(os, f, xlabel, ylabel);
  polyline(os, f, x, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    os << "<circle class=\"point\" cx=\"" << f4(f.px(x[i])) << "\" cy=\"" << f4(f.py(y[i]))
       << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace qspec::cli
