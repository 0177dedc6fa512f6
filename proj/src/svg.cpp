#include "tikhoflow/svg.hpp"

#include "tikhoflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tikhoflow::svg {

namespace {

constexpr double W = 860.0, H = 600.0;
constexpr double ML = 80.0, MR = 30.0, MT = 50.0, MB = 60.0;
const char* PALETTE[] = {"#1f6fb4", "#d4572c", "#2c8a4b", "#8450a8", "#b03060",
                         "#557788"};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double to_unit(double v) const {
    const double a = log ? std::log10(v) : v;
    const double l = log ? std::log10(lo) : lo;
    const double h = log ? std::log10(hi) : hi;
    return (a - l) / (h - l);
  }
};

} // namespace

void render_svg(const std::filesystem::path& path, const csv::Table& table,
                const PlotSpec& spec) {
  if (table.column_index(spec.x_column) < 0) throw MissingColumn(spec.x_column);
  for (const auto& y : spec.y_columns)
    if (table.column_index(y) < 0) throw MissingColumn(y);
  if (spec.y_columns.empty()) throw MissingColumn("(no y columns requested)");

  const std::vector<double> xs = table.column(spec.x_column);

  auto drawable = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    if (spec.loglog && (x <= 0.0 || y <= 0.0)) return false;
    return true;
  };

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  size_t total_points = 0;
  std::vector<std::vector<double>> ys;
  for (const auto& name : spec.y_columns) {
    ys.push_back(table.column(name));
    for (size_t i = 0; i < xs.size(); ++i)
      if (drawable(xs[i], ys.back()[i])) {
        ++total_points;
        xlo = std::min(xlo, xs[i]);
        xhi = std::max(xhi, xs[i]);
        ylo = std::min(ylo, ys.back()[i]);
        yhi = std::max(yhi, ys.back()[i]);
      }
  }
  if (total_points < 2 || !(xlo < xhi))
    throw EmptyData("need at least 2 drawable points with distinct x");
  if (!(ylo < yhi)) {
    // flat data still plots; widen the range symmetrically
    const double pad = spec.loglog ? 10.0 : (std::abs(ylo) + 1.0);
    if (spec.loglog) {
      ylo /= pad;
      yhi *= pad;
    } else {
      ylo -= pad;
      yhi += pad;
    }
  }

  Axis ax{xlo, xhi, spec.loglog};
  Axis ay{ylo, yhi, spec.loglog};
  auto px = [&](double v) { return ML + ax.to_unit(v) * (W - ML - MR); };
  auto py = [&](double v) { return H - MB - ay.to_unit(v) * (H - MT - MB); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  if (!spec.title.empty())
    out << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" "
           "font-family=\"monospace\" font-size=\"16\">" << spec.title << "</text>\n";

  // frame
  out << "<rect x=\"" << ML << "\" y=\"" << MT << "\" width=\"" << (W - ML - MR)
      << "\" height=\"" << (H - MT - MB)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // decade ticks
  auto ticks = [&](const Axis& a) {
    std::vector<double> t;
    if (a.log) {
      const int klo = static_cast<int>(std::ceil(std::log10(a.lo) - 1e-9));
      const int khi = static_cast<int>(std::floor(std::log10(a.hi) + 1e-9));
      for (int k = klo; k <= khi; ++k) t.push_back(std::pow(10.0, k));
    } else {
      for (int k = 0; k <= 4; ++k) t.push_back(a.lo + (a.hi - a.lo) * k / 4.0);
    }
    return t;
  };
  for (double tx : ticks(ax)) {
    const double X = px(tx);
    out << "<line x1=\"" << fmt(X) << "\" y1=\"" << (H - MB) << "\" x2=\"" << fmt(X)
        << "\" y2=\"" << (H - MB + 6) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(X) << "\" y=\"" << (H - MB + 22)
        << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">"
        << fmt(tx) << "</text>\n";
  }
  for (double ty : ticks(ay)) {
    const double Y = py(ty);
    out << "<line x1=\"" << (ML - 6) << "\" y1=\"" << fmt(Y) << "\" x2=\"" << ML
        << "\" y2=\"" << fmt(Y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (ML - 10) << "\" y=\"" << fmt(Y + 4)
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">"
        << fmt(ty) << "</text>\n";
  }
  out << "<text x=\"" << (ML + (W - ML - MR) / 2) << "\" y=\"" << (H - 14)
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">"
      << spec.x_column << "</text>\n";

  // data polylines
  for (size_t c = 0; c < ys.size(); ++c) {
    out << "<polyline fill=\"none\" stroke=\"" << PALETTE[c % 6]
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (size_t i = 0; i < xs.size(); ++i) {
      if (!drawable(xs[i], ys[c][i])) continue;
      out << (first ? "" : " ") << fmt(px(xs[i])) << "," << fmt(py(ys[c][i]));
      first = false;
    }
    out << "\"/>\n";
    out << "<text x=\"" << (ML + 12) << "\" y=\"" << (MT + 18 + 16 * c)
        << "\" font-family=\"monospace\" font-size=\"13\" fill=\"" << PALETTE[c % 6]
        << "\">" << spec.y_columns[c] << "</text>\n";
  }

  // power-law guides through the last drawable point of the first series
  if (!spec.reference_slopes.empty() && spec.loglog) {
    double x_anchor = 0.0, y_anchor = 0.0;
    for (size_t i = xs.size(); i-- > 0;)
      if (drawable(xs[i], ys[0][i])) {
        x_anchor = xs[i];
        y_anchor = ys[0][i];
        break;
      }
    for (size_t g = 0; g < spec.reference_slopes.size(); ++g) {
      const double e = spec.reference_slopes[g];
      auto guide = [&](double x) { return y_anchor * std::pow(x / x_anchor, e); };
      out << "<polyline fill=\"none\" stroke=\"#666666\" stroke-width=\"1\" "
             "stroke-dasharray=\"6,4\" points=\"";
      const int segs = 64;
      bool first = true;
      for (int i = 0; i <= segs; ++i) {
        const double x =
            std::pow(10.0, std::log10(xlo) + (std::log10(xhi) - std::log10(xlo)) * i / segs);
        const double y = guide(x);
        if (y < ylo || y > yhi) continue;
        out << (first ? "" : " ") << fmt(px(x)) << "," << fmt(py(y));
        first = false;
      }
      out << "\"/>\n";
      out << "<text x=\"" << (W - MR - 8) << "\" y=\"" << (MT + 18 + 16 * g)
          << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\" "
             "fill=\"#666666\">t^" << fmt(e) << "</text>\n";
    }
  }

  out << "</svg>\n";
  csv::write_text(path, out.str());
}

} // namespace tikhoflow::svg
