#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace sibandit {

//! One plotted series: a center line and an optional +- band.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band; //!< half-width around y; empty for a bare line
};

//! Self-contained SVG line chart with axes, tick labels and a legend.
//! Degenerate data (empty or constant series) renders as a flat line.
class SvgChart {
public:
  SvgChart(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label))
  {}

  void add_series(SvgSeries series) { series_.push_back(std::move(series)); }

  std::string render() const
  {
    const double width = 720, height = 480;
    const double ml = 72, mr = 24, mt = 40, mb = 56;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const SvgSeries& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double lo = s.y[i] - (i < s.band.size() ? s.band[i] : 0.0);
        const double hi = s.y[i] + (i < s.band.size() ? s.band[i] : 0.0);
        if (!any) {
          xmin = xmax = s.x[i];
          ymin = lo;
          ymax = hi;
          any = true;
        }
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, lo);
        ymax = std::max(ymax, hi);
      }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title_ << "</text>\n";

    // axes and ticks
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double fx = xmin + (xmax - xmin) * i / 5.0;
      const double fy = ymin + (ymax - ymin) * i / 5.0;
      out << "<line x1=\"" << px(fx) << "\" y1=\"" << height - mb << "\" x2=\"" << px(fx)
          << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << px(fx) << "\" y=\"" << height - mb + 20
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << fmt(fx) << "</text>\n";
      out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml
          << "\" y2=\"" << py(fy) << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
          << fmt(fy) << "</text>\n";
    }
    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << x_label_ << "</text>\n";
    out << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << (mt + height - mb) / 2 << ")\">" << y_label_
        << "</text>\n";

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    for (std::size_t s = 0; s < series_.size(); ++s) {
      const SvgSeries& ser = series_[s];
      const char* color = kColors[s % 8];
      if (!ser.band.empty() && ser.band.size() == ser.y.size()) {
        out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < ser.x.size(); ++i)
          out << px(ser.x[i]) << ',' << py(ser.y[i] + ser.band[i]) << ' ';
        for (std::size_t i = ser.x.size(); i-- > 0;)
          out << px(ser.x[i]) << ',' << py(ser.y[i] - ser.band[i]) << ' ';
        out << "\"/>\n";
      }
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
      for (std::size_t i = 0; i < ser.x.size(); ++i)
        out << px(ser.x[i]) << ',' << py(ser.y[i]) << ' ';
      out << "\"/>\n";
      // legend entry
      const double ly = mt + 18.0 * static_cast<double>(s);
      out << "<line x1=\"" << width - mr - 150 << "\" y1=\"" << ly << "\" x2=\""
          << width - mr - 125 << "\" y2=\"" << ly << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << width - mr - 118 << "\" y=\"" << ly + 4
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << ser.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
  }

private:
  static std::string fmt(double v)
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
  }

  std::string title_, x_label_, y_label_;
  std::vector<SvgSeries> series_;
};

} // namespace sibandit
