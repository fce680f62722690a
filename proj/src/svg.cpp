/*
 * Copyright 2026 The DriftScope Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "driftscope/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "driftscope/csv.hpp"
#include "driftscope/errors.hpp"

namespace driftscope {
namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 180.0;
constexpr double kTop = 44.0;
constexpr double kBottom = 64.0;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

const char* Color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string C(double v) { return FormatFixed(v, 2); }

int TickDecimals(const std::vector<double>& ticks) {
  if (ticks.size() < 2) return 2;
  const double step = ticks[1] - ticks[0];
  return std::clamp(static_cast<int>(std::ceil(-std::log10(step) - 1e-9)), 0, 6);
}

struct Range {
  double lo;
  double hi;
};

Range Padded(double lo, double hi) {
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::abs(hi) * 0.05, 0.5);
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

void Header(std::ostringstream& s, const std::string& title) {
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << C(kWidth)
    << "\" height=\"" << C(kHeight) << "\" viewBox=\"0 0 " << C(kWidth) << " "
    << C(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<title>" << Escape(title) << "</title>\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << C(kWidth) << "\" height=\"" << C(kHeight)
    << "\" fill=\"#ffffff\"/>\n"
    << "<text x=\"" << C(kLeft + kPlotW / 2) << "\" y=\"24\" text-anchor=\"middle\" "
    << "font-size=\"15\">" << Escape(title) << "</text>\n";
}

void AxisLabels(std::ostringstream& s, const std::string& x_label,
                const std::string& y_label) {
  s << "<text x=\"" << C(kLeft + kPlotW / 2) << "\" y=\"" << C(kHeight - 16)
    << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n"
    << "<text x=\"18\" y=\"" << C(kTop + kPlotH / 2)
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << C(kTop + kPlotH / 2)
    << ")\">" << Escape(y_label) << "</text>\n";
}

void YAxis(std::ostringstream& s, const std::vector<double>& ticks, Range r) {
  const int decimals = TickDecimals(ticks);
  for (double t : ticks) {
    const double y = kTop + kPlotH - (t - r.lo) / (r.hi - r.lo) * kPlotH;
    s << "<line x1=\"" << C(kLeft) << "\" y1=\"" << C(y) << "\" x2=\"" << C(kLeft + kPlotW)
      << "\" y2=\"" << C(y) << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n"
      << "<text x=\"" << C(kLeft - 6) << "\" y=\"" << C(y + 4)
      << "\" text-anchor=\"end\">" << FormatFixed(t, decimals) << "</text>\n";
  }
  s << "<line x1=\"" << C(kLeft) << "\" y1=\"" << C(kTop) << "\" x2=\"" << C(kLeft)
    << "\" y2=\"" << C(kTop + kPlotH) << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n"
    << "<line x1=\"" << C(kLeft) << "\" y1=\"" << C(kTop + kPlotH) << "\" x2=\""
    << C(kLeft + kPlotW) << "\" y2=\"" << C(kTop + kPlotH)
    << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
}

void Legend(std::ostringstream& s, const std::vector<std::string>& names, bool boxes) {
  const double x = kLeft + kPlotW + 16;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 10 + 20.0 * static_cast<double>(i);
    if (boxes) {
      s << "<rect x=\"" << C(x) << "\" y=\"" << C(y - 6) << "\" width=\"18\" height=\"10\" "
        << "fill=\"" << Color(i) << "\"/>\n";
    } else {
      s << "<line x1=\"" << C(x) << "\" y1=\"" << C(y) << "\" x2=\"" << C(x + 18)
        << "\" y2=\"" << C(y) << "\" stroke=\"" << Color(i) << "\" stroke-width=\"2\"/>\n";
    }
    s << "<text x=\"" << C(x + 24) << "\" y=\"" << C(y + 4) << "\">" << Escape(names[i])
      << "</text>\n";
  }
}

}  // namespace

std::vector<double> NiceTicks(double lo, double hi, int target) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi) || target < 1) {
    throw InputError("NiceTicks: need finite lo < hi");
  }
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = 10.0 * mag;
  for (double m : {1.0, 2.0, 2.5, 5.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  const auto first = static_cast<long long>(std::floor(lo / step + 1e-9));
  const auto last = static_cast<long long>(std::ceil(hi / step - 1e-9));
  std::vector<double> ticks;
  for (long long i = first; i <= last; ++i) ticks.push_back(static_cast<double>(i) * step);
  return ticks;
}

std::string RenderLineChart(const LineChart& chart) {
  if (chart.series.empty()) throw InputError("line chart '" + chart.title + "': no series");
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& sr : chart.series) {
    if (sr.x.size() != sr.y.size() || sr.x.empty()) {
      throw InputError("line chart '" + chart.title + "': series '" + sr.name +
                       "' is empty or ragged");
    }
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) {
        throw InputError("line chart '" + chart.title + "': non-finite point");
      }
      xlo = std::min(xlo, sr.x[i]);
      xhi = std::max(xhi, sr.x[i]);
      ylo = std::min(ylo, sr.y[i]);
      yhi = std::max(yhi, sr.y[i]);
    }
  }
  const Range xr = Padded(xlo, xhi);
  const auto yticks = NiceTicks(Padded(ylo, yhi).lo, Padded(ylo, yhi).hi);
  const Range yr{yticks.front(), yticks.back()};
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * kPlotW; };
  auto py = [&](double y) { return kTop + kPlotH - (y - yr.lo) / (yr.hi - yr.lo) * kPlotH; };

  std::ostringstream s;
  Header(s, chart.title);
  YAxis(s, yticks, yr);

  std::vector<double> xs;
  for (const auto& sr : chart.series) xs.insert(xs.end(), sr.x.begin(), sr.x.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (!chart.integer_x || xs.size() > 12) {
    xs = NiceTicks(xr.lo, xr.hi);
    xs.erase(std::remove_if(xs.begin(), xs.end(),
                            [&](double x) { return x < xr.lo - 1e-9 || x > xr.hi + 1e-9; }),
             xs.end());
  }
  const int xdec = chart.integer_x ? 0 : TickDecimals(xs);
  for (double x : xs) {
    s << "<line x1=\"" << C(px(x)) << "\" y1=\"" << C(kTop + kPlotH) << "\" x2=\""
      << C(px(x)) << "\" y2=\"" << C(kTop + kPlotH + 5)
      << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n"
      << "<text x=\"" << C(px(x)) << "\" y=\"" << C(kTop + kPlotH + 19)
      << "\" text-anchor=\"middle\">" << FormatFixed(x, xdec) << "</text>\n";
  }
  AxisLabels(s, chart.x_label, chart.y_label);

  std::vector<std::string> names;
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& sr = chart.series[k];
    names.push_back(sr.name);
    s << "<polyline fill=\"none\" stroke=\"" << Color(k) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      s << (i ? " " : "") << C(px(sr.x[i])) << "," << C(py(sr.y[i]));
    }
    s << "\"/>\n";
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      s << "<circle cx=\"" << C(px(sr.x[i])) << "\" cy=\"" << C(py(sr.y[i]))
        << "\" r=\"3\" fill=\"" << Color(k) << "\"/>\n";
    }
  }
  Legend(s, names, false);
  s << "</svg>\n";
  return s.str();
}

std::string RenderBarChart(const BarChart& chart) {
  if (chart.categories.empty() || chart.series_names.empty() ||
      chart.values.size() != chart.series_names.size()) {
    throw InputError("bar chart '" + chart.title + "': empty or mismatched input");
  }
  double lo = 0.0, hi = 0.0;
  for (const auto& row : chart.values) {
    if (row.size() != chart.categories.size()) {
      throw InputError("bar chart '" + chart.title + "': ragged values");
    }
    for (double v : row) {
      if (!std::isfinite(v)) throw InputError("bar chart '" + chart.title + "': non-finite value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const Range padded = Padded(lo, hi);
  const auto yticks = NiceTicks(padded.lo, padded.hi);
  const Range yr{yticks.front(), yticks.back()};
  auto py = [&](double y) { return kTop + kPlotH - (y - yr.lo) / (yr.hi - yr.lo) * kPlotH; };

  std::ostringstream s;
  Header(s, chart.title);
  YAxis(s, yticks, yr);

  const double slot = kPlotW / static_cast<double>(chart.categories.size());
  const double group = slot * 0.8;
  const double bar = group / static_cast<double>(chart.series_names.size());
  const bool rotate = chart.categories.size() > 6;
  for (std::size_t c = 0; c < chart.categories.size(); ++c) {
    const double cx = kLeft + slot * (static_cast<double>(c) + 0.5);
    for (std::size_t k = 0; k < chart.series_names.size(); ++k) {
      const double v = chart.values[k][c];
      const double x = cx - group / 2 + bar * static_cast<double>(k);
      const double y0 = py(0.0), y1 = py(v);
      s << "<rect x=\"" << C(x) << "\" y=\"" << C(std::min(y0, y1)) << "\" width=\""
        << C(bar) << "\" height=\"" << C(std::abs(y0 - y1)) << "\" fill=\"" << Color(k)
        << "\"/>\n";
    }
    const double ty = kTop + kPlotH + 16;
    s << "<text x=\"" << C(cx) << "\" y=\"" << C(ty) << "\"";
    if (rotate) {
      s << " text-anchor=\"end\" font-size=\"10\" transform=\"rotate(-30 " << C(cx) << " "
        << C(ty) << ")\"";
    } else {
      s << " text-anchor=\"middle\"";
    }
    s << ">" << Escape(chart.categories[c]) << "</text>\n";
  }
  AxisLabels(s, chart.x_label, chart.y_label);
  Legend(s, chart.series_names, true);
  s << "</svg>\n";
  return s.str();
}

}  // namespace driftscope
