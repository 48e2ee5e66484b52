// Copyright 2026 The drlqr Authors
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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "drlqr/bench.h"
#include "drlqr/errors.h"

namespace drlqr {
namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 150.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

std::string ColorFor(Method m) {
  switch (m) {
    case Method::kCE:
      return "#1f77b4";
    case Method::kDR:
      return "#2ca02c";
    case Method::kRC:
      return "#d62728";
  }
  return "#000000";
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

// Maps log10 of a data range onto a pixel interval.
struct LogAxis {
  double lo = 0.0;  // log10
  double hi = 1.0;
  double px_lo = 0.0;
  double px_hi = 1.0;

  double operator()(double v) const {
    const double t = (std::log10(v) - lo) / (hi - lo);
    return px_lo + t * (px_hi - px_lo);
  }
};

LogAxis MakeAxis(double vmin, double vmax, double px_lo, double px_hi) {
  LogAxis a;
  a.lo = std::floor(std::log10(vmin) * 4.0) / 4.0;
  a.hi = std::ceil(std::log10(vmax) * 4.0) / 4.0;
  if (a.hi - a.lo < 0.5) {
    a.lo -= 0.25;
    a.hi += 0.25;
  }
  a.px_lo = px_lo;
  a.px_hi = px_hi;
  return a;
}

std::string TickLabel(int exponent) {
  std::ostringstream os;
  os << "1e" << exponent;
  return os.str();
}

}  // namespace

void EmitPlot(const std::vector<SummaryRow>& summary, const std::string& path,
              const std::string& title) {
  double nmin = std::numeric_limits<double>::infinity();
  double nmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = 0.0;
  std::map<Method, std::vector<const SummaryRow*>> series;
  for (const SummaryRow& r : summary) {
    series[r.method].push_back(&r);
    nmin = std::min(nmin, static_cast<double>(r.N));
    nmax = std::max(nmax, static_cast<double>(r.N));
    for (const Cost& c : {r.q25, r.median, r.q75}) {
      if (c.is_finite() && c.value() > 0.0) {
        ymin = std::min(ymin, c.value());
        ymax = std::max(ymax, c.value());
      }
    }
  }
  if (!(nmax > 0.0)) nmin = nmax = 1.0;
  if (!(ymax > 0.0)) ymin = ymax = 1.0;
  const double floor_value = ymin;

  const LogAxis x = MakeAxis(nmin, nmax, kLeft, kWidth - kRight);
  const LogAxis y = MakeAxis(ymin, ymax, kHeight - kBottom, kTop);
  auto yval = [&](const Cost& c) { return y(std::max(c.value(), floor_value)); };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "  <text x=\"" << kWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << Escape(title) << "</text>\n";

  // Decade grid lines and labels.
  for (int e = static_cast<int>(std::ceil(x.lo)); e <= std::floor(x.hi); ++e) {
    const double px = x(std::pow(10.0, e));
    out << "  <line x1=\"" << px << "\" y1=\"" << kTop << "\" x2=\"" << px
        << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"#dddddd\"/>\n"
        << "  <text x=\"" << px << "\" y=\"" << kHeight - kBottom + 18
        << "\" text-anchor=\"middle\">" << TickLabel(e) << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(y.lo)); e <= std::floor(y.hi); ++e) {
    const double py = y(std::pow(10.0, e));
    out << "  <line x1=\"" << kLeft << "\" y1=\"" << py << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << py << "\" stroke=\"#dddddd\"/>\n"
        << "  <text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\">" << TickLabel(e) << "</text>\n";
  }
  out << "  <rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
      << kWidth - kLeft - kRight << "\" height=\"" << kHeight - kTop - kBottom
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "  <text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\""
      << kHeight - 18 << "\" text-anchor=\"middle\">number of trajectories N"
      << "</text>\n"
      << "  <text x=\"22\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 22 "
      << (kTop + kHeight - kBottom) / 2 << ")\">excess cost</text>\n";

  int legend_row = 0;
  for (const auto& [method, rows] : series) {
    const std::string color = ColorFor(method);
    // Interquartile band over the cells where both quartiles are finite.
    std::vector<const SummaryRow*> band;
    for (const SummaryRow* r : rows) {
      if (r->q25.is_finite() && r->q75.is_finite()) band.push_back(r);
    }
    if (band.size() >= 2) {
      out << "  <polygon fill=\"" << color
          << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
      for (const SummaryRow* r : band) {
        out << x(r->N) << ',' << yval(r->q75) << ' ';
      }
      for (auto it = band.rbegin(); it != band.rend(); ++it) {
        out << x((*it)->N) << ',' << yval((*it)->q25) << ' ';
      }
      out << "\"/>\n";
    }
    std::vector<const SummaryRow*> line;
    for (const SummaryRow* r : rows) {
      if (r->median.is_finite()) line.push_back(r);
    }
    if (line.size() >= 2) {
      out << "  <polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"";
      for (const SummaryRow* r : line) {
        out << x(r->N) << ',' << yval(r->median) << ' ';
      }
      out << "\"/>\n";
    }
    for (const SummaryRow* r : line) {
      out << "  <circle cx=\"" << x(r->N) << "\" cy=\"" << yval(r->median)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 14 + 20 * legend_row++;
    const double lx = kWidth - kRight + 16;
    std::string label = MethodName(method);
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    out << "  <line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 24
        << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "  <text x=\"" << lx + 30 << "\" y=\"" << ly + 4 << "\">" << label
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace drlqr
