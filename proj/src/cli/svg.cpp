#include "uekit/cli/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <string_view>

namespace uekit::cli {

namespace {

constexpr double kPanelW = 360, kPanelH = 260, kMargin = 45;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
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

// Frame with axis labels; returns the group opening tag's content.
std::string axes(double x0, const std::string& xlabel, const std::string& ylabel,
                 const std::string& title) {
  std::string s;
  const double left = x0 + kMargin, top = 30, w = kPanelW - kMargin - 10, h = kPanelH - 60;
  s += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(w) + "\" height=\"" +
       fmt(h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  s += "<text x=\"" + fmt(left + w / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" +
       escape(title) + "</text>\n";
  s += "<text x=\"" + fmt(left + w / 2) + "\" y=\"" + fmt(top + h + 35) +
       "\" text-anchor=\"middle\" font-size=\"11\">" + escape(xlabel) + "</text>\n";
  s += "<text x=\"" + fmt(x0 + 12) + "\" y=\"" + fmt(top + h / 2) +
       "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 " + fmt(x0 + 12) + " " +
       fmt(top + h / 2) + ")\">" + escape(ylabel) + "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double f = t / 4.0;
    s += "<text x=\"" + fmt(left + f * w) + "\" y=\"" + fmt(top + h + 14) +
         "\" text-anchor=\"middle\" font-size=\"9\">" + fmt(f) + "</text>\n";
  }
  return s;
}

}  // namespace

std::string evaluation_svg(const std::string& title,
                           const std::vector<metrics::RiskCoveragePoint>& curve,
                           const metrics::ScoredRecordSet& set, int histogram_bins) {
  const double w = kPanelW - kMargin - 10, h = kPanelH - 60, top = 30;
  std::string s =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(2 * kPanelW) + "\" height=\"" +
      fmt(kPanelH) + "\" font-family=\"sans-serif\">\n";
  s += "<title>" + escape(title) + "</title>\n";

  // Risk-coverage panel, points sorted by coverage.
  s += axes(0, "coverage", "risk", "risk vs coverage");
  std::vector<metrics::RiskCoveragePoint> pts = curve;
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.coverage < b.coverage; });
  std::string path;
  for (const auto& p : pts) {
    path += (path.empty() ? "M" : " L") + fmt(kMargin + p.coverage * w) + " " +
            fmt(top + h - p.risk * h);
  }
  s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";

  // Confidence histogram over [min, max] of the scores.
  const double x0 = kPanelW;
  s += axes(x0, "confidence (normalized)", "count", "confidence by correctness");
  const auto [lo_it, hi_it] = std::minmax_element(set.scores.begin(), set.scores.end());
  const double lo = set.scores.empty() ? 0.0 : *lo_it;
  const double span = set.scores.empty() || *hi_it == lo ? 1.0 : *hi_it - lo;
  std::vector<int> correct(histogram_bins, 0), wrong(histogram_bins, 0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    int b = static_cast<int>((set.scores[i] - lo) / span * histogram_bins);
    b = std::clamp(b, 0, histogram_bins - 1);
    (set.labels[i] ? correct : wrong)[b]++;
  }
  int peak = 1;
  for (int b = 0; b < histogram_bins; ++b) peak = std::max({peak, correct[b], wrong[b]});
  const double bw = w / histogram_bins;
  for (int b = 0; b < histogram_bins; ++b) {
    const double hc = h * correct[b] / peak, hw = h * wrong[b] / peak;
    const double bx = x0 + kMargin + b * bw;
    s += "<rect x=\"" + fmt(bx) + "\" y=\"" + fmt(top + h - hc) + "\" width=\"" + fmt(bw / 2) +
         "\" height=\"" + fmt(hc) + "\" fill=\"#2ca02c\" fill-opacity=\"0.7\"/>\n";
    s += "<rect x=\"" + fmt(bx + bw / 2) + "\" y=\"" + fmt(top + h - hw) + "\" width=\"" +
         fmt(bw / 2) + "\" height=\"" + fmt(hw) + "\" fill=\"#d62728\" fill-opacity=\"0.7\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace uekit::cli
