#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gnb/sweep.hpp"

namespace gnb {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string model_label(ModelKind k) { return k == ModelKind::kMlp ? "MLP (tuned)" : "GCN"; }

/// Plain-text mean ± std table (metrics scaled to percent): one row per model,
/// one column per (dataset, x). With random_row, a "Random 50.0 ± 0.0" row
/// (the ROC AUC of an uninformative scorer) comes first.
inline std::string render_table(const std::vector<StudyPoint>& points, bool random_row) {
  std::vector<std::pair<std::string, double>> columns;
  std::vector<ModelKind> models;
  for (const auto& p : points) {
    const std::pair<std::string, double> key{p.dataset, p.x};
    if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
    if (std::find(models.begin(), models.end(), p.model) == models.end()) models.push_back(p.model);
  }
  std::sort(models.begin(), models.end());
  bool one_dataset = true;
  for (const auto& c : columns) one_dataset = one_dataset && c.first == columns.front().first;
  std::vector<std::string> head{"Model"};
  for (const auto& [ds, x] : columns) {
    head.push_back(one_dataset && columns.size() > 1 ? "x=" + format_double(x) : ds);
  }
  std::vector<std::vector<std::string>> rows{head};
  if (random_row) {
    std::vector<std::string> row{"Random"};
    row.resize(head.size(), "50.0 ± 0.0");
    rows.push_back(row);
  }
  for (auto m : models) {
    std::vector<std::string> row{model_label(m)};
    for (const auto& key : columns) {
      std::string cell = "-";
      for (const auto& p : points) {
        if (p.model == m && p.dataset == key.first && p.x == key.second) {
          cell = fixed(100.0 * p.test.mean, 1) + " ± " + fixed(100.0 * p.test.std, 1);
        }
      }
      row.push_back(cell);
    }
    rows.push_back(row);
  }
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;  // count UTF-8 code points
    return w;
  };
  std::vector<std::size_t> widths(head.size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], width(r[i]));
  }
  std::ostringstream out;
  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    for (std::size_t i = 0; i < rows[ri].size(); ++i) {
      out << (i ? " | " : "") << rows[ri][i] << std::string(widths[i] - width(rows[ri][i]), ' ');
    }
    out << '\n';
    if (ri == 0) {
      for (std::size_t i = 0; i < widths.size(); ++i) out << (i ? "-+-" : "") << std::string(widths[i], '-');
      out << '\n';
    }
  }
  return out.str();
}

/// Self-contained SVG line plot: one series per model with a shaded
/// mean ± 1 std band. A single-point series is drawn as a marker only.
inline std::string render_svg(const std::vector<StudyPoint>& points, const std::string& x_label,
                              const std::string& y_label) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 150, kTop = 30, kBottom = 60;
  std::map<ModelKind, std::vector<const StudyPoint*>> series;
  for (const auto& p : points) series[p.model].push_back(&p);
  for (auto& [m, ps] : series) {
    std::stable_sort(ps.begin(), ps.end(), [](auto a, auto b) { return a->x < b->x; });
  }
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (!points.empty()) {
    xmin = xmax = points.front().x;
    ymin = ymax = 100 * points.front().test.mean;
    for (const auto& p : points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, 100 * (p.test.mean - p.test.std));
      ymax = std::max(ymax, 100 * (p.test.mean + p.test.std));
    }
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 1;
    xmax += 1;
  }
  const double ypad = std::max(1.0, 0.1 * (ymax - ymin));
  ymin = std::floor(ymin - ypad);
  ymax = std::ceil(ymax + ypad);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };
  auto pt = [&](double x, double y) { return fixed(sx(x), 2) + "," + fixed(sy(y), 2); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph << "\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph << "\"/>\n";
  out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    out << "<text x=\"" << fixed(sx(xv), 2) << "\" y=\"" << fixed(kTop + ph + 16, 2) << "\" text-anchor=\"middle\">"
        << fixed(xv, 2) << "</text>\n";
    out << "<text x=\"" << fixed(kLeft - 6, 2) << "\" y=\"" << fixed(sy(yv) + 4, 2) << "\" text-anchor=\"end\">"
        << fixed(yv, 1) << "</text>\n";
  }
  out << "<text x=\"" << fixed(kLeft + pw / 2, 2) << "\" y=\"" << fixed(kH - 15, 2) << "\" text-anchor=\"middle\">"
      << x_label << "</text>\n";
  out << "<text x=\"15\" y=\"" << fixed(kTop + ph / 2, 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << fixed(kTop + ph / 2, 2) << ")\">" << y_label << "</text>\n</g>\n";

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::size_t si = 0;
  for (const auto& [model, ps] : series) {
    const char* color = kColors[si % 4];
    if (ps.size() >= 2) {
      out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (const auto* p : ps) out << pt(p->x, 100 * (p->test.mean + p->test.std)) << ' ';
      for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
        out << pt((*it)->x, 100 * ((*it)->test.mean - (*it)->test.std)) << (it + 1 == ps.rend() ? "" : " ");
      }
      out << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < ps.size(); ++i) out << (i ? " " : "") << pt(ps[i]->x, 100 * ps[i]->test.mean);
      out << "\"/>\n";
    }
    for (const auto* p : ps) {
      out << "<circle cx=\"" << fixed(sx(p->x), 2) << "\" cy=\"" << fixed(sy(100 * p->test.mean), 2)
          << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 10 + 20.0 * static_cast<double>(si);
    out << "<rect x=\"" << fixed(kLeft + pw + 15, 2) << "\" y=\"" << fixed(ly - 8, 2) << "\" width=\"12\" height=\"12\" fill=\""
        << color << "\"/>\n<text x=\"" << fixed(kLeft + pw + 32, 2) << "\" y=\"" << fixed(ly + 2, 2)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << model_label(model) << "</text>\n";
    ++si;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gnb
