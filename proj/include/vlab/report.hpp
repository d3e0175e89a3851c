#pragma once

// Experiment reports: pass/fail indicators, CSV tables, a JSON summary and
// standalone SVG line plots.

#include "vlab/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vlab {

inline constexpr const char* report_schema = "vlab-report/1";

/// value OP threshold. "range" means lo <= value <= hi.
struct Indicator {
  std::string name;
  double value = 0.0;
  std::string op = "<";
  double threshold = 0.0;
  double upper = 0.0;
  bool timing = false;  // wall-clock values stay out of the deterministic summary

  bool passed() const {
    if (!std::isfinite(value)) return false;
    if (op == "<") return value < threshold;
    if (op == "<=") return value <= threshold;
    if (op == ">") return value > threshold;
    if (op == ">=") return value >= threshold;
    if (op == "==") return value == threshold;
    if (op == "range") return value >= threshold && value <= upper;
    if (op == "true") return value != 0.0;
    return false;
  }

  std::string describe() const {
    char buf[160];
    if (op == "range") {
      std::snprintf(buf, sizeof buf, "%s = %.4g in [%.4g, %.4g]", name.c_str(), value, threshold, upper);
    } else if (op == "true") {
      std::snprintf(buf, sizeof buf, "%s = %s", name.c_str(), value != 0.0 ? "yes" : "no");
    } else {
      std::snprintf(buf, sizeof buf, "%s = %.4g %s %.4g", name.c_str(), value, op.c_str(), threshold);
    }
    return buf;
  }
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool dashed = false;
};

struct Plot {
  std::string name;
  std::string title, xlabel, ylabel;
  bool logx = true, logy = true;
  std::vector<Series> series;
};

struct Report {
  std::string kind;
  std::string summary;
  std::vector<Indicator> indicators;
  std::map<std::string, double> scalars;
  std::map<std::string, std::string> notes;
  std::vector<Table> tables;
  std::vector<Plot> plots;

  Indicator& check(std::string name, double value, std::string op, double threshold,
                   double upper = 0.0) {
    indicators.push_back({std::move(name), value, std::move(op), threshold, upper});
    return indicators.back();
  }

  bool passed() const {
    return !indicators.empty() &&
           std::all_of(indicators.begin(), indicators.end(), [](const Indicator& i) { return i.passed(); });
  }

  /// First failing indicator, or the first one when all pass.
  std::string headline() const {
    for (const auto& i : indicators) {
      if (!i.passed()) return i.describe();
    }
    return indicators.empty() ? std::string("no indicators") : indicators.front().describe();
  }
};

// ---------------------------------------------------------------------------
// Writers

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error("cannot create output directory '" + dir.string() + "'");
  }
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

inline void write_csv(const Table& t, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

inline nlohmann::ordered_json indicator_json(const Indicator& i) {
  nlohmann::ordered_json j;
  j["name"] = i.name;
  if (i.timing) {
    j["value"] = nullptr;
  } else if (std::isfinite(i.value)) {
    j["value"] = i.value;
  } else {
    j["value"] = nullptr;
  }
  j["op"] = i.op;
  j["threshold"] = i.threshold;
  if (i.op == "range") j["upper"] = i.upper;
  j["passed"] = i.passed();
  return j;
}

/// Deterministic summary: timing values go to a separate block that the
/// caller may omit.
inline nlohmann::ordered_json summary_json(const Report& r,
                                           const std::map<std::string, std::string>& config,
                                           bool with_timing) {
  nlohmann::ordered_json j;
  j["schema"] = report_schema;
  j["kind"] = r.kind;
  j["summary"] = r.summary;
  j["passed"] = r.passed();
  j["config"] = config;
  auto& ind = j["indicators"] = nlohmann::ordered_json::array();
  for (const auto& i : r.indicators) ind.push_back(indicator_json(i));
  auto& sc = j["scalars"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.scalars) {
    if (std::isfinite(v)) sc[k] = v;
    else sc[k] = nullptr;
  }
  j["notes"] = r.notes;
  auto& files = j["tables"] = nlohmann::ordered_json::array();
  for (const auto& t : r.tables) files.push_back(t.name + ".csv");
  if (with_timing) {
    auto& tm = j["timing"] = nlohmann::ordered_json::object();
    for (const auto& i : r.indicators) {
      if (i.timing) tm[i.name] = i.value;
    }
  }
  return j;
}

/// Log-aware line plot as a self-contained SVG document.
inline std::string render_svg(const Plot& p) {
  const double w = 640, h = 420, ml = 80, mr = 160, mt = 40, mb = 60;
  auto tx = [&](double v) { return p.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return p.logy ? std::log10(v) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : p.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((p.logx && !(s.x[i] > 0)) || (p.logy && !(s.y[i] > 0))) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x1 > x0)) x0 -= 1, x1 += 1;
  if (!(y1 > y0)) y0 -= 1, y1 += 1;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double v) { return h - mb - (ty(v) - y0) / (y1 - y0) * (h - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto esc = [](std::string s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  };
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "font-family=\"sans-serif\" font-size=\"12\">\n",
                w, h);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                ml, mt, w - ml - mr, h - mt - mb);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">", (w - mr + ml) / 2);
  out += buf + esc(p.title) + "</text>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">", (w - mr + ml) / 2, h - 15);
  out += buf + esc(p.xlabel) + (p.logx ? " (log10)" : "") + "</text>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"18\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 18 %g)\">",
                (h - mb + mt) / 2, (h - mb + mt) / 2);
  out += buf + esc(p.ylabel) + (p.logy ? " (log10)" : "") + "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4, yv = y0 + (y1 - y0) * t / 4;
    const double sx = ml + (w - ml - mr) * t / 4, sy = h - mb - (h - mt - mb) * t / 4;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%.3g</text>\n", sx, h - mb + 18, xv);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3g</text>\n", ml - 6, sy + 4, yv);
    out += buf;
  }
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const Series& s = p.series[k];
    const char* col = colors[k % 6];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((p.logx && !(s.x[i] > 0)) || (p.logy && !(s.y[i] > 0))) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      pts += buf;
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"2\"" +
           (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + " points=\"" + pts + "\"/>\n";
    if (!s.dashed) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if ((p.logx && !(s.x[i] > 0)) || (p.logy && !(s.y[i] > 0))) continue;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n",
                      px(s.x[i]), py(s.y[i]), col);
        out += buf;
      }
    }
    const double ly = mt + 16 + 18 * static_cast<double>(k);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"%s/>\n",
                  w - mr + 12, ly - 4, w - mr + 36, ly - 4, col, s.dashed ? " stroke-dasharray=\"6,4\"" : "");
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\">", w - mr + 42, ly);
    out += buf + esc(s.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

/// Writes summary.json, one CSV per table and one SVG per plot into dir.
inline void write_report(const Report& r, const std::map<std::string, std::string>& config,
                         const std::filesystem::path& dir) {
  ensure_directory(dir);
  {
    std::ofstream out = open_out(dir / "summary.json");
    out << summary_json(r, config, false).dump(2) << "\n";
  }
  {
    std::ofstream out = open_out(dir / "timing.json");
    nlohmann::ordered_json tm = nlohmann::ordered_json::object();
    for (const auto& i : r.indicators) {
      if (i.timing) tm[i.name] = i.value;
    }
    out << tm.dump(2) << "\n";
  }
  for (const auto& t : r.tables) write_csv(t, dir / (t.name + ".csv"));
  for (const auto& p : r.plots) {
    std::ofstream out = open_out(dir / (p.name + ".svg"));
    out << render_svg(p);
  }
}

}  // namespace vlab
