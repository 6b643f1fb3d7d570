#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace relqm::cli {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = inf;
  double hi = -inf;

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // A degenerate range (constant data) is padded so the line sits mid-plot.
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi - lo <= 1e-12 * std::max(std::abs(lo), std::abs(hi))) {
      const double pad = lo == 0.0 ? 1.0 : 0.1 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void write_columns(const std::filesystem::path& path, const std::string& title, const std::vector<Column>& columns,
                   const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_for_write(path);
  out << "# " << title << "\n#";
  for (const auto& c : columns) out << ' ' << c.name << '[' << c.unit << ']';
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match the header in " + path.string());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ' ';
      out << fmt("%.17g", row[i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_svg(const std::filesystem::path& path, const PlotStyle& style, const std::vector<Series>& series) {
  const double W = 720, H = 440, left = 80, right = 170, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  auto tx = [&](double v) { return style.loglog ? (v > 0.0 ? std::log10(v) : NAN) : v; };

  Range xr, yr;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = tx(s.y[i]);
      if (std::isfinite(a) && std::isfinite(b)) {
        xr.add(a);
        yr.add(b);
      }
    }
  }
  xr.finish();
  yr.finish();
  auto px = [&](double v) { return left + (tx(v) - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double v) { return top + ph - (tx(v) - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ofstream out = open_for_write(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << escape_xml(style.title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Ticks: five per axis (linear) or whole decades (log).
  auto ticks = [&](const Range& r) {
    std::vector<double> t;
    if (style.loglog) {
      for (double d = std::ceil(r.lo); d <= std::floor(r.hi) + 1e-9; d += 1.0) t.push_back(d);
      if (t.size() < 2) t = {r.lo, r.hi};
    } else {
      for (int k = 0; k <= 4; ++k) t.push_back(r.lo + (r.hi - r.lo) * k / 4.0);
    }
    return t;
  };
  auto label = [&](double v) { return style.loglog ? fmt("%.3g", std::pow(10.0, v)) : fmt("%.4g", v); };
  for (double t : ticks(xr)) {
    const double X = left + (t - xr.lo) / (xr.hi - xr.lo) * pw;
    out << "<line x1=\"" << fmt("%.2f", X) << "\" y1=\"" << top + ph << "\" x2=\"" << fmt("%.2f", X) << "\" y2=\""
        << top + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt("%.2f", X) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << label(t)
        << "</text>\n";
  }
  for (double t : ticks(yr)) {
    const double Y = top + ph - (t - yr.lo) / (yr.hi - yr.lo) * ph;
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << fmt("%.2f", Y) << "\" x2=\"" << left << "\" y2=\""
        << fmt("%.2f", Y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << fmt("%.2f", Y + 4) << "\" text-anchor=\"end\">" << label(t)
        << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
      << escape_xml(style.x_label) << (style.loglog ? " (log)" : "") << "</text>\n";
  out << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(style.y_label) << (style.loglog ? " (log)" : "") << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % std::size(palette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double X = px(s.x[i]), Y = py(s.y[i]);
      if (std::isfinite(X) && std::isfinite(Y)) out << fmt("%.2f", X) << ',' << fmt("%.2f", Y) << ' ';
    }
    out << "\"/>\n";
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double X = px(s.x[i]), Y = py(s.y[i]);
        if (!std::isfinite(X) || !std::isfinite(Y)) continue;
        out << "<circle cx=\"" << fmt("%.2f", X) << "\" cy=\"" << fmt("%.2f", Y) << "\" r=\"3\" fill=\"" << color
            << "\"/>\n";
        if (i < s.marker_labels.size() && !s.marker_labels[i].empty()) {
          out << "<text x=\"" << fmt("%.2f", X + 5) << "\" y=\"" << fmt("%.2f", Y - 5) << "\" font-size=\"10\">"
              << escape_xml(s.marker_labels[i]) << "</text>\n";
        }
      }
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 32 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly << "\">" << escape_xml(s.label) << "</text>\n";
  }
  if (!style.annotation.empty()) {
    out << "<text x=\"" << left + 10 << "\" y=\"" << top + 18 << "\">" << escape_xml(style.annotation) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const checks::CheckResult& c) { return c.passed; });
}

std::string summary_text(const RunReport& r) {
  std::string out = "subcommand " + r.subcommand + "\nconfig " + r.config_path + " (" + r.config_hash + ")\n";
  out += "seed " + std::to_string(r.seed) + "\n";
  std::string suite;
  for (const auto& c : r.checks) {
    if (c.suite != suite) {
      suite = c.suite;
      out += "[" + suite + "]\n";
    }
    const double ref = c.relation == checks::Relation::within ? c.target : c.bound;
    out += std::string(c.passed ? "  PASS " : "  FAIL ") + c.name + "  measured " + fmt("%.6g", c.measured) + " " +
           checks::relation_symbol(c.relation) + " " + fmt("%.6g", ref);
    if (c.relation == checks::Relation::within) out += " +- " + fmt("%.3g", c.bound);
    if (!c.note.empty()) out += "  (" + c.note + ")";
    out += "\n";
  }
  out += std::string(r.passed() ? "ALL CHECKS PASSED" : "CHECK FAILURE") + " in " + fmt("%.2f", r.seconds) + " s\n";
  return out;
}

void write_report(const std::filesystem::path& dir, const RunReport& r) {
  using nlohmann::json;
  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json checks = json::array();
  for (const auto& c : r.checks) {
    json j{{"suite", c.suite},
           {"name", c.name},
           {"measured", number(c.measured)},
           {"relation", checks::relation_symbol(c.relation)},
           {"tolerance", number(c.bound)},
           {"passed", c.passed},
           {"seconds", c.seconds}};
    if (c.relation == checks::Relation::within) j["target"] = c.target;
    if (!c.note.empty()) j["note"] = c.note;
    checks.push_back(std::move(j));
  }
  const json doc{{"subcommand", r.subcommand}, {"config", r.config_path}, {"config_hash", r.config_hash},
                 {"seed", r.seed},             {"passed", r.passed()},   {"seconds", r.seconds},
                 {"artifacts", r.artifacts},   {"checks", checks}};
  std::ofstream js = open_for_write(dir / "report.json");
  js << doc.dump(2) << '\n';
  std::ofstream txt = open_for_write(dir / "report.txt");
  txt << summary_text(r);
  if (!js || !txt) throw std::runtime_error("write failed in " + dir.string());
}

}  // namespace relqm::cli
