#include "robin/harness/record.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "robin/errors.hpp"

namespace robin::harness {

namespace {

using nlohmann::json;

json opt(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? json("inf") : json("-inf");
  return *v;
}

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& v = j.at(key);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError(fmt::format("run record: '{}' has unexpected value '{}'", key, s));
  }
  return v.get<double>();
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", *v);
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write", path.string());
  out << text;
  if (!out) throw IoError("write failed", path.string());
}

struct Point {
  double x, y, err;
};

}  // namespace

std::string compare(double lhs, double rhs, double errbar) {
  const double margin = rhs - lhs;
  if (margin > errbar) return verdict::kHolds;
  if (margin >= -errbar) return verdict::kEqual;
  if (-margin > 10 * errbar) return verdict::kFails;
  return verdict::kIndeterminate;
}

json to_json(const CaseResult& c) {
  return {{"case_id", c.case_id},
          {"curve_id", c.curve_id},
          {"L", opt(c.length)},
          {"d", opt(c.width)},
          {"alpha", c.alpha},
          {"kappa_max", opt(c.kappa_max)},
          {"lambda1", opt(c.lambda1)},
          {"lambda2", opt(c.lambda2)},
          {"lambda_disk1", opt(c.lambda_disk1)},
          {"lambda_disk2", opt(c.lambda_disk2)},
          {"Ru", opt(c.ru)},
          {"Rv", opt(c.rv)},
          {"bound", opt(c.bound)},
          {"errbar", opt(c.errbar)},
          {"verdict", c.verdict},
          {"note", c.note},
          {"details", c.details}};
}

CaseResult case_from_json(const json& j) {
  try {
    CaseResult c;
    c.case_id = j.at("case_id").get<std::string>();
    c.curve_id = j.at("curve_id").get<std::string>();
    c.length = opt_from(j, "L");
    c.width = opt_from(j, "d");
    c.alpha = j.at("alpha").get<double>();
    c.kappa_max = opt_from(j, "kappa_max");
    c.lambda1 = opt_from(j, "lambda1");
    c.lambda2 = opt_from(j, "lambda2");
    c.lambda_disk1 = opt_from(j, "lambda_disk1");
    c.lambda_disk2 = opt_from(j, "lambda_disk2");
    c.ru = opt_from(j, "Ru");
    c.rv = opt_from(j, "Rv");
    c.bound = opt_from(j, "bound");
    c.errbar = opt_from(j, "errbar");
    c.verdict = j.at("verdict").get<std::string>();
    c.note = j.at("note").get<std::string>();
    c.details = j.at("details");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run record case: ") + e.what());
  }
}

json to_json(const RunRecord& r) {
  json cases = json::array();
  for (const auto& c : r.cases) cases.push_back(to_json(c));
  return {{"schema_version", r.schema_version},
          {"kind", r.kind},
          {"software_version", r.software_version},
          {"config_hash", r.config_hash},
          {"config", r.config},
          {"cases", cases},
          {"tables", r.tables}};
}

RunRecord record_from_json(const json& j) {
  try {
    RunRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    r.kind = j.at("kind").get<std::string>();
    r.software_version = j.at("software_version").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.config = j.at("config");
    for (const auto& c : j.at("cases")) r.cases.push_back(case_from_json(c));
    r.tables = j.at("tables");
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run record: ") + e.what());
  }
}

void write_results_csv(std::ostream& out, const RunRecord& r) {
  out << kCsvHeader << '\n';
  for (const auto& c : r.cases) {
    out << csv_text(c.case_id) << ',' << csv_number(c.length) << ',' << csv_number(c.width) << ','
        << csv_number(c.alpha) << ',' << csv_number(c.kappa_max) << ',' << csv_number(c.lambda1) << ','
        << csv_number(c.lambda2) << ',' << csv_number(c.lambda_disk1) << ',' << csv_number(c.lambda_disk2) << ','
        << csv_number(c.ru) << ',' << csv_number(c.rv) << ',' << csv_number(c.bound) << ','
        << csv_number(c.errbar) << ',' << csv_text(c.verdict) << '\n';
  }
}

void write_svg(std::ostream& out, const RunRecord& r) {
  const bool second = r.kind == "theorem2" || r.kind == "corollary";
  std::map<std::string, std::vector<Point>> series;
  std::string xlabel = "alpha";
  if (r.kind == "corollary" && r.tables.contains("monotonicity")) {
    xlabel = "L";
    for (const auto& row : r.tables["monotonicity"]) {
      if (row.at("lambda2").is_null()) continue;
      series[fmt::format("disk alpha={:g}", row.at("alpha").get<double>())].push_back(
          {row.at("L").get<double>(), row.at("lambda2").get<double>(), 0.0});
    }
  } else {
    for (const auto& c : r.cases) {
      const auto& y = second ? c.lambda2 : c.lambda1;
      if (!y || !std::isfinite(*y)) continue;
      const std::string d = !c.width ? "" : std::isinf(*c.width) ? " d=inf" : fmt::format(" d={:g}", *c.width);
      series[c.curve_id + d].push_back({c.alpha, *y, c.errbar.value_or(0.0)});
      const auto& ref = second ? c.lambda_disk2 : c.lambda_disk1;
      if (ref && std::isfinite(*ref)) series["reference" + d].push_back({c.alpha, *ref, 0.0});
    }
  }
  for (auto& [name, pts] : series) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
  }

  const double width = 720, height = 480, left = 80, right = 200, top = 40, bottom = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& [name, pts] : series) {
    for (const auto& p : pts) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y - p.err);
      ymax = std::max(ymax, p.y + p.err);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const double pw = width - left - right, ph = height - top - bottom;
  const auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  const auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)", width,
                     height, width, height)
      << '\n';
  out << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  out << fmt::format(R"(<text x="{}" y="24" font-family="sans-serif" font-size="16">{}</text>)", left,
                     xml_escape(r.kind + (second ? ": lambda2" : ": lambda1")))
      << '\n';
  out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)", left, top, pw, ph)
      << '\n';
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4.0;
    const double y = ymin + (ymax - ymin) * i / 4.0;
    out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="11" text-anchor="middle">{:.4g}</text>)",
                       sx(x), top + ph + 18, x)
        << '\n';
    out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="11" text-anchor="end">{:.4g}</text>)",
                       left - 6, sy(y) + 4, y)
        << '\n';
  }
  out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>)",
                     left + pw / 2, height - 16, xlabel)
      << '\n';

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  std::size_t k = 0;
  for (const auto& [name, pts] : series) {
    const char* color = colors[k % 8];
    std::string path;
    for (const auto& p : pts) path += fmt::format("{:.2f},{:.2f} ", sx(p.x), sy(p.y));
    out << fmt::format(R"(<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>)", color, path) << '\n';
    for (const auto& p : pts) {
      out << fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="3" fill="{}"/>)", sx(p.x), sy(p.y), color) << '\n';
      if (p.err > 0) {
        out << fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}" stroke="{3}"/>)", sx(p.x),
                           sy(p.y - p.err), sy(p.y + p.err), color)
            << '\n';
      }
    }
    out << fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="11" fill="{}">{}</text>)",
                       left + pw + 10, top + 14 + 16.0 * static_cast<double>(k), color, xml_escape(name))
        << '\n';
    ++k;
  }
  out << "</svg>\n";
}

std::filesystem::path emit_outputs(const RunRecord& r, const std::filesystem::path& root) {
  const auto dir = root / fmt::format("{}-{}", r.kind, r.config_hash);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", dir.string());

  std::ostringstream csv;
  write_results_csv(csv, r);
  write_file(dir / "results.csv", csv.str());
  write_file(dir / "run.json", to_json(r).dump(2) + "\n");
  std::ostringstream svg;
  write_svg(svg, r);
  write_file(dir / "plot.svg", svg.str());
  write_file(dir / "timing.json", r.timings.dump(2) + "\n");
  return dir;
}

int exit_code(const RunRecord& r) {
  bool failed = false, errored = false;
  for (const auto& c : r.cases) {
    failed |= c.verdict == verdict::kFails || c.verdict == verdict::kFail;
    errored |= c.verdict == verdict::kError;
  }
  if (r.tables.contains("checks")) {
    for (const auto& check : r.tables["checks"]) failed |= !check.value("passed", true);
  }
  return failed ? 2 : errored ? 1 : 0;
}

}  // namespace robin::harness
