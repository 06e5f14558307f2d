#include "grosslab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace grosslab {

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "1e308" : "-1e308";
  if (std::isnan(x)) return "0";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_sweep_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

Record make_record(std::string key, double measured, double bound,
                   double tolerance) {
  Record r;
  r.sweep_key = std::move(key);
  r.measured = measured;
  r.bound = bound;
  r.tolerance = tolerance;
  r.pass = measured <= bound + tolerance;
  if (bound > 0.0) {
    r.ratio = measured / bound;
  } else {
    r.ratio = measured <= tolerance ? 0.0 : 1e300;
  }
  return r;
}

void finalize_report(ExperimentReport& rep) {
  std::stable_sort(rep.records.begin(), rep.records.end(),
                   [](const Record& a, const Record& b) {
                     return a.sweep_key < b.sweep_key;
                   });
  rep.verdict = true;
  for (const Record& r : rep.records)
    if (!r.pass) rep.verdict = false;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace

std::string report_to_json(const ExperimentReport& rep) {
  std::string s;
  s += "{\n";
  s += "  \"name\": \"" + json_escape(rep.name) + "\",\n";
  s += "  \"config\": {\n";
  for (size_t i = 0; i < rep.config_echo.size(); ++i) {
    s += "    \"" + json_escape(rep.config_echo[i].first) + "\": \"" +
         json_escape(rep.config_echo[i].second) + "\"";
    s += i + 1 < rep.config_echo.size() ? ",\n" : "\n";
  }
  s += "  },\n";
  s += "  \"records\": [\n";
  for (size_t i = 0; i < rep.records.size(); ++i) {
    const Record& r = rep.records[i];
    s += "    {\"sweep_key\": \"" + json_escape(r.sweep_key) + "\", ";
    s += "\"measured\": " + format_double(r.measured) + ", ";
    s += "\"bound\": " + format_double(r.bound) + ", ";
    s += "\"ratio\": " + format_double(r.ratio) + ", ";
    s += "\"pass\": " + std::string(r.pass ? "true" : "false") + ", ";
    s += "\"tolerance\": " + format_double(r.tolerance) + "}";
    s += i + 1 < rep.records.size() ? ",\n" : "\n";
  }
  s += "  ],\n";
  s += "  \"verdict\": " + std::string(rep.verdict ? "true" : "false") + ",\n";
  s += "  \"notes\": [\n";
  for (size_t i = 0; i < rep.notes.size(); ++i) {
    s += "    \"" + json_escape(rep.notes[i]) + "\"";
    s += i + 1 < rep.notes.size() ? ",\n" : "\n";
  }
  s += "  ]\n";
  s += "}\n";
  return s;
}

std::string report_to_csv(const ExperimentReport& rep) {
  std::string s = "sweep_key,measured,bound,ratio,pass\n";
  for (const Record& r : rep.records) {
    s += r.sweep_key + "," + format_double(r.measured) + "," +
         format_double(r.bound) + "," + format_double(r.ratio) + "," +
         (r.pass ? "true" : "false") + "\n";
  }
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace grosslab
