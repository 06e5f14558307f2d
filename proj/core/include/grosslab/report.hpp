#pragma once

#include <string>
#include <utility>
#include <vector>

namespace grosslab {

// One verified inequality or residual. bound is the claim being tested
// (never fitted unless the note says "fitted"); pass means
// measured <= bound + tolerance.
struct Record {
  std::string sweep_key;
  double measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool pass = false;
  double tolerance = 0.0;
};

Record make_record(std::string key, double measured, double bound,
                   double tolerance);

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<Record> records;
  bool verdict = false;
  std::vector<std::string> notes;
};

// Sorts records by sweep key, recomputes the verdict as the conjunction of
// the record passes. Call once before serialization.
void finalize_report(ExperimentReport& rep);

// Deterministic serialization: fixed key order, "%.17g" floats, no
// timestamps. Identical inputs produce byte-identical files.
std::string report_to_json(const ExperimentReport& rep);
std::string report_to_csv(const ExperimentReport& rep);
void write_file(const std::string& path, const std::string& content);

std::string format_double(double x);  // %.17g
std::string format_sweep_value(double x);  // %g, for sweep keys

}  // namespace grosslab
