#pragma once

#include <string>
#include <vector>

#include "carathedyn/system.hpp"

namespace cdyn {

struct CheckRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double deviation = 0.0;  // |lhs/rhs - 1| or another stated discrepancy
  double tolerance = 0.0;
  bool pass = false;
};

struct Report {
  std::string fixture;
  std::string task;
  std::vector<CheckRecord> records;
  std::vector<std::string> config_echo;
  double elapsed_seconds = 0.0;

  bool overall() const {
    for (const auto& r : records)
      if (!r.pass) return false;
    return true;
  }
  void add(const std::string& name, double lhs, double rhs, double deviation,
           double tolerance) {
    records.push_back({name, lhs, rhs, deviation, tolerance, deviation <= tolerance});
  }
};

// Machine-readable report; deterministic (timing excluded by design so that
// identical configurations give byte-identical files).
std::string report_json(const Report& rep);
// Human-readable summary including timing.
std::string report_text(const Report& rep);

// Per-cutoff value table: columns T, alpha, value, cover_size.
struct CutoffRow {
  double T = 0.0;
  double alpha = 0.0;
  double value = 0.0;
  double cover_size = 0.0;
};
std::string cutoff_csv(const std::vector<CutoffRow>& rows);

void write_file(const std::string& path, const std::string& content);

}  // namespace cdyn
