#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carathedyn/report.hpp"
#include "carathedyn/system.hpp"

namespace cdyn {

struct RunConfig {
  std::string fixture_name;  // one of the named fixtures, or
  std::string system_file;   // a system definition file
  std::string task = "all";  // pressure|leaf|conformality|cocycle|product|
                             // two-sided|srb|pushforward|all
  std::vector<double> cutoffs;  // task-dependent defaults when empty
  int depth_cap = 40;
  double alpha_tol = 1e-9;
  std::map<std::string, double> tolerance_overrides;
  unsigned seed = 1;
  std::string out_dir;  // reports and CSV tables land here when set

  std::string label() const {
    return fixture_name.empty() ? system_file : fixture_name;
  }
};

// Executes the selected verification suites; deterministic for a fixed
// configuration and seed.
Report run(const RunConfig& config);

}  // namespace cdyn
