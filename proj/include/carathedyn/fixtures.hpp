#pragma once

#include <string>
#include <vector>

#include "carathedyn/system.hpp"

namespace cdyn {

struct FixtureInfo {
  std::string name;
  std::string description;
  double oracle_pressure;  // filled by list_fixtures
};

// Named fixtures: FULL2, GOLD, ROOF2, BERN13, SRB3.
SuspensionSystem fixture(const std::string& name);
std::vector<std::string> fixture_names();
std::vector<FixtureInfo> list_fixtures();

// Plain-text system definition files. Keys: alphabet, transitions,
// roof.window / roof.values, potential.window / potential.values, k_r,
// and optional r_unit. Values are listed for all words of the window
// length in lexicographic order.
SuspensionSystem load_system(const std::string& path);
void save_system(const SuspensionSystem& sys, const std::string& path);
SuspensionSystem parse_system(const std::string& text);
std::string format_system(const SuspensionSystem& sys);

}  // namespace cdyn
