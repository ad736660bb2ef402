#include "carathedyn/report.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace cdyn {

std::string report_json(const Report& rep) {
  nlohmann::ordered_json j;
  j["fixture"] = rep.fixture;
  j["task"] = rep.task;
  j["config"] = rep.config_echo;
  j["overall_pass"] = rep.overall();
  auto checks = nlohmann::ordered_json::array();
  for (const auto& r : rep.records) {
    nlohmann::ordered_json c;
    c["name"] = r.name;
    c["lhs"] = r.lhs;
    c["rhs"] = r.rhs;
    c["deviation"] = r.deviation;
    c["tolerance"] = r.tolerance;
    c["pass"] = r.pass;
    checks.push_back(c);
  }
  j["checks"] = checks;
  return j.dump(2) + "\n";
}

std::string report_text(const Report& rep) {
  std::ostringstream out;
  out.precision(10);
  out << rep.task << " on " << rep.fixture << "\n";
  for (const auto& r : rep.records) {
    out << "  [" << (r.pass ? "pass" : "FAIL") << "] " << r.name << ": lhs=" << r.lhs
        << " rhs=" << r.rhs << " deviation=" << r.deviation << " tol=" << r.tolerance
        << "\n";
  }
  out << (rep.overall() ? "PASS" : "FAIL") << " (" << rep.records.size()
      << " checks, " << rep.elapsed_seconds << " s)\n";
  return out.str();
}

std::string cutoff_csv(const std::vector<CutoffRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "T,alpha,value,cover_size\n";
  for (const auto& r : rows)
    out << r.T << "," << r.alpha << "," << r.value << "," << r.cover_size << "\n";
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << content;
}

}  // namespace cdyn
