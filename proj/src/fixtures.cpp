#include "carathedyn/fixtures.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "carathedyn/oracle.hpp"

namespace cdyn {

namespace {

Sft full_shift(int n) {
  return Sft(n, std::vector<uint8_t>(static_cast<size_t>(n) * n, 1));
}

Sft golden_shift() {
  // forbid bb
  return Sft(2, {1, 1, 1, 0});
}

}  // namespace

SuspensionSystem fixture(const std::string& name) {
  using LCF = LocallyConstantFunction;
  if (name == "FULL2")
    return SuspensionSystem(full_shift(2), LCF::constant(2, 1.0), LCF::constant(2, 0.0), 0);
  if (name == "GOLD")
    return SuspensionSystem(golden_shift(), LCF::constant(2, 1.0), LCF::constant(2, 0.0), 0);
  if (name == "ROOF2")
    return SuspensionSystem(full_shift(2), LCF::per_symbol(2, {1.0, 2.0}),
                            LCF::constant(2, 0.0), 0);
  if (name == "BERN13")
    return SuspensionSystem(full_shift(2), LCF::constant(2, 1.0),
                            LCF::per_symbol(2, {std::log(1.0 / 3.0), std::log(2.0 / 3.0)}),
                            0);
  if (name == "SRB3")
    // Geometric potential -log(lambda) with lambda_a = 3, lambda_b = 3/2;
    // the reciprocals sum to 1, so the flow pressure vanishes.
    return SuspensionSystem(full_shift(2), LCF::constant(2, 1.0),
                            LCF::per_symbol(2, {-std::log(3.0), -std::log(1.5)}), 0);
  throw std::invalid_argument("unknown fixture: " + name);
}

std::vector<std::string> fixture_names() {
  return {"FULL2", "GOLD", "ROOF2", "BERN13", "SRB3"};
}

std::vector<FixtureInfo> list_fixtures() {
  std::vector<FixtureInfo> out;
  std::map<std::string, std::string> desc = {
      {"FULL2", "full 2-shift, roof 1, phi=0, P=log 2"},
      {"GOLD", "golden-mean shift (bb forbidden), roof 1, phi=0, P=log golden ratio"},
      {"ROOF2", "full 2-shift, roof(a)=1, roof(b)=2, phi=0, P=log golden ratio"},
      {"BERN13", "full 2-shift, roof 1, Bernoulli(1/3,2/3) weights, P=0"},
      {"SRB3", "full 2-shift, geometric potential -log(3), -log(3/2), P=0"},
  };
  for (const auto& n : fixture_names()) {
    SuspensionSystem sys = fixture(n);
    out.push_back({n, desc[n], flow_pressure(sys)});
  }
  return out;
}

// ------------------------------------------------------- config io

namespace {

std::vector<std::string> tokens_after_eq(const std::string& line) {
  auto eq = line.find('=');
  std::string rhs = eq == std::string::npos ? "" : line.substr(eq + 1);
  std::istringstream in(rhs);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

}  // namespace

SuspensionSystem parse_system(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int alphabet = 0, k_r = 0;
  std::optional<double> r_unit;
  std::vector<std::string> trans_rows;
  int rlo = 0, rhi = 0, plo = 0, phi = 0;
  std::vector<double> rvals, pvals;
  bool have_roof_w = false, have_pot_w = false;

  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto toks = tokens_after_eq(line);
    if (line.find('=') == std::string::npos) continue;
    std::string key = line.substr(0, line.find('='));
    key.erase(key.find_last_not_of(" \t") + 1);
    key.erase(0, key.find_first_not_of(" \t"));
    if (key == "alphabet") {
      alphabet = std::stoi(toks.at(0));
    } else if (key == "transitions") {
      trans_rows = toks;
    } else if (key == "roof.window") {
      rlo = std::stoi(toks.at(0));
      rhi = std::stoi(toks.at(1));
      have_roof_w = true;
    } else if (key == "roof.values") {
      for (auto& t : toks) rvals.push_back(std::stod(t));
    } else if (key == "potential.window") {
      plo = std::stoi(toks.at(0));
      phi = std::stoi(toks.at(1));
      have_pot_w = true;
    } else if (key == "potential.values") {
      for (auto& t : toks) pvals.push_back(std::stod(t));
    } else if (key == "k_r") {
      k_r = std::stoi(toks.at(0));
    } else if (key == "r_unit") {
      r_unit = std::stod(toks.at(0));
    } else {
      throw std::invalid_argument("system config: unknown key '" + key + "'");
    }
  }
  if (alphabet < 2) throw std::invalid_argument("system config: alphabet missing or < 2");
  if (static_cast<int>(trans_rows.size()) != alphabet)
    throw std::invalid_argument("system config: expected one transitions row per symbol");
  std::vector<uint8_t> tr;
  for (const auto& row : trans_rows) {
    if (static_cast<int>(row.size()) != alphabet)
      throw std::invalid_argument("system config: transitions row length mismatch");
    for (char c : row) tr.push_back(c == '1' ? 1 : 0);
  }
  if (!have_roof_w || !have_pot_w)
    throw std::invalid_argument("system config: roof.window / potential.window required");
  return SuspensionSystem(Sft(alphabet, std::move(tr)),
                          LocallyConstantFunction(alphabet, rlo, rhi, std::move(rvals)),
                          LocallyConstantFunction(alphabet, plo, phi, std::move(pvals)),
                          k_r, r_unit);
}

std::string format_system(const SuspensionSystem& sys) {
  std::ostringstream out;
  out.precision(17);
  int n = sys.sft().alphabet();
  out << "alphabet = " << n << "\n";
  out << "transitions =";
  for (int i = 0; i < n; ++i) {
    out << " ";
    for (int j = 0; j < n; ++j) out << (sys.sft().allowed(i, j) ? '1' : '0');
  }
  out << "\n";
  auto dump = [&](const char* name, const LocallyConstantFunction& f) {
    out << name << ".window = " << f.window_lo() << " " << f.window_hi() << "\n";
    out << name << ".values =";
    for (double v : f.values()) out << " " << v;
    out << "\n";
  };
  dump("roof", sys.roof());
  dump("potential", sys.potential());
  out << "k_r = " << sys.k_r() << "\n";
  out << "r_unit = " << sys.r_unit() << "\n";
  return out.str();
}

SuspensionSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open system file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str());
}

void save_system(const SuspensionSystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write system file: " + path);
  out << format_system(sys);
}

}  // namespace cdyn
