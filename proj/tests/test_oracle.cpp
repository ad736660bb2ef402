#include <doctest.h>

#include <cmath>
#include <random>

#include "carathedyn/fixtures.hpp"
#include "carathedyn/oracle.hpp"

using namespace cdyn;

namespace {
const double kGolden = std::log((1.0 + std::sqrt(5.0)) / 2.0);
}

TEST_CASE("shift pressure") {
  auto full2 = fixture("FULL2");
  CHECK(shift_pressure(full2, LocallyConstantFunction::constant(2, 0.0)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  auto gold = fixture("GOLD");
  CHECK(shift_pressure(gold, LocallyConstantFunction::constant(2, 0.0)) ==
        doctest::Approx(kGolden).epsilon(1e-10));

  auto bern = fixture("BERN13");
  CHECK(shift_pressure(bern, bern.potential()) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("flow pressure") {
  CHECK(flow_pressure(fixture("FULL2")) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  // e^{-c} + e^{-2c} = 1 has the golden solution
  CHECK(flow_pressure(fixture("ROOF2")) == doctest::Approx(kGolden).epsilon(1e-9));
  CHECK(flow_pressure(fixture("SRB3")) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(flow_pressure(fixture("GOLD")) == doctest::Approx(kGolden).epsilon(1e-9));
}

TEST_CASE("pressure shifts by constants") {
  auto full2 = fixture("FULL2");
  for (double kappa : {-1.0, 0.0, 0.5}) {
    SuspensionSystem sys(full2.sft(), full2.roof(),
                         LocallyConstantFunction::constant(2, kappa), 0);
    CHECK(flow_pressure(sys) == doctest::Approx(std::log(2.0) + kappa).epsilon(1e-9));
  }
}

TEST_CASE("perron eigendata invariants") {
  for (const char* name : {"FULL2", "GOLD", "ROOF2", "BERN13"}) {
    auto sys = fixture(name);
    auto oracle = OracleMeasure::flow_equilibrium(sys);
    const auto& pd = oracle.perron();
    CHECK(pd.residual < 1e-10);
    double rsum = 0.0, dot = 0.0;
    for (size_t i = 0; i < pd.right.size(); ++i) {
      CHECK(pd.right[i] > 0.0);
      CHECK(pd.left[i] > 0.0);
      rsum += pd.right[i];
      dot += pd.left[i] * pd.right[i];
    }
    CHECK(rsum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot == doctest::Approx(1.0).epsilon(1e-12));
    // flow weight has spectral radius 1
    CHECK(pd.eigenvalue == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("gibbs cylinder masses") {
  auto full2 = OracleMeasure::flow_equilibrium(fixture("FULL2"));
  CylinderSet ab{0, 1, {0, 1}, FiberInterval{0.0, 1.0}};
  CHECK(full2.mass(ab) == doctest::Approx(0.25).epsilon(1e-12));

  auto srb3 = OracleMeasure::flow_equilibrium(fixture("SRB3"));
  CylinderSet a{0, 0, {0}, std::nullopt};
  CHECK(srb3.mass(a) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

  auto bern = OracleMeasure::flow_equilibrium(fixture("BERN13"));
  CylinderSet ba{0, 1, {1, 0}, std::nullopt};
  CHECK(bern.mass(ba) == doctest::Approx(2.0 / 9.0).epsilon(1e-10));

  // whole space has mass 1
  CylinderSet whole;
  CHECK(bern.mass(whole) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(OracleMeasure::flow_equilibrium(fixture("ROOF2")).mass(whole) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("additivity of cylinder masses") {
  std::mt19937 rng(17);
  for (const char* name : {"GOLD", "ROOF2", "BERN13"}) {
    auto sys = fixture(name);
    auto oracle = OracleMeasure::flow_equilibrium(sys);
    std::uniform_int_distribution<int> sym(0, 1);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<int> w;
      w.push_back(sym(rng));
      for (int i = 0; i < 3; ++i) {
        int s;
        do {
          s = sym(rng);
        } while (!sys.sft().allowed(w.back(), s));
        w.push_back(s);
      }
      CylinderSet parent{0, static_cast<int>(w.size()) - 1, w, std::nullopt};
      double total = 0.0;
      for (int s = 0; s < 2; ++s) {
        if (!sys.sft().allowed(w.back(), s)) continue;
        auto ext = w;
        ext.push_back(s);
        CylinderSet child{0, static_cast<int>(ext.size()) - 1, ext, std::nullopt};
        total += oracle.mass(child);
      }
      CHECK(total == doctest::Approx(oracle.mass(parent)).epsilon(1e-12));
    }
  }
}

TEST_CASE("shift invariance of base masses") {
  auto oracle = OracleMeasure::flow_equilibrium(fixture("GOLD"));
  std::vector<int> w = {0, 1, 0, 0};
  CylinderSet at0{0, 3, w, std::nullopt};
  CylinderSet at5{5, 8, w, std::nullopt};
  CHECK(oracle.mass(at0) == doctest::Approx(oracle.mass(at5)).epsilon(1e-12));
}

TEST_CASE("gibbs ratio bound") {
  auto full2 = fixture("FULL2");
  auto of = OracleMeasure::flow_equilibrium(full2);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> time(1.0, 20.0);
  std::vector<GibbsSample> samples;
  std::vector<int> cyc = {0};
  for (int i = 0; i < 50; ++i) {
    std::vector<int> w;
    std::uniform_int_distribution<int> sym(0, 1);
    w.push_back(sym(rng));
    for (int k = 0; k < 8; ++k) w.push_back(sym(rng));
    samples.push_back({full2.make_point(-4, w, 0.0), time(rng)});
  }
  CHECK(gibbs_ratio_bound(full2, of, samples) == doctest::Approx(1.0).epsilon(1e-10));

  auto gold = fixture("GOLD");
  auto og = OracleMeasure::flow_equilibrium(gold);
  std::vector<GibbsSample> gsamples;
  std::uniform_real_distribution<double> gt(1.0, 25.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<int> w;
    std::uniform_int_distribution<int> sym(0, 1);
    w.push_back(sym(rng));
    for (int k = 0; k < 12; ++k) {
      int s;
      do {
        s = sym(rng);
      } while (!gold.sft().allowed(w.back(), s));
      w.push_back(s);
    }
    gsamples.push_back({gold.make_point(-6, w, 0.0), gt(rng)});
  }
  double bound = gibbs_ratio_bound(gold, og, gsamples);
  CHECK(bound <= 4.0);
  CHECK(std::isfinite(bound));

  auto bern = fixture("BERN13");
  auto ob = OracleMeasure::flow_equilibrium(bern);
  std::vector<GibbsSample> one = {{bern.periodic_point(cyc, 0.0), 10.0}};
  CHECK(gibbs_ratio_bound(bern, ob, one) == doctest::Approx(1.0).epsilon(1e-10));
}
