#include <doctest.h>

#include <cmath>
#include <random>

#include "carathedyn/fixtures.hpp"
#include "carathedyn/system.hpp"

using namespace cdyn;

namespace {

SymbolicPoint random_point(const SuspensionSystem& sys, std::mt19937& rng, int half_width) {
  const auto& sft = sys.sft();
  std::uniform_int_distribution<int> sym(0, sft.alphabet() - 1);
  std::vector<int> w;
  w.push_back(sym(rng));
  for (int i = 1; i < 2 * half_width + 1; ++i) {
    int s;
    do {
      s = sym(rng);
    } while (!sft.allowed(w.back(), s));
    w.push_back(s);
  }
  SymbolicPoint p = sys.make_point(-half_width, std::move(w), 0.0);
  std::uniform_real_distribution<double> fib(0.0, sys.roof_at(p, 0));
  return p.with_fiber(fib(rng) * 0.999);
}

}  // namespace

TEST_CASE("shift basics") {
  auto sys = fixture("FULL2");
  std::vector<int> cyc = {0};
  auto p = sys.periodic_point(cyc, 0.0);
  auto q = shift(p, 5);
  for (int i = -4; i <= 4; ++i) CHECK(q.at(i) == 0);

  auto r = sys.make_point(-1, {0, 1, 0}, 0.0);
  auto r1 = shift(r, 1);
  CHECK(r1.at(-2) == 0);
  CHECK(r1.at(-1) == 1);
  CHECK(r1.at(0) == 0);
}

TEST_CASE("shift group law") {
  auto sys = fixture("GOLD");
  std::mt19937 rng(11);
  for (int k = 0; k < 200; ++k) {
    auto p = random_point(sys, rng, 6);
    auto q = shift(shift(p, 3), -3);
    for (int i = -6; i <= 6; ++i) CHECK(q.at(i) == p.at(i));
    CHECK(q.fiber() == p.fiber());
  }
}

TEST_CASE("flow on FULL2 and ROOF2") {
  auto full2 = fixture("FULL2");
  std::vector<int> cyc = {0};
  auto p = full2.periodic_point(cyc, 0.25);
  auto q = flow(full2, p, 0.5);
  CHECK(q.fiber() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(q.at(0) == 0);

  auto r = full2.parse_point("aab.aab", 0.0);
  auto r1 = flow(full2, r, 1.0);
  CHECK(r1.fiber() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r1.at(0) == r.at(1));
  CHECK(r1.at(-1) == r.at(0));

  auto roof2 = fixture("ROOF2");
  std::vector<int> cb = {1};
  auto b = roof2.periodic_point(cb, 0.0);
  auto b1 = flow(roof2, b, 3.0);
  CHECK(b1.fiber() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b1.at(0) == 1);
}

TEST_CASE("flow group law") {
  std::mt19937 rng(7);
  for (const char* name : {"FULL2", "ROOF2", "GOLD"}) {
    auto sys = fixture(name);
    std::uniform_real_distribution<double> time(-20.0, 20.0);
    for (int k = 0; k < 1000; ++k) {
      auto p = random_point(sys, rng, 4);
      double s = time(rng), t = time(rng);
      auto a = flow(sys, flow(sys, p, s), t);
      auto b = flow(sys, p, s + t);
      CHECK(a.fiber() == doctest::Approx(b.fiber()).epsilon(1e-12));
      for (int i = -3; i <= 3; ++i) CHECK(a.at(i) == b.at(i));
    }
  }
}

TEST_CASE("birkhoff examples") {
  auto sys = fixture("BERN13");
  std::vector<int> cyc = {0};
  auto p = sys.periodic_point(cyc, 0.0);
  CHECK(birkhoff(sys, p, 2.5) == doctest::Approx(2.5 * std::log(1.0 / 3.0)).epsilon(1e-12));
  CHECK(birkhoff(sys, p, 0.0) == 0.0);

  auto q = sys.parse_point("a.ba", 0.0);
  CHECK(birkhoff(sys, q, 2.0) ==
        doctest::Approx(std::log(2.0 / 3.0) + std::log(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("birkhoff cocycle and sign convention") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> time(-15.0, 15.0);
  for (const char* name : {"BERN13", "ROOF2"}) {
    auto sys = fixture(name);
    for (int k = 0; k < 400; ++k) {
      auto p = random_point(sys, rng, 4);
      double s = time(rng), t = time(rng);
      double lhs = birkhoff(sys, p, s + t);
      double rhs = birkhoff(sys, p, s) + birkhoff(sys, flow(sys, p, s), t);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
      double u = time(rng);
      CHECK(birkhoff(sys, p, u) ==
            doctest::Approx(-birkhoff(sys, flow(sys, p, u), -u)).epsilon(1e-10));
    }
  }
}

TEST_CASE("cylinder_ball depths") {
  auto full2 = fixture("FULL2");
  std::vector<int> cyc = {0};
  auto p = full2.periodic_point(cyc, 0.0);
  auto c = cylinder_ball(full2, p, 3.0, BallSide::forward);
  CHECK(c.lo == 0);
  CHECK(c.hi == 3);

  SuspensionSystem full2k(full2.sft(), full2.roof(), full2.potential(), 2);
  auto c2 = cylinder_ball(full2k, full2k.periodic_point(cyc, 0.0), 1.0, BallSide::forward);
  CHECK(c2.lo == 0);
  CHECK(c2.hi == 3);

  auto roof2 = fixture("ROOF2");
  std::vector<int> cb = {1};
  auto b = roof2.periodic_point(cb, 0.0);
  auto c3 = cylinder_ball(roof2, b, 3.0, BallSide::forward);
  CHECK(c3.hi == 2);  // S_2 = 4 >= 3

  auto c4 = cylinder_ball(roof2, b, 3.0, BallSide::backward);
  CHECK(c4.lo == -2);
  CHECK(c4.hi == 0);

  CHECK_THROWS(cylinder_ball(full2, p, -1.0, BallSide::forward));
}

TEST_CASE("cylinder_ball nesting") {
  auto sys = fixture("ROOF2");
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> time(0.0, 12.0);
  for (int k = 0; k < 200; ++k) {
    auto p = random_point(sys, rng, 2).with_fiber(0.0);
    double t1 = time(rng), t2 = time(rng);
    if (t1 > t2) std::swap(t1, t2);
    auto c1 = cylinder_ball(sys, p, t1, BallSide::forward);
    auto c2 = cylinder_ball(sys, p, t2, BallSide::forward);
    CHECK(c2.hi >= c1.hi);  // deeper cylinder is contained in shallower
  }
}

TEST_CASE("degenerate inputs rejected at load") {
  CHECK_THROWS(Sft(1, {1}));
  // reducible: two components
  CHECK_THROWS(Sft(2, {1, 0, 0, 1}));
  // period two (irreducible but not aperiodic)
  CHECK_THROWS(Sft(2, {0, 1, 1, 0}));
  CHECK_THROWS(SuspensionSystem(Sft(2, {1, 1, 1, 1}),
                                LocallyConstantFunction::per_symbol(2, {1.0, 0.0}),
                                LocallyConstantFunction::constant(2, 0.0), 0));
}

TEST_CASE("system config round trip") {
  for (const char* name : {"FULL2", "GOLD", "ROOF2", "BERN13", "SRB3"}) {
    auto sys = fixture(name);
    auto back = parse_system(format_system(sys));
    CHECK(back.sft().alphabet() == sys.sft().alphabet());
    CHECK(back.k_r() == sys.k_r());
    CHECK(back.r_unit() == doctest::Approx(sys.r_unit()));
    CHECK(back.roof().values() == sys.roof().values());
    CHECK(back.potential().values() == sys.potential().values());
    CHECK(back.sft().transitions() == sys.sft().transitions());
  }
}

TEST_CASE("reversed system reflects evaluations") {
  // A window [-1,0] roof makes the reflection nontrivial.
  auto base = fixture("FULL2");
  LocallyConstantFunction roof(2, -1, 0, {1.0, 1.25, 1.5, 2.0});
  SuspensionSystem sys(base.sft(), roof, base.potential(), 1);
  auto rev = sys.reversed();
  auto back = rev.reversed();
  CHECK(back.roof().values() == sys.roof().values());
  CHECK(back.roof().window_lo() == sys.roof().window_lo());

  std::mt19937 rng(3);
  auto p = random_point(sys, rng, 6);
  auto pr = reflect_point(p, 12);
  CHECK(pr.fiber() == p.fiber());
  for (int i = -9; i <= 9; ++i) CHECK(pr.at(i) == p.at(-i));
  // positions map j -> -j under the reflection
  for (int j = -3; j <= 3; ++j)
    CHECK(rev.roof_at(pr, j) == doctest::Approx(sys.roof_at(p, -j)).epsilon(1e-15));
}
