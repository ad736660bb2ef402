#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "carathedyn/cover.hpp"
#include "carathedyn/fixtures.hpp"
#include "carathedyn/oracle.hpp"

using namespace cdyn;

namespace {

const double kGolden = std::log((1.0 + std::sqrt(5.0)) / 2.0);

// Independent restricted-class infimum: plain recursion over the cylinder
// tree, weights recomputed from scratch through birkhoff() on materialized
// points, no memoization and no incremental accumulators. Mirrors the class
// of covers (rooted antichains with order >= T) without sharing code with
// the engine.
double brute_force_cover(const SuspensionSystem& sys, const SymbolicPoint& leaf,
                         const std::vector<std::vector<int>>& targets, double alpha,
                         double cutoff, int depth_cap) {
  std::function<double(std::vector<int>&)> rec = [&](std::vector<int>& word) -> double {
    int d = static_cast<int>(word.size());
    bool inside = targets.empty();
    bool intersects = targets.empty();
    for (const auto& t : targets) {
      size_t m = std::min(t.size(), word.size());
      bool compat = std::equal(t.begin(), t.begin() + m, word.begin());
      if (!compat) continue;
      intersects = true;
      if (t.size() <= word.size()) inside = true;
    }
    if (!intersects) return 0.0;
    (void)inside;

    // materialize a representative point of the node on the leaf
    int n = d - sys.k_r();
    double take = std::numeric_limits<double>::infinity();
    if (n >= 0) {
      std::vector<int> win;
      int lo = leaf.lo();
      SymbolicPoint probe = leaf.materialized(lo, 0);
      for (int i = lo; i <= 0; ++i) win.push_back(probe.at(i));
      for (int s : word) win.push_back(s);
      // extend admissibly so roofs beyond the word are defined
      for (int k = 0; k < 4 + sys.roof().window_hi() + sys.potential().window_hi(); ++k)
        win.push_back(sys.tail().succ[win.back()]);
      SymbolicPoint rep(lo, win, leaf.fiber(), leaf.tail());
      double t_order = roof_sum_forward(sys, rep, n) - leaf.fiber();
      if (t_order >= cutoff) {
        double phi = birkhoff(sys, rep, t_order);
        take = std::exp(phi - t_order * alpha);
      }
    }
    if (d == depth_cap) {
      REQUIRE(std::isfinite(take));
      return take;
    }
    double childsum = 0.0;
    int last = d == 0 ? leaf.at(0) : word.back();
    for (int s = 0; s < sys.sft().alphabet(); ++s) {
      if (!sys.sft().allowed(last, s)) continue;
      word.push_back(s);
      childsum += rec(word);
      word.pop_back();
    }
    return std::min(take, childsum);
  };
  std::vector<int> word;
  return rec(word);
}

// Truly exhaustive: enumerate every antichain cover of the depth-capped
// tree (order filter applied) and take the minimum total weight.
double exhaustive_cover(const SuspensionSystem& sys, const SymbolicPoint& leaf,
                        double alpha, double cutoff, int depth_cap) {
  struct Enumerate {
    const SuspensionSystem& sys;
    const SymbolicPoint& leaf;
    double alpha, cutoff;
    int cap;
    // returns every possible cost of covering the subtree at `word`
    std::vector<double> all_costs(std::vector<int>& word) {
      int d = static_cast<int>(word.size());
      std::vector<double> here;
      int n = d - sys.k_r();
      if (n >= 0) {
        SymbolicPoint probe = leaf.materialized(leaf.lo(), 0);
        std::vector<int> win;
        for (int i = leaf.lo(); i <= 0; ++i) win.push_back(probe.at(i));
        for (int s : word) win.push_back(s);
        for (int k = 0; k < 6; ++k) win.push_back(sys.tail().succ[win.back()]);
        SymbolicPoint rep(leaf.lo(), win, leaf.fiber(), leaf.tail());
        double t_order = roof_sum_forward(sys, rep, n) - leaf.fiber();
        if (t_order >= cutoff)
          here.push_back(std::exp(birkhoff(sys, rep, t_order) - t_order * alpha));
      }
      if (d < cap) {
        std::vector<std::vector<double>> per_child;
        int last = d == 0 ? leaf.at(0) : word.back();
        for (int s = 0; s < sys.sft().alphabet(); ++s) {
          if (!sys.sft().allowed(last, s)) continue;
          word.push_back(s);
          per_child.push_back(all_costs(word));
          word.pop_back();
        }
        std::vector<double> combos = {0.0};
        for (const auto& cc : per_child) {
          std::vector<double> next;
          for (double base : combos)
            for (double c : cc) next.push_back(base + c);
          combos = std::move(next);
        }
        here.insert(here.end(), combos.begin(), combos.end());
      }
      return here;
    }
  };
  Enumerate e{sys, leaf, alpha, cutoff, depth_cap};
  std::vector<int> word;
  auto costs = e.all_costs(word);
  REQUIRE(!costs.empty());
  return *std::min_element(costs.begin(), costs.end());
}

}  // namespace

TEST_CASE("whole-leaf cover value on FULL2 is exactly 1 at alpha = log 2") {
  auto sys = fixture("FULL2");
  auto leaf = sys.make_point(0, {0}, 0.0);
  for (double T : {5.0, 10.0, 15.0}) {
    auto res = cover_value(sys, leaf, {}, std::log(2.0), T, 30);
    CHECK(res.value == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cover value above pressure decays toward zero on FULL2") {
  auto sys = fixture("FULL2");
  auto leaf = sys.make_point(0, {0}, 0.0);
  double alpha = std::log(2.0) + 0.1;
  // Uniform weights make the deepest allowed antichain optimal, so the
  // restricted-class infimum is driven by the depth cap.
  double prev = 2.0;
  for (int cap : {10, 20, 30}) {
    auto res = cover_value(sys, leaf, {}, alpha, 5.0, cap);
    CHECK(res.value == doctest::Approx(std::exp(-0.1 * cap)).epsilon(1e-9));
    CHECK(res.value < prev);
    prev = res.value;
  }
  // and weakly nonincreasing in the cutoff at a fixed cap
  double v5 = cover_value(sys, leaf, {}, alpha, 5.0, 30).value;
  double v15 = cover_value(sys, leaf, {}, alpha, 15.0, 30).value;
  CHECK(v15 <= v5 + 1e-15);
}

TEST_CASE("GOLD whole-leaf value at the critical alpha is stable") {
  auto sys = fixture("GOLD");
  auto leaf = sys.make_point(0, {0}, 0.0);
  double v12 = cover_value(sys, leaf, {}, kGolden, 12.0, 40).value;
  double v18 = cover_value(sys, leaf, {}, kGolden, 18.0, 40).value;
  CHECK(v12 > 0.5);
  CHECK(v12 < 2.0);
  CHECK(std::fabs(v18 / v12 - 1.0) < 0.10);
}

TEST_CASE("dp equals exhaustive antichain enumeration at small depth") {
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> da(-0.3, 1.2);
  for (const char* name : {"FULL2", "GOLD"}) {
    auto sys = fixture(name);
    auto leaf = sys.make_point(0, {0}, 0.0);
    for (int rep = 0; rep < 6; ++rep) {
      double alpha = da(rng);
      double cutoff = 2.0;
      int cap = 5;
      double dp = cover_value(sys, leaf, {}, alpha, cutoff, cap).value;
      double ex = exhaustive_cover(sys, leaf, alpha, cutoff, cap);
      CHECK(dp == doctest::Approx(ex).epsilon(1e-12));
    }
  }
}

TEST_CASE("dp equals independent recursion at depth 8, including targets") {
  std::mt19937 rng(72);
  std::uniform_real_distribution<double> da(0.2, 1.0);
  for (const char* name : {"FULL2", "GOLD", "ROOF2", "BERN13"}) {
    auto sys = fixture(name);
    auto leaf = sys.make_point(0, {0}, 0.0);
    for (int rep = 0; rep < 4; ++rep) {
      double alpha = da(rng);
      double cutoff = 3.0;
      int cap = 8;
      double dp = cover_value(sys, leaf, {}, alpha, cutoff, cap).value;
      double bf = brute_force_cover(sys, leaf, {}, alpha, cutoff, cap);
      CHECK(dp == doctest::Approx(bf).epsilon(1e-12));

      // a two-cylinder union target
      std::vector<std::vector<int>> targets = {{0, 0}, {leaf.at(0) == 0 ? 1 : 0}};
      if (name == std::string("GOLD")) targets = {{0, 0}, {1}};
      double dpt = cover_value(sys, leaf, targets, alpha, cutoff, cap).value;
      double bft = brute_force_cover(sys, leaf, targets, alpha, cutoff, cap);
      CHECK(dpt == doctest::Approx(bft).epsilon(1e-12));
    }
  }
}

TEST_CASE("optimal cover is a covering antichain with matching value") {
  auto sys = fixture("GOLD");
  auto leaf = sys.make_point(0, {0}, 0.0);
  auto res = cover_value(sys, leaf, {}, 0.3, 3.0, 8, true);
  REQUIRE(!res.optimal_cover.empty());
  CHECK(static_cast<double>(res.optimal_cover.size()) == res.cover_size);
  double total = 0.0;
  for (const auto& e : res.optimal_cover) total += e.weight_at(0.3);
  CHECK(total == doctest::Approx(res.value).epsilon(1e-12));
  // antichain: no element's word is a prefix of another's
  for (size_t i = 0; i < res.optimal_cover.size(); ++i)
    for (size_t j = 0; j < res.optimal_cover.size(); ++j) {
      if (i == j) continue;
      const auto& a = res.optimal_cover[i].word;
      const auto& b = res.optimal_cover[j].word;
      if (a.size() <= b.size())
        CHECK(!std::equal(a.begin(), a.end(), b.begin()));
    }
  // covering: every admissible word of the maximum depth has a prefix in it
  int maxd = 0;
  for (const auto& e : res.optimal_cover) maxd = std::max<int>(maxd, e.word.size());
  std::function<void(std::vector<int>&)> walk = [&](std::vector<int>& w) {
    if (static_cast<int>(w.size()) == maxd) {
      bool covered = false;
      for (const auto& e : res.optimal_cover)
        if (std::equal(e.word.begin(), e.word.end(), w.begin())) covered = true;
      CHECK(covered);
      return;
    }
    int last = w.empty() ? leaf.at(0) : w.back();
    for (int s = 0; s < 2; ++s) {
      if (!sys.sft().allowed(last, s)) continue;
      w.push_back(s);
      walk(w);
      w.pop_back();
    }
  };
  std::vector<int> w;
  walk(w);
}

TEST_CASE("subadditivity and monotonicity of cover values") {
  auto sys = fixture("BERN13");
  auto leaf = sys.make_point(0, {0}, 0.0);
  double cutoff = 4.0;
  int cap = 14;
  std::vector<std::vector<int>> z1 = {{0, 0}};
  std::vector<std::vector<int>> z2 = {{1, 0}};
  std::vector<std::vector<int>> both = {{0, 0}, {1, 0}};
  double v1 = cover_value(sys, leaf, z1, 0.0, cutoff, cap).value;
  double v2 = cover_value(sys, leaf, z2, 0.0, cutoff, cap).value;
  double vu = cover_value(sys, leaf, both, 0.0, cutoff, cap).value;
  CHECK(vu <= v1 + v2 + 1e-12);

  // alpha-monotonicity
  double lo = cover_value(sys, leaf, both, -0.2, cutoff, cap).value;
  double hi = cover_value(sys, leaf, both, 0.2, cutoff, cap).value;
  CHECK(lo >= vu);
  CHECK(vu >= hi);

  // T-monotonicity relative to the pressure (P = 0 here)
  double above_small = cover_value(sys, leaf, {}, 0.15, 4.0, 30).value;
  double above_large = cover_value(sys, leaf, {}, 0.15, 10.0, 30).value;
  CHECK(above_large <= above_small + 1e-12);
  double below_small = cover_value(sys, leaf, {}, -0.15, 4.0, 30).value;
  double below_large = cover_value(sys, leaf, {}, -0.15, 10.0, 30).value;
  CHECK(below_large >= below_small - 1e-12);
}

TEST_CASE("extrapolate_limit") {
  auto r1 = extrapolate_limit({{5, 1.0}, {10, 1.0}, {15, 1.0}});
  CHECK(r1.value == doctest::Approx(1.0));
  CHECK(!r1.oscillation_flagged);

  auto r2 = extrapolate_limit({{5, 1.5}, {10, 1.25}, {15, 1.125}});
  CHECK(r2.value == doctest::Approx(1.0).epsilon(1e-12));

  auto r3 = extrapolate_limit({{5, 3.0}, {10, 0.4}, {15, 2.7}});
  CHECK(r3.oscillation_flagged);

  CHECK_THROWS(extrapolate_limit({{5, 1.0}, {10, 1.0}}));
}

TEST_CASE("critical value matches oracle pressure") {
  std::vector<double> schedule = {10.0, 14.0, 18.0};
  auto full2 = fixture("FULL2");
  auto est = critical_value(full2, schedule, 40);
  CHECK(std::fabs(est.alpha_star - std::log(2.0)) < 1e-3);

  auto srb3 = fixture("SRB3");
  auto est3 = critical_value(srb3, schedule, 40);
  CHECK(std::fabs(est3.alpha_star - 0.0) < 1e-3);

  auto roof2 = fixture("ROOF2");
  auto est2 = critical_value(roof2, schedule, 40);
  CHECK(std::fabs(est2.alpha_star - kGolden) < 1e-2);

  auto gold = fixture("GOLD");
  auto estg = critical_value(gold, schedule, 40);
  CHECK(std::fabs(estg.alpha_star - kGolden) < 1e-2);
}

TEST_CASE("leaf measures: FULL2 cylinders are exactly dyadic") {
  auto sys = fixture("FULL2");
  auto leaf = sys.make_point(0, {0}, 0.0);
  std::vector<double> cutoffs = {6.0, 10.0, 14.0};
  for (int n = 1; n <= 5; ++n) {
    std::vector<int> word(n, 0);
    auto entry = leaf_measure_u(sys, std::log(2.0), leaf, word, cutoffs, 30);
    CHECK(!entry.unstable);
    for (auto& [T, v] : entry.per_cutoff)
      CHECK(v == doctest::Approx(std::pow(0.5, n)).epsilon(1e-12));
    CHECK(entry.value == doctest::Approx(std::pow(0.5, n)).epsilon(1e-12));

    auto sentry = leaf_measure_s(sys, std::log(2.0), leaf, word, cutoffs, 30);
    CHECK(sentry.value == doctest::Approx(std::pow(0.5, n)).epsilon(1e-12));
  }
}

TEST_CASE("leaf measure ratios match the conditional oracle") {
  std::vector<double> cutoffs = {8.0, 12.0, 16.0};

  auto bern = fixture("BERN13");
  auto leafb = bern.make_point(0, {0}, 0.0);
  double ma = leaf_measure_u(bern, 0.0, leafb, {0}, cutoffs, 40).value;
  double mb = leaf_measure_u(bern, 0.0, leafb, {1}, cutoffs, 40).value;
  CHECK(ma / mb == doctest::Approx(0.5).epsilon(0.01));

  auto gold = fixture("GOLD");
  auto leafg = gold.make_point(0, {0}, 0.0);
  double ga = leaf_measure_u(gold, kGolden, leafg, {0}, cutoffs, 40).value;
  double gb = leaf_measure_u(gold, kGolden, leafg, {1}, cutoffs, 40).value;
  // right Perron eigenvector of [[1,1],[1,0]] has component ratio golden
  double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(gb / ga == doctest::Approx(1.0 / golden).epsilon(0.05));

  // stable side, reversed oracle
  double sa = leaf_measure_s(bern, 0.0, leafb, {0}, cutoffs, 40).value;
  double sb = leaf_measure_s(bern, 0.0, leafb, {1}, cutoffs, 40).value;
  CHECK(sa / sb == doctest::Approx(0.5).epsilon(0.01));

  auto srb = fixture("SRB3");
  auto leafs = srb.make_point(0, {0}, 0.0);
  double ra = leaf_measure_s(srb, 0.0, leafs, {0}, cutoffs, 40).value;
  double rb = leaf_measure_s(srb, 0.0, leafs, {1}, cutoffs, 40).value;
  CHECK(ra / rb == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("leaf measure additivity under refinement") {
  for (const char* name : {"FULL2", "GOLD", "BERN13"}) {
    auto sys = fixture(name);
    auto leaf = sys.make_point(0, {0}, 0.0);
    std::vector<double> cutoffs = {8.0, 12.0, 16.0};
    std::vector<int> parent = {0};
    double mp = leaf_measure_u(sys, flow_pressure(sys), leaf, parent, cutoffs, 40).value;
    double total = 0.0;
    for (int s = 0; s < 2; ++s) {
      if (!sys.sft().allowed(0, s)) continue;
      total += leaf_measure_u(sys, flow_pressure(sys), leaf, {0, s}, cutoffs, 40).value;
    }
    CHECK(total == doctest::Approx(mp).epsilon(0.01));
  }
}

TEST_CASE("proportionality to the oracle over all cylinders of depth <= 6") {
  for (const char* name : {"FULL2", "GOLD", "ROOF2", "BERN13"}) {
    auto sys = fixture(name);
    double P = flow_pressure(sys);
    auto oracle = OracleMeasure::flow_equilibrium(sys);
    auto leaf = sys.make_point(0, {0}, 0.0);
    LeafCoverEngine engine(sys, leaf, P, 14.0, 44, 0);
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    std::function<void(std::vector<int>&)> walk = [&](std::vector<int>& w) {
      if (!w.empty()) {
        double dp = engine.value({w}).value;
        double ora = oracle.conditional_forward_mass(leaf, 0, w);
        double ratio = dp / ora;
        rmin = std::min(rmin, ratio);
        rmax = std::max(rmax, ratio);
      }
      if (w.size() == 6) return;
      int last = w.empty() ? leaf.at(0) : w.back();
      for (int s = 0; s < 2; ++s) {
        if (!sys.sft().allowed(last, s)) continue;
        w.push_back(s);
        walk(w);
        w.pop_back();
      }
    };
    std::vector<int> w;
    walk(w);
    double tol = name == std::string("FULL2") ? 1e-10 : 0.05;
    CHECK(rmax / rmin - 1.0 < tol);
  }
}

TEST_CASE("depth cap too small for cutoff is an error") {
  auto sys = fixture("FULL2");
  auto leaf = sys.make_point(0, {0}, 0.0);
  CHECK_THROWS_AS((void)cover_value(sys, leaf, {}, 0.7, 10.0, 8), std::invalid_argument);
}
