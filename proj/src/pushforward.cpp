#include "carathedyn/pushforward.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "carathedyn/cover.hpp"
#include "carathedyn/oracle.hpp"
#include "carathedyn/parallel.hpp"

namespace cdyn {

namespace {

// trace of a pulled-back product piece on the unstable leaf of `plaque`
// (fiber 0): nonempty iff the piece's fiber interval contains 0 and its
// nonpositive coordinates match the leaf past; the residue is the forward
// word over [1, hi].
bool trace_on_leaf(const SymbolicPoint& plaque, const TwoSidedPiece& piece,
                   LeafTarget* block) {
  if (piece.fiber) {
    if (!(piece.fiber->lo <= 1e-9 && piece.fiber->hi > 1e-9)) return false;
  }
  block->start = 1;
  block->word.clear();
  if (piece.lo > piece.hi) return true;
  for (int i = piece.lo; i <= std::min(piece.hi, 0); ++i)
    if (piece.word[i - piece.lo] != plaque.at(i)) return false;
  if (piece.hi >= 1) {
    block->start = std::max(piece.lo, 1);
    for (int i = block->start; i <= piece.hi; ++i)
      block->word.push_back(piece.word[i - piece.lo]);
  }
  return true;
}

// breakpoints of s -> m^u(f_{-s}Z trace): the trace changes exactly when a
// fiber endpoint of Z, pulled back by s, crosses the leaf fiber
std::vector<double> integrand_breakpoints(const SuspensionSystem& sys,
                                          const TwoSidedPiece& z, double t) {
  std::vector<double> cuts = {0.0, t};
  // refine the base of Z only as far as the roof window needs
  int rlo = sys.roof().window_lo(), rhi = sys.roof().window_hi();
  bool const_roof = sys.min_roof() == sys.max_roof();
  int back = const_roof
                 ? 0
                 : static_cast<int>(std::ceil((t + sys.max_roof()) / sys.min_roof())) + 1;
  int lo = std::min({z.lo > z.hi ? 0 : z.lo, -back + rlo, 0});
  int hi = std::max({z.lo > z.hi ? 0 : z.hi, rhi, 0});
  std::vector<int> w(hi - lo + 1);
  std::function<void(int)> rec = [&](int idx) {
    if (idx == static_cast<int>(w.size())) {
      auto roof_at_pos = [&](long pos) {
        if (const_roof) return sys.min_roof();
        int b0[16];
        for (int k = 0; k < sys.roof().span(); ++k)
          b0[k] = w[pos + sys.roof().window_lo() + k - lo];
        return sys.roof().value_word(
            std::span<const int>(b0, static_cast<size_t>(sys.roof().span())));
      };
      double a = z.fiber ? std::max(0.0, z.fiber->lo) : 0.0;
      double b = z.fiber ? std::min(roof_at_pos(0), z.fiber->hi) : roof_at_pos(0);
      if (b <= a) return;
      // backward arrival times of fiber v at position -j: s = v + sum of
      // roofs over positions -j..-1
      double acc = 0.0;
      for (long j = 0; acc <= t + sys.max_roof(); ++j) {
        if (a + acc < t && a + acc > 0) cuts.push_back(a + acc);
        if (b + acc < t && b + acc > 0) cuts.push_back(b + acc);
        acc += roof_at_pos(-(j + 1));
      }
      return;
    }
    int coordi = lo + idx;
    for (int s = 0; s < sys.sft().alphabet(); ++s) {
      if (z.lo <= z.hi && coordi >= z.lo && coordi <= z.hi &&
          z.word[coordi - z.lo] != s)
        continue;
      if (idx > 0 && !sys.sft().allowed(w[idx - 1], s)) continue;
      w[idx] = s;
      rec(idx + 1);
    }
  };
  rec(0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
             cuts.end());
  return cuts;
}

double trace_mass(const SuspensionSystem& sys, LeafCoverEngine& engine,
                  const SymbolicPoint& plaque, const TwoSidedPiece& z, double s) {
  auto pieces = flow_pieces(sys, z, -s);
  std::vector<LeafTarget> targets;
  bool whole = false;
  LeafTarget block;
  for (const auto& p : pieces) {
    if (!trace_on_leaf(plaque, p, &block)) continue;
    if (block.word.empty()) whole = true;
    targets.push_back(block);
  }
  if (targets.empty()) return 0.0;
  if (whole) targets.clear();
  return engine.value_blocks(targets).value;
}

}  // namespace

double nu_t(const SuspensionSystem& sys, double pressure, const SymbolicPoint& plaque,
            double t, const TwoSidedPiece& z, double cutoff, int depth_cap,
            double quadrature_step) {
  if (t <= 0.0) throw std::invalid_argument("nu_t: t must be positive");
  if (quadrature_step <= 0.0) quadrature_step = 0.05 * sys.min_roof();

  LeafCoverEngine engine(sys, plaque, pressure, cutoff, depth_cap, 0);
  auto cuts = integrand_breakpoints(sys, z, t);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    if (b - a < 1e-12) continue;
    // the integrand is constant on (a, b); sample up to three midpoints to
    // validate the detected partition
    int probes = std::min<long>(3, std::lround(std::ceil((b - a) / quadrature_step)));
    probes = std::max(1, probes);
    double v0 = trace_mass(sys, engine, plaque, z, a + (b - a) * 0.5);
    for (int k = 1; k < probes; ++k) {
      double sk = a + (b - a) * (2.0 * k + 1.0) / (2.0 * probes + 1.0);
      double vk = trace_mass(sys, engine, plaque, z, sk);
      if (std::fabs(vk - v0) > 1e-9 * (1.0 + std::fabs(v0)))
        throw std::runtime_error("nu_t: integrand not constant between breakpoints");
    }
    acc += v0 * (b - a);
  }
  return acc / t;
}

double tv_to_oracle(const SuspensionSystem& sys, double pressure,
                    const SymbolicPoint& plaque, double t, int depth, double cutoff,
                    int depth_cap, double quadrature_step) {
  if (depth > 3) throw std::invalid_argument("tv_to_oracle: depth must be <= 3");
  auto oracle = OracleMeasure::flow_equilibrium(sys);

  // cells: admissible words over [1, depth] x fiber halves; strictly future
  // cells keep clear of the plaque's own coordinates, which makes the
  // depth-1 full-shift case exactly equidistributed at every t
  std::vector<TwoSidedPiece> cells;
  std::vector<int> w;
  std::function<void(void)> build = [&]() {
    if (static_cast<int>(w.size()) == depth) {
      TwoSidedPiece probe;
      probe.lo = 1;
      probe.hi = depth;
      probe.word = w;
      for (int half = 0; half < 2; ++half) {
        TwoSidedPiece c = probe;
        // fiber halves of the minimum roof keep the split word-free
        double rf = sys.min_roof();
        c.fiber = FiberInterval{half == 0 ? 0.0 : rf / 2.0, half == 0 ? rf / 2.0 : rf};
        cells.push_back(c);
      }
      return;
    }
    for (int s = 0; s < sys.sft().alphabet(); ++s) {
      if (!w.empty() && !sys.sft().allowed(w.back(), s)) continue;
      w.push_back(s);
      build();
      w.pop_back();
    }
  };
  build();

  std::vector<double> mine(cells.size()), theirs(cells.size());
  parallel_for(static_cast<int>(cells.size()), [&](int i) {
    mine[i] = nu_t(sys, pressure, plaque, t, cells[i], cutoff, depth_cap,
                   quadrature_step);
    CylinderSet c{cells[i].lo, cells[i].hi, cells[i].word, cells[i].fiber};
    theirs[i] = oracle.mass(c);
  });

  double msum = 0.0, osum = 0.0;
  for (size_t i = 0; i < cells.size(); ++i) {
    msum += mine[i];
    osum += theirs[i];
  }
  double tv = 0.0;
  for (size_t i = 0; i < cells.size(); ++i)
    tv += std::fabs(mine[i] / msum - theirs[i] / osum);
  return 0.5 * tv;
}

}  // namespace cdyn
