#include "carathedyn/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "carathedyn/cover.hpp"

namespace cdyn {

namespace {

int tail_buffer(const SymbolicPoint& x, const SymbolicPoint& y) {
  size_t a = x.tail().succ.size();
  (void)y;
  return static_cast<int>(a * a) + 8;
}

}  // namespace

int futures_agree_from(const SymbolicPoint& x, const SymbolicPoint& y) {
  int horizon = std::max(x.hi(), y.hi()) + tail_buffer(x, y);
  int start = std::min({x.lo(), y.lo(), 0});
  int last_disagree = start - 1;
  for (int i = start; i <= horizon; ++i)
    if (x.at(i) != y.at(i)) last_disagree = i;
  if (last_disagree >= std::max(x.hi(), y.hi()) + 2)
    throw std::invalid_argument("points are not weak-stably related");
  return last_disagree + 1;
}

int pasts_agree_to(const SymbolicPoint& x, const SymbolicPoint& y) {
  int horizon = std::min(x.lo(), y.lo()) - tail_buffer(x, y);
  int start = std::max({x.hi(), y.hi(), 0});
  int last_disagree = start + 1;
  for (int i = start; i >= horizon; --i)
    if (x.at(i) != y.at(i)) last_disagree = i;
  if (last_disagree <= std::min(x.lo(), y.lo()) - 2)
    throw std::invalid_argument("points are not weak-unstably related");
  return last_disagree - 1;
}

double stable_sync_displacement(const SuspensionSystem& sys, const SymbolicPoint& x,
                                const SymbolicPoint& y) {
  int i0 = futures_agree_from(x, y);
  long n = std::max<long>(0, i0 - sys.roof().window_lo());
  double dx = roof_sum_forward(sys, x, n), dy = roof_sum_forward(sys, y, n);
  return (dx - dy) - x.fiber() + y.fiber();
}

double unstable_sync_displacement(const SuspensionSystem& sys, const SymbolicPoint& x,
                                  const SymbolicPoint& y) {
  int j0 = pasts_agree_to(x, y);
  long n = std::max<long>(0, sys.roof().window_hi() - j0);
  double sx = roof_sum_backward(sys, x, n), sy = roof_sum_backward(sys, y, n);
  return (sy - sx) + y.fiber() - x.fiber();
}

BracketResult bracket(const SuspensionSystem& sys, const SymbolicPoint& x,
                      const SymbolicPoint& y) {
  if (x.at(0) != y.at(0))
    throw std::invalid_argument("bracket: not in same rectangle");
  if (!sys.sft().allowed(y.at(0), x.at(1)))
    throw std::invalid_argument("bracket: not in same rectangle");
  if (std::fabs(x.fiber() - y.fiber()) >= sys.min_roof() / 2.0)
    throw std::invalid_argument("bracket: fiber separation too large");

  int lo = std::min(y.lo(), -1);
  int hi = std::max(x.hi(), 1);
  std::vector<int> w(hi - lo + 1);
  for (int i = lo; i <= 0; ++i) w[i - lo] = y.at(i);
  for (int i = 1; i <= hi; ++i) w[i - lo] = x.at(i);
  TailRule t;
  t.succ = x.tail().succ;
  t.prev = y.tail().prev;
  SymbolicPoint z(lo, std::move(w), y.fiber(), std::move(t));

  BracketResult out{z, 0.0, 0.0};
  out.beta = stable_sync_displacement(sys, z, x);
  out.t_displacement = stable_sync_displacement(sys, x, z);
  return out;
}

namespace {

// exact integral of phi(f_{s + shift_x} x) - phi(f_{s + shift_y} y) over
// s in [0, upper]; integrand is piecewise constant between roof crossings
double orbit_difference_integral(const SuspensionSystem& sys, const SymbolicPoint& x,
                                 double shift_x, const SymbolicPoint& y, double shift_y,
                                 double upper) {
  if (upper <= 0.0) return 0.0;
  std::vector<double> cuts = {0.0, upper};
  auto add_crossings = [&](const SymbolicPoint& p, double shift) {
    // crossing times of f_{s+shift}(p): s = S_n - fiber - shift
    double s0 = -p.fiber() - shift;
    long n = 0;
    double acc = 0.0;
    while (true) {
      double s = s0 + acc;
      if (s > upper + 1e-15) break;
      if (s > 1e-15) cuts.push_back(s);
      acc += sys.roof_at(p, n);
      ++n;
    }
    // backward crossings for negative shifts
    acc = 0.0;
    n = 0;
    while (true) {
      --n;
      acc -= sys.roof_at(p, n);
      double s = s0 + acc;
      if (s < 1e-15) break;
      if (s < upper - 1e-15) cuts.push_back(s);
    }
  };
  add_crossings(x, shift_x);
  add_crossings(y, shift_y);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double len = cuts[i + 1] - cuts[i];
    if (len <= 1e-15) continue;
    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    double px = sys.potential_at(flow(sys, x, mid + shift_x), 0);
    double py = sys.potential_at(flow(sys, y, mid + shift_y), 0);
    acc += (px - py) * len;
  }
  return acc;
}

}  // namespace

CocycleValue omega_plus_at(const SuspensionSystem& sys, double pressure,
                           const SymbolicPoint& x, const SymbolicPoint& y, double t) {
  SymbolicPoint xt = flow(sys, x, t);
  // Once both orbits are past every explicitly stored coordinate they run on
  // synchronized tails (the caller guarantees f_t x lies on the strong-stable
  // leaf of y), so the integrand vanishes beyond the window extents.
  int guard = std::max({0, -sys.potential().window_lo(), -sys.roof().window_lo()});
  int stab = std::max({xt.hi(), y.hi(), 1}) + guard + 2;
  double upper = roof_sum_forward(sys, y, stab) - y.fiber();
  double integral = orbit_difference_integral(sys, xt, 0.0, y, 0.0, upper);
  CocycleValue out;
  out.value = birkhoff(sys, x, t) - t * pressure + integral;
  out.truncation_depth = stab;
  out.exact = true;
  return out;
}

CocycleValue omega_plus(const SuspensionSystem& sys, double pressure,
                        const SymbolicPoint& x, const SymbolicPoint& y) {
  return omega_plus_at(sys, pressure, x, y, stable_sync_displacement(sys, x, y));
}

CocycleValue omega_minus_at(const SuspensionSystem& sys, double pressure,
                            const SymbolicPoint& x, const SymbolicPoint& y, double t) {
  SymbolicPoint xt = flow(sys, x, t);
  int guard = std::max({0, sys.potential().window_hi(), sys.roof().window_hi()});
  int stab = std::max({-xt.lo(), -y.lo(), 1}) + guard + 2;
  // integral of phi(f_{-tau} x_t) - phi(f_{-tau} y) for tau in [0, upper];
  // substituting s = upper - tau turns it into a forward-shift integral
  double upper = roof_sum_backward(sys, y, stab) + y.fiber();
  double integral = orbit_difference_integral(sys, xt, -upper, y, -upper, upper);
  CocycleValue out;
  out.value = -birkhoff(sys, x, t) + t * pressure + integral;
  out.truncation_depth = stab;
  out.exact = true;
  return out;
}

CocycleValue omega_minus(const SuspensionSystem& sys, double pressure,
                         const SymbolicPoint& x, const SymbolicPoint& y) {
  return omega_minus_at(sys, pressure, x, y, unstable_sync_displacement(sys, x, y));
}

// ------------------------------------------------------- conformality

ConformalityReport check_conformality(const SuspensionSystem& sys, double pressure,
                                      double t, const SymbolicPoint& leaf,
                                      const std::vector<int>& z_word, double cutoff,
                                      int depth_cap) {
  if (t < 0.0) throw std::invalid_argument("check_conformality: t must be >= 0");
  int wmax = std::max({sys.roof().window_hi(), sys.potential().window_hi(), 0});
  int kmax = static_cast<int>(std::ceil((t + leaf.fiber()) / sys.min_roof())) + 1;
  int refine_depth =
      std::max(static_cast<int>(z_word.size()), kmax + wmax + sys.k_r() + 1);

  ConformalityReport rep;
  LeafCoverEngine src(sys, leaf, pressure, cutoff, depth_cap, 0);

  std::vector<int> w = z_word;
  std::function<void(void)> rec = [&]() {
    if (static_cast<int>(w.size()) == refine_depth) {
      // representative point of the refined cylinder on the leaf
      SymbolicPoint base = leaf.materialized(leaf.lo(), 0);
      std::vector<int> win;
      for (int i = base.lo(); i <= 0; ++i) win.push_back(base.at(i));
      for (int s : w) win.push_back(s);
      TailRule tl = leaf.tail();
      SymbolicPoint rep_pt(base.lo(), win, leaf.fiber(), tl);
      auto fl = flow_with_crossings(sys, rep_pt, t);
      long k = fl.crossings;

      std::vector<std::vector<int>> image;
      std::vector<int> img_word(w.begin() + k, w.end());
      if (!img_word.empty()) image.push_back(img_word);
      LeafCoverEngine dst(sys, fl.point, pressure, cutoff, depth_cap, 0);
      double lhs = dst.value(image).value;
      double phi_c = birkhoff(sys, rep_pt, t);
      double rhs = std::exp(t * pressure - phi_c) * src.value({w}).value;
      rep.lhs += lhs;
      rep.rhs += rhs;
      rep.max_piece_deviation =
          std::max(rep.max_piece_deviation, std::fabs(lhs / rhs - 1.0));
      ++rep.pieces;
      return;
    }
    int last = w.empty() ? leaf.at(0) : w.back();
    for (int s = 0; s < sys.sft().alphabet(); ++s) {
      if (!sys.sft().allowed(last, s)) continue;
      w.push_back(s);
      rec();
      w.pop_back();
    }
  };
  rec();
  rep.ratio = rep.lhs / rep.rhs;
  return rep;
}

HolonomyReport holonomy_rn_check(const SuspensionSystem& sys, double pressure,
                                 const SymbolicPoint& q1, const SymbolicPoint& q2,
                                 const std::vector<std::vector<int>>& z_words,
                                 double cutoff, int depth_cap) {
  if (q1.at(0) != q2.at(0))
    throw std::invalid_argument("holonomy: leaves must share the coordinate-0 symbol");
  int wspan = std::max({-sys.potential().window_lo(), -sys.roof().window_lo(), 0}) +
              std::max({sys.potential().window_hi(), sys.roof().window_hi(), 0});

  HolonomyReport rep;
  LeafCoverEngine src(sys, q1, pressure, cutoff, depth_cap, 0);
  LeafCoverEngine dst(sys, q2, pressure, cutoff, depth_cap, 0);

  for (const auto& z : z_words) {
    int refine_depth = std::max<int>(z.size(), wspan + 1);
    std::vector<int> w = z;
    std::function<void(void)> rec = [&]() {
      if (static_cast<int>(w.size()) == refine_depth) {
        auto mk = [&](const SymbolicPoint& q) {
          SymbolicPoint base = q.materialized(q.lo(), 0);
          std::vector<int> win;
          for (int i = base.lo(); i <= 0; ++i) win.push_back(base.at(i));
          for (int s : w) win.push_back(s);
          // shared future tail, leaf-specific past tail
          TailRule tl{q1.tail().succ, q.tail().prev};
          return SymbolicPoint(base.lo(), win, q.fiber(), std::move(tl));
        };
        SymbolicPoint z_rep = mk(q1);
        SymbolicPoint pz_rep = mk(q2);  // the bracket [z, q2]
        double om = omega_plus(sys, pressure, pz_rep, z_rep).value;
        double lhs = dst.value({w}).value;
        double rhs = std::exp(om) * src.value({w}).value;
        rep.lhs_total += lhs;
        rep.rhs_total += rhs;
        rep.max_deviation = std::max(rep.max_deviation, std::fabs(lhs / rhs - 1.0));
        ++rep.pieces;
        return;
      }
      int last = w.empty() ? q1.at(0) : w.back();
      for (int s = 0; s < sys.sft().alphabet(); ++s) {
        if (!sys.sft().allowed(last, s)) continue;
        w.push_back(s);
        rec();
        w.pop_back();
      }
    };
    rec();
  }
  return rep;
}

}  // namespace cdyn
