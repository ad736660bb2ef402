#include "carathedyn/product.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "carathedyn/cover.hpp"
#include "carathedyn/holonomy.hpp"
#include "carathedyn/oracle.hpp"

namespace cdyn {

std::string RectSet::key() const {
  std::string out = "[";
  for (int v : past) out += symbol_name(v);
  out += ".";
  out += sym0 >= 0 ? symbol_name(sym0) : std::string("*");
  out += ":";
  for (int v : future) out += symbol_name(v);
  out += "]x[" + std::to_string(fiber.lo) + "," + std::to_string(fiber.hi) + ")";
  return out;
}

namespace {

// Exact integral of e^{log_f} over [a, b] for piecewise log-linear log_f.
// Only interior points are sampled, so breakpoint endpoints are safe.
double exp_integral_rec(const std::function<double(double)>& log_f, double a, double b,
                        int depth) {
  double h = b - a;
  if (h <= 0.0) return 0.0;
  double m1 = a + 0.25 * h, m2 = a + 0.5 * h, m3 = a + 0.75 * h, m4 = a + 0.625 * h;
  double l1 = log_f(m1), l2 = log_f(m2), l3 = log_f(m3);
  double scale = 1.0 + std::fabs(l2);
  bool linear = std::fabs(l2 - 0.5 * (l1 + l3)) < 1e-11 * scale;
  if (linear) {
    double l4 = log_f(m4);
    double pred = l1 + (l3 - l1) * 0.75;  // interpolate at m4
    linear = std::fabs(l4 - pred) < 1e-10 * scale;
  }
  if (linear || depth >= 48) {
    double slope = (l3 - l1) / (m3 - m1);
    double la = l1 - slope * (m1 - a);
    if (std::fabs(slope * h) < 1e-12) return h * std::exp(la + 0.5 * slope * h);
    return (std::exp(la + slope * h) - std::exp(la)) / slope;
  }
  return exp_integral_rec(log_f, a, m2, depth + 1) +
         exp_integral_rec(log_f, m2, b, depth + 1);
}

double exp_integral(const std::function<double(double)>& log_f, double a, double b) {
  if (b <= a) return 0.0;
  if (a < 0.0 && b > 0.0)
    return exp_integral_rec(log_f, a, 0.0, 0) + exp_integral_rec(log_f, 0.0, b, 0);
  return exp_integral_rec(log_f, a, b, 0);
}

struct SliceContext {
  const SuspensionSystem& sys;
  double pressure;
  double cutoff;
  int depth_cap;

  double unstable_slice(const SymbolicPoint& base,
                        const std::vector<std::vector<int>>& words, double tau) const {
    auto fl = flow_with_crossings(sys, base, tau);
    long k = fl.crossings;
    // map each target through the base shift; the whole plaque itself
    // becomes a cylinder once a backward crossing exposes old coordinates
    std::vector<std::vector<int>> mapped;
    bool whole = false;
    auto map_one = [&](const std::vector<int>& w) {
      if (k >= 0) {
        if (static_cast<long>(w.size()) < k)
          throw std::invalid_argument("unstable_slice: word shallower than crossing");
        return std::vector<int>(w.begin() + k, w.end());
      }
      std::vector<int> img;
      for (long i = k + 1; i <= 0; ++i) img.push_back(base.at(i));
      img.insert(img.end(), w.begin(), w.end());
      return img;
    };
    if (words.empty()) {
      auto img = map_one({});
      if (img.empty())
        whole = true;
      else
        mapped.push_back(std::move(img));
    } else {
      for (const auto& w : words) {
        auto img = map_one(w);
        if (img.empty()) whole = true;
        mapped.push_back(std::move(img));
      }
    }
    if (whole) mapped.clear();
    LeafCoverEngine engine(sys, fl.point, pressure, cutoff, depth_cap, 0);
    return engine.value(mapped).value;
  }

  double stable_slice(const SymbolicPoint& base, const std::vector<int>& back_word,
                      double tau) const {
    if (back_word.empty() && tau < 0.0) {
      // split the whole-plaque slice by the symbol crossed backwards
      double acc = 0.0;
      for (int c = 0; c < sys.sft().alphabet(); ++c) {
        if (!sys.sft().allowed(c, base.at(0))) continue;
        acc += stable_slice(base, {c}, tau);
      }
      return acc;
    }
    SymbolicPoint bp = base;
    if (!back_word.empty()) {
      int d = static_cast<int>(back_word.size());
      if (!sys.sft().allowed(back_word.back(), base.at(0)))
        return 0.0;
      SymbolicPoint bm = base.materialized(0, std::max(base.hi(), 1));
      std::vector<int> win(back_word.begin(), back_word.end());
      for (int i = 0; i <= bm.hi(); ++i) win.push_back(bm.at(i));
      TailRule tl{base.tail().succ, sys.tail().prev};
      bp = SymbolicPoint(-d, std::move(win), base.fiber(), std::move(tl));
    }
    auto fl = flow_with_crossings(sys, bp, tau);
    long k = fl.crossings;
    if (k > 0)
      throw std::invalid_argument("stable_slice: positive crossings unsupported");
    if (k < -1) throw std::invalid_argument("stable_slice: offset crosses twice");
    std::vector<int> img(back_word.begin(), back_word.end());
    if (k == -1) {
      if (img.empty()) throw std::logic_error("stable_slice: empty word crossed");
      img.pop_back();  // last symbol absorbed into the flowed leaf
    }
    std::vector<std::vector<int>> targets;
    if (!img.empty()) targets.push_back(img);
    return leaf_value_s(sys, pressure, fl.point, targets.empty()
                                                     ? std::vector<std::vector<int>>{}
                                                     : targets,
                        cutoff, depth_cap);
  }
};

}  // namespace

double weak_leaf_measure(const SuspensionSystem& sys, double pressure,
                         const SymbolicPoint& leaf, const std::vector<int>& back_word,
                         FiberInterval fiber, double cutoff, int depth_cap) {
  if (fiber.empty()) return 0.0;
  SliceContext ctx{sys, pressure, cutoff, depth_cap};
  auto log_f = [&](double tau) {
    double v = ctx.stable_slice(leaf, back_word, tau);
    return std::log(v);
  };
  return exp_integral(log_f, fiber.lo, fiber.hi);
}

// --------------------------------------------------------- ProductEngine

ProductEngine::ProductEngine(const SuspensionSystem& sys, double pressure,
                             Rectangle rect, double cutoff, int depth_cap)
    : sys_(sys), rev_(sys.reversed()), pressure_(pressure), rect_(std::move(rect)),
      cutoff_(cutoff), depth_cap_(depth_cap) {
  if (rect_.delta <= 0.0 || rect_.delta > sys.min_roof() / 2.0)
    throw std::invalid_argument("ProductEngine: delta must lie in (0, min_roof/2]");
  int span = std::max({-sys.potential().window_lo(), -sys.roof().window_lo(), 0}) +
             std::max({sys.potential().window_hi(), sys.roof().window_hi(), 0});
  grid_depth_ = span + 1;
}

double ProductEngine::unstable_slice(const SymbolicPoint& base,
                                     const std::vector<std::vector<int>>& words,
                                     double tau) const {
  SliceContext ctx{sys_, pressure_, cutoff_, depth_cap_};
  return ctx.unstable_slice(base, words, tau);
}

double ProductEngine::stable_slice(const SymbolicPoint& base,
                                   const std::vector<int>& back_word, double tau) const {
  SliceContext ctx{sys_, pressure_, cutoff_, depth_cap_};
  return ctx.stable_slice(base, back_word, tau);
}

std::vector<std::vector<int>> ProductEngine::past_cells(const RectSet& z) const {
  int depth = std::max<int>(z.past.size(), grid_depth_);
  std::vector<std::vector<int>> cells;
  std::vector<int> w(depth);
  // w holds coordinates [-depth, -1]; z.past sits at the right end
  std::function<void(int)> rec = [&](int i) {
    if (i < 0) {
      cells.push_back(w);
      return;
    }
    int coord = -depth + i;  // filling left to right
    (void)coord;
    int zi = static_cast<int>(z.past.size()) - (depth - i);
    for (int s = 0; s < sys_.sft().alphabet(); ++s) {
      if (zi >= 0 && z.past[zi] != s) continue;
      if (i + 1 < depth && !sys_.sft().allowed(s, w[i + 1])) continue;
      if (i + 1 == depth && !sys_.sft().allowed(s, rect_.q.at(0))) continue;
      w[i] = s;
      rec(i - 1);
    }
  };
  rec(depth - 1);
  return cells;
}

std::vector<std::vector<int>> ProductEngine::future_cells(const RectSet& z) const {
  int depth = std::max<int>(z.future.size(), grid_depth_);
  std::vector<std::vector<int>> cells;
  std::vector<int> w;
  std::function<void(void)> rec = [&]() {
    if (static_cast<int>(w.size()) == depth) {
      cells.push_back(w);
      return;
    }
    size_t i = w.size();
    int prev = w.empty() ? rect_.q.at(0) : w.back();
    for (int s = 0; s < sys_.sft().alphabet(); ++s) {
      if (i < z.future.size() && z.future[i] != s) continue;
      if (!sys_.sft().allowed(prev, s)) continue;
      w.push_back(s);
      rec();
      w.pop_back();
    }
  };
  rec();
  return cells;
}

SymbolicPoint ProductEngine::make_z(const std::vector<int>& past,
                                    const std::vector<int>& fut) const {
  int dp = static_cast<int>(past.size());
  std::vector<int> win(past.begin(), past.end());
  win.push_back(rect_.q.at(0));
  win.insert(win.end(), fut.begin(), fut.end());
  TailRule tl{rect_.q.tail().succ, sys_.tail().prev};
  return SymbolicPoint(-dp, std::move(win), 0.0, std::move(tl));
}

SymbolicPoint ProductEngine::make_x(const std::vector<int>& fut) const {
  SymbolicPoint qm = rect_.q.materialized(-(grid_depth_ + 4), 0);
  std::vector<int> win;
  for (int i = qm.lo(); i <= 0; ++i) win.push_back(qm.at(i));
  win.insert(win.end(), fut.begin(), fut.end());
  return SymbolicPoint(qm.lo(), std::move(win), 0.0, rect_.q.tail());
}

SymbolicPoint ProductEngine::make_y(const std::vector<int>& past) const {
  int dp = static_cast<int>(past.size());
  SymbolicPoint qm = rect_.q.materialized(0, grid_depth_ + 4);
  std::vector<int> win(past.begin(), past.end());
  for (int i = 0; i <= qm.hi(); ++i) win.push_back(qm.at(i));
  TailRule tl{rect_.q.tail().succ, sys_.tail().prev};
  return SymbolicPoint(-dp, std::move(win), 0.0, std::move(tl));
}

double ProductEngine::mu(const RectSet& z, int formula) const {
  if (z.sym0 >= 0 && z.sym0 != rect_.q.at(0))
    throw std::invalid_argument("mu_q: set not contained in the rectangle");
  if (z.fiber.lo < -rect_.delta || z.fiber.hi > rect_.delta)
    throw std::invalid_argument("mu_q: set not contained in the rectangle");
  if (z.fiber.empty()) return 0.0;

  auto pasts = past_cells(z);
  auto futs = future_cells(z);
  LeafCoverEngine uq(sys_, rect_.q, pressure_, cutoff_, depth_cap_, 0);
  SliceContext ctx{sys_, pressure_, cutoff_, depth_cap_};

  double total = 0.0;
  switch (formula) {
    case 1: {
      // z-cell traversal; the density is h_q = e^{omega+(z, [z,q]) +
      // omega-(z, [q,z])} against m^u_q x m^cs_q
      for (const auto& w : futs) {
        double mu_w = uq.value({w}).value;
        SymbolicPoint x = make_x(w);
        for (const auto& p : pasts) {
          SymbolicPoint zb = make_z(p, w);
          SymbolicPoint yb = make_y(p);
          double t0s = stable_sync_displacement(sys_, zb, x);
          double t0u = unstable_sync_displacement(sys_, zb, yb);
          auto log_f = [&](double tau) {
            SymbolicPoint zt = flow(sys_, zb, tau);
            SymbolicPoint yt = flow(sys_, yb, tau);
            double op = omega_plus_at(sys_, pressure_, zt, x, t0s - tau).value;
            double om = omega_minus_at(sys_, pressure_, zt, yt, t0u).value;
            double slice = ctx.stable_slice(rect_.q, p, tau);
            return op + om + std::log(slice);
          };
          total += mu_w * exp_integral(log_f, z.fiber.lo, z.fiber.hi);
        }
      }
      break;
    }
    case 2: {
      // (x, y)-cell traversal through the bracket map itself
      for (const auto& w : futs) {
        SymbolicPoint x = make_x(w);
        double mu_w = uq.value({w}).value;
        for (const auto& p : pasts) {
          SymbolicPoint yb = make_y(p);
          BracketResult br = bracket(sys_, x, yb);
          const SymbolicPoint& zb = br.point;
          double t0u = unstable_sync_displacement(sys_, zb, yb);
          auto log_f = [&](double tau) {
            SymbolicPoint zt = flow(sys_, zb, tau);
            SymbolicPoint yt = flow(sys_, yb, tau);
            double op = omega_plus_at(sys_, pressure_, zt, x, br.beta - tau).value;
            double om = omega_minus_at(sys_, pressure_, zt, yt, t0u).value;
            double slice = ctx.stable_slice(rect_.q, p, tau);
            return op + om + std::log(slice);
          };
          total += mu_w * exp_integral(log_f, z.fiber.lo, z.fiber.hi);
        }
      }
      break;
    }
    case 3: {
      // conditional-on-unstable form: inner leaf measures live on the
      // unstable leaves through y
      for (const auto& p : pasts) {
        SymbolicPoint yb = make_y(p);
        for (const auto& w : futs) {
          SymbolicPoint zb = make_z(p, w);
          double t0u = unstable_sync_displacement(sys_, zb, yb);
          auto log_f = [&](double tau) {
            SymbolicPoint zt = flow(sys_, zb, tau);
            SymbolicPoint yt = flow(sys_, yb, tau);
            double om = omega_minus_at(sys_, pressure_, zt, yt, t0u).value;
            double inner = ctx.unstable_slice(yb, {w}, tau);
            double slice = ctx.stable_slice(rect_.q, p, tau);
            return om + std::log(inner) + std::log(slice);
          };
          total += exp_integral(log_f, z.fiber.lo, z.fiber.hi);
        }
      }
      break;
    }
    case 4: {
      // mirror form: weak-stable plaques through x
      for (const auto& w : futs) {
        double mu_w = uq.value({w}).value;
        SymbolicPoint x = make_x(w);
        for (const auto& p : pasts) {
          SymbolicPoint zb = make_z(p, w);
          double t0s = stable_sync_displacement(sys_, zb, x);
          auto log_f = [&](double tau) {
            SymbolicPoint zt = flow(sys_, zb, tau);
            double op = omega_plus_at(sys_, pressure_, zt, x, t0s - tau).value;
            double slice = ctx.stable_slice(x, p, tau);
            return op + std::log(slice);
          };
          total += mu_w * exp_integral(log_f, z.fiber.lo, z.fiber.hi);
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("mu_q: formula must be 1..4");
  }
  return total;
}

std::array<double, 4> ProductEngine::mu_all(const RectSet& z) const {
  return {mu(z, 1), mu(z, 2), mu(z, 3), mu(z, 4)};
}

std::pair<double, double> ProductEngine::conditional_density(
    const std::vector<int>& past, double tau) const {
  RectSet whole{past, {}, {-rect_.delta, rect_.delta}};
  auto futs = future_cells(whole);
  LeafCoverEngine uq(sys_, rect_.q, pressure_, cutoff_, depth_cap_, 0);
  SliceContext ctx{sys_, pressure_, cutoff_, depth_cap_};

  double integral_form = 0.0;
  for (const auto& w : futs) {
    SymbolicPoint x = make_x(w);
    SymbolicPoint zb = make_z(past, w);
    double t0s = stable_sync_displacement(sys_, zb, x);
    SymbolicPoint zt = flow(sys_, zb, tau);
    double op = omega_plus_at(sys_, pressure_, zt, x, t0s - tau).value;
    integral_form += std::exp(op) * uq.value({w}).value;
  }
  SymbolicPoint yb = make_y(past);
  double plaque_form = ctx.unstable_slice(yb, {}, tau);
  return {integral_form, plaque_form};
}

// --------------------------------------------------------- patching

PatchOutcome patch_global(const SuspensionSystem& sys, double pressure,
                          const std::vector<Rectangle>& rects,
                          const std::vector<RectSet>& sets, double cutoff,
                          int depth_cap, double tolerance) {
  PatchOutcome out;
  std::vector<ProductEngine> engines;
  engines.reserve(rects.size());
  for (const auto& r : rects) engines.emplace_back(sys, pressure, r, cutoff, depth_cap);

  for (const auto& z : sets) {
    if (z.sym0 < 0)
      throw std::invalid_argument("patch_global: sets must pin the coordinate-0 symbol");
    std::vector<double> vals;
    for (size_t i = 0; i < rects.size(); ++i) {
      if (rects[i].q.at(0) != z.sym0) continue;
      if (z.fiber.lo < -rects[i].delta || z.fiber.hi > rects[i].delta) continue;
      vals.push_back(engines[i].mu(z, 3));
    }
    if (vals.empty()) {
      out.consistent = false;
      continue;
    }
    double ref = vals.front();
    for (double v : vals) {
      double dev = std::fabs(v / ref - 1.0);
      out.max_overlap_deviation = std::max(out.max_overlap_deviation, dev);
      if (dev > tolerance) out.consistent = false;
    }
    out.table[z.key()] = {ref, "product"};
  }
  return out;
}

// --------------------------------------------------------- SRB product

double srb_product(const SuspensionSystem& sys, const Rectangle& rect,
                   const RectSet& z, double cutoff, int depth_cap) {
  double P = flow_pressure(sys);
  if (std::fabs(P) > 1e-6)
    throw std::invalid_argument("srb_product: flow pressure must vanish");
  if (sys.potential().window_lo() != 0 || sys.potential().window_hi() != 0)
    throw std::invalid_argument("srb_product: per-symbol geometric potential required");
  if (z.fiber.empty()) return 0.0;

  // unstable leaf volume: cylinder [w_1..w_n] has volume prod lambda^{-1},
  // lambda_s = e^{-phi(s)}
  const auto& phi = sys.potential().values();
  double vol = 0.0;
  {
    int depth = std::max<int>(z.future.size(), 1);
    std::function<void(std::vector<int>&, double)> rec = [&](std::vector<int>& w,
                                                             double acc) {
      if (static_cast<int>(w.size()) == depth) {
        vol += acc;
        return;
      }
      size_t i = w.size();
      int prev = w.empty() ? rect.q.at(0) : w.back();
      for (int s = 0; s < sys.sft().alphabet(); ++s) {
        if (i < z.future.size() && z.future[i] != s) continue;
        if (!sys.sft().allowed(prev, s)) continue;
        w.push_back(s);
        rec(w, acc * std::exp(phi[s]));
        w.pop_back();
      }
    };
    std::vector<int> w;
    rec(w, 1.0);
  }

  // transversal: backward-cover measure with determinant weights (the
  // stable leaf measure at zero pressure) times the flat fiber factor
  std::vector<std::vector<int>> back;
  if (!z.past.empty()) back.push_back(z.past);
  double nus = leaf_value_s(sys, 0.0, rect.q, back, cutoff, depth_cap);
  return vol * nus * z.fiber.length();
}

}  // namespace cdyn
