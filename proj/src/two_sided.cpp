#include "carathedyn/two_sided.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "carathedyn/cover.hpp"
#include "carathedyn/holonomy.hpp"
#include "carathedyn/oracle.hpp"

namespace cdyn {

TwoSidedBall bstar(const SuspensionSystem& sys, const SymbolicPoint& x, double s,
                   double t) {
  if (s < 1.0 || t < 1.0) throw std::invalid_argument("bstar: s, t must be >= 1");
  long m = 0, n = 0;
  double acc = 0.0;
  while (acc < s) {
    ++m;
    acc += sys.roof_at(x, -m);
  }
  acc = 0.0;
  while (acc < t) {
    acc += sys.roof_at(x, n);
    ++n;
  }
  TwoSidedBall ball{x, s, t, {}, 0.0};
  ball.word.lo = -(static_cast<int>(m) + sys.k_r());
  ball.word.hi = static_cast<int>(n) + sys.k_r();
  ball.word.word.resize(ball.word.hi - ball.word.lo + 1);
  for (int i = ball.word.lo; i <= ball.word.hi; ++i)
    ball.word.word[i - ball.word.lo] = x.at(i);
  ball.beta_halfwidth = sys.r_unit() / (s + t);
  return ball;
}

bool bstar_contains(const SuspensionSystem& sys, const TwoSidedBall& ball,
                    const SymbolicPoint& z) {
  for (int i = ball.word.lo; i <= ball.word.hi; ++i)
    if (z.at(i) != ball.word.symbol_at(i)) return false;
  if (std::fabs(z.fiber() - ball.center.fiber()) >= sys.min_roof() / 2.0)
    return false;
  // matching words put z in the product neighborhood of the center; the
  // displacement is the bracket's strong-stable alignment
  double beta = stable_sync_displacement(
      sys, bracket(sys, ball.center, z).point, ball.center);
  return std::fabs(beta) < ball.beta_halfwidth;
}

// ------------------------------------------------------------ the DP

namespace {

struct TwoSidedEngine {
  const SuspensionSystem& sys;
  double pressure;
  const std::vector<TwoSidedPiece>& target;
  double cutoff;
  int cap;
  TwoSidedOptions opts;

  int k_r = 0;
  int state_past = 1, state_fut = 1;
  double take_floor = 1.0;

  struct Key {
    int a, b, ps, fs;
    uint64_t s_bits, t_bits, l_bits;
    uint64_t compat_lo, compat_hi;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      uint64_t h = static_cast<uint64_t>(k.a) * 1000003u + k.b;
      h = h * 0x9e3779b97f4a7c15ull + static_cast<uint64_t>(k.ps) * 131 + k.fs;
      auto mix = [&](uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      };
      mix(k.s_bits);
      mix(k.t_bits);
      mix(k.l_bits);
      mix(k.compat_lo);
      mix(k.compat_hi);
      return static_cast<size_t>(h);
    }
  };
  std::unordered_map<Key, std::pair<double, double>, KeyHash> memo;

  struct Node {
    int sym0;
    std::vector<int> past;  // past[i] = symbol at coordinate -(i+1)
    std::vector<int> fut;   // fut[i] = symbol at coordinate i+1
  };

  int coord(const Node& nd, int i) const {
    if (i == 0) return nd.sym0;
    if (i > 0) return nd.fut[i - 1];
    return nd.past[-i - 1];
  }

  double window_at(const LocallyConstantFunction& f, const Node& nd, int pos) const {
    int buf[16];
    for (int k = 0; k < f.span(); ++k) buf[k] = coord(nd, pos + f.window_lo() + k);
    return f.value_word(std::span<const int>(buf, static_cast<size_t>(f.span())));
  }

  // achieved orders and the ball weight exponent, word-determined at nodes
  // with both depths >= k_r
  void orders(const Node& nd, double* s, double* t, double* logw) const {
    long m = static_cast<long>(nd.past.size()) - k_r;
    long n = static_cast<long>(nd.fut.size()) - k_r;
    double ss = 0.0, tt = 0.0, lw = 0.0;
    for (long j = 1; j <= m; ++j) {
      double r = window_at(sys.roof(), nd, -static_cast<int>(j));
      ss += r;
      lw += window_at(sys.potential(), nd, -static_cast<int>(j)) * r;
    }
    for (long j = 0; j < n; ++j) {
      double r = window_at(sys.roof(), nd, static_cast<int>(j));
      tt += r;
      lw += window_at(sys.potential(), nd, static_cast<int>(j)) * r;
    }
    *s = ss;
    *t = tt;
    *logw = lw;
  }

  bool compatible(const Node& nd, const TwoSidedPiece& p) const {
    if (p.lo > p.hi) return true;
    int a = static_cast<int>(nd.past.size()), b = static_cast<int>(nd.fut.size());
    int lo = std::max(p.lo, -a), hi = std::min(p.hi, b);
    for (int i = lo; i <= hi; ++i)
      if (coord(nd, i) != p.word[i - p.lo]) return false;
    return true;
  }
  bool covers_base(const Node& nd, const TwoSidedPiece& p) const {
    int a = static_cast<int>(nd.past.size()), b = static_cast<int>(nd.fut.size());
    return p.lo > p.hi || (-a <= p.lo && b >= p.hi);
  }

  double fiber_need(const Node& nd, double roof0) const {
    std::vector<std::pair<double, double>> ivals;
    for (const auto& p : target) {
      if (!compatible(nd, p)) continue;
      double lo = p.fiber ? std::max(0.0, p.fiber->lo) : 0.0;
      double hi = p.fiber ? std::min(roof0, p.fiber->hi) : roof0;
      if (hi > lo) ivals.push_back({lo, hi});
    }
    std::sort(ivals.begin(), ivals.end());
    double total = 0.0, cur_lo = 0.0, cur_hi = -1.0;
    bool open = false;
    for (auto& [lo, hi] : ivals) {
      if (!open || lo > cur_hi) {
        if (open) total += cur_hi - cur_lo;
        cur_lo = lo;
        cur_hi = hi;
        open = true;
      } else {
        cur_hi = std::max(cur_hi, hi);
      }
    }
    if (open) total += cur_hi - cur_lo;
    return total;
  }

  void emit(const Node& nd, double s, double t, long tiles,
            std::vector<TwoSidedElement>* out) const {
    TwoSidedElement e;
    int a = static_cast<int>(nd.past.size()), b = static_cast<int>(nd.fut.size());
    e.lo = -a;
    for (int i = -a; i <= b; ++i) e.word.push_back(coord(nd, i));
    e.s = s;
    e.t = t;
    e.fiber_tiles = tiles;
    out->push_back(e);
  }

  std::pair<double, double> run(Node& nd, bool inside,
                                std::vector<TwoSidedElement>* out) {
    int a = static_cast<int>(nd.past.size()), b = static_cast<int>(nd.fut.size());

    uint64_t compat_lo = 0, compat_hi = 0;
    if (!inside) {
      bool relevant = false;
      inside = true;
      for (size_t i = 0; i < target.size(); ++i) {
        if (!compatible(nd, target[i])) continue;
        relevant = true;
        if (i < 64)
          compat_lo |= uint64_t{1} << i;
        else
          compat_hi |= uint64_t{1} << (i - 64);
        if (!covers_base(nd, target[i])) inside = false;
      }
      if (!relevant) return {0.0, 0.0};
      if (inside) compat_lo = compat_hi = 0;
    }

    bool deep = a >= k_r && b >= k_r;
    double s = 0.0, t = 0.0, logw = 0.0, roof0 = 0.0, need = 0.0;
    long tiles = 0;
    bool can_take = false;
    double take = std::numeric_limits<double>::infinity();
    if (deep) {
      orders(nd, &s, &t, &logw);
      roof0 = window_at(sys.roof(), nd, 0);
      can_take = s >= take_floor && t >= take_floor;
      if (can_take) {
        need = fiber_need(nd, roof0);
        if (need <= 0.0) {
          take = 0.0;
        } else {
          tiles = static_cast<long>(std::ceil(need * (s + t) / sys.r_unit() - 1e-12));
          take = static_cast<double>(tiles) / (s + t) *
                 std::exp(logw - (s + t) * pressure);
        }
      }
    }

    // Memo covers both target-settled nodes and partially-settled nodes:
    // the compatibility mask together with the trailing states determines
    // every value-relevant feature of the subtree. The trailing windows may
    // cross the center coordinate.
    int total_len = a + b + 1;
    bool memoizable = !out && total_len >= state_past && total_len >= state_fut &&
                      target.size() <= 128;
    Key key{};
    if (memoizable) {
      int ps = 0, fs = 0;
      for (int i = 0; i < state_past; ++i)
        ps = ps * sys.sft().alphabet() + coord(nd, -a + i);
      for (int i = 0; i < state_fut; ++i)
        fs = fs * sys.sft().alphabet() + coord(nd, b - state_fut + 1 + i);
      double l_for_key = fiber_need(nd, window_at(sys.roof(), nd, 0));
      key = Key{a, b, ps, fs, 0, 0, 0, compat_lo, compat_hi};
      key.compat_lo = inside ? ~uint64_t{0} : compat_lo;
      key.compat_hi = inside ? ~uint64_t{0} : compat_hi;
      std::memcpy(&key.s_bits, &s, 8);
      std::memcpy(&key.t_bits, &t, 8);
      std::memcpy(&key.l_bits, &l_for_key, 8);
      auto it = memo.find(key);
      if (it != memo.end()) {
        double v = std::exp(logw) * it->second.first;
        return {v > kValueInfinity ? std::numeric_limits<double>::infinity() : v,
                it->second.second};
      }
    }

    auto extend_fut = [&](int c) {
      nd.fut.push_back(c);
    };
    auto extend_past = [&](int c) { nd.past.push_back(c); };

    auto refine_fut = [&]() -> std::pair<double, double> {
      double vs = 0.0, cs = 0.0;
      int edge = b == 0 ? nd.sym0 : nd.fut[b - 1];
      for (int c = 0; c < sys.sft().alphabet(); ++c) {
        if (!sys.sft().allowed(edge, c)) continue;
        extend_fut(c);
        auto [v, cc] = run(nd, inside, out);
        nd.fut.pop_back();
        vs += v;
        cs += cc;
        if (vs > kValueInfinity) return {std::numeric_limits<double>::infinity(), cs};
      }
      return {vs, cs};
    };
    auto refine_past = [&]() -> std::pair<double, double> {
      double vs = 0.0, cs = 0.0;
      int edge = a == 0 ? nd.sym0 : nd.past[a - 1];
      for (int c = 0; c < sys.sft().alphabet(); ++c) {
        if (!sys.sft().allowed(c, edge)) continue;
        extend_past(c);
        auto [v, cc] = run(nd, inside, out);
        nd.past.pop_back();
        vs += v;
        cs += cc;
        if (vs > kValueInfinity) return {std::numeric_limits<double>::infinity(), cs};
      }
      return {vs, cs};
    };
    auto refine_both = [&]() -> std::pair<double, double> {
      double vs = 0.0, cs = 0.0;
      int pedge = a == 0 ? nd.sym0 : nd.past[a - 1];
      int fedge = b == 0 ? nd.sym0 : nd.fut[b - 1];
      for (int cp = 0; cp < sys.sft().alphabet(); ++cp) {
        if (!sys.sft().allowed(cp, pedge)) continue;
        for (int cf = 0; cf < sys.sft().alphabet(); ++cf) {
          if (!sys.sft().allowed(fedge, cf)) continue;
          extend_past(cp);
          extend_fut(cf);
          auto [v, cc] = run(nd, inside, out);
          nd.past.pop_back();
          nd.fut.pop_back();
          vs += v;
          cs += cc;
          if (vs > kValueInfinity) return {std::numeric_limits<double>::infinity(), cs};
        }
      }
      return {vs, cs};
    };

    std::pair<double, double> best;
    if (opts.symmetric_forced) {
      bool at_cap = a >= cap || b >= cap;
      if (at_cap) {
        if (!can_take)
          throw std::invalid_argument("two-sided dp: depth_cap too small for cutoff");
        best = {take, 1.0};
        if (out) emit(nd, s, t, tiles, out);
      } else {
        size_t mark = out ? out->size() : 0;
        auto both = refine_both();
        if (can_take && take < both.first) {
          if (out) {
            out->resize(mark);
            emit(nd, s, t, tiles, out);
          }
          best = {take, 1.0};
        } else {
          best = both;
        }
      }
    } else {
      if (a >= cap && b >= cap) {
        if (!can_take)
          throw std::invalid_argument("two-sided dp: depth_cap too small for cutoff");
        best = {take, 1.0};
        if (out) emit(nd, s, t, tiles, out);
      } else {
        size_t mark = out ? out->size() : 0;
        auto vf = b < cap ? refine_fut()
                          : std::pair<double, double>{
                                std::numeric_limits<double>::infinity(), 0.0};
        size_t end_f = out ? out->size() : 0;
        auto vp = a < cap ? refine_past()
                          : std::pair<double, double>{
                                std::numeric_limits<double>::infinity(), 0.0};
        // tie preference: refine-future, then refine-past, then take
        if (vf.first <= vp.first && (!can_take || vf.first <= take)) {
          if (out) out->resize(end_f);
          best = vf;
        } else if (!can_take || vp.first <= take) {
          if (out) out->erase(out->begin() + mark, out->begin() + end_f);
          best = vp;
        } else {
          if (out) {
            out->resize(mark);
            emit(nd, s, t, tiles, out);
          }
          best = {take, 1.0};
        }
      }
    }

    if (best.first > kValueInfinity)
      best.first = std::numeric_limits<double>::infinity();
    if (memoizable) memo.emplace(key, std::make_pair(best.first / std::exp(logw), best.second));
    return best;
  }
};

}  // namespace

TwoSidedResult m_value(const SuspensionSystem& sys, double pressure,
                       const std::vector<TwoSidedPiece>& target, double cutoff_T,
                       int depth_cap, TwoSidedOptions opts) {
  if (cutoff_T < 1.0) throw std::invalid_argument("m_value: cutoff_T must be >= 1");
  int rl = sys.roof().window_lo(), rh = sys.roof().window_hi();
  int pl = sys.potential().window_lo(), ph = sys.potential().window_hi();
  if (std::max({rh, ph, -rl, -pl}) > sys.k_r())
    throw std::invalid_argument("m_value: k_r too small for the function windows");

  TwoSidedEngine eng{sys, pressure, target, cutoff_T, depth_cap, opts};
  eng.k_r = sys.k_r();
  eng.take_floor = std::max(cutoff_T, 1.0);
  eng.state_past = sys.k_r() + std::max({rh, ph, 0}) + 1;
  eng.state_fut = sys.k_r() + std::max({-rl, -pl, 0}) + 1;

  TwoSidedResult res;
  res.cutoff_T = cutoff_T;
  res.depth_cap = depth_cap;
  double total = 0.0, count = 0.0;
  for (int c = 0; c < sys.sft().alphabet(); ++c) {
    bool ok = false;
    for (const auto& p : target)
      if (p.lo > p.hi || p.lo > 0 || p.hi < 0 || p.word[-p.lo] == c) ok = true;
    if (!ok) continue;
    TwoSidedEngine::Node nd{c, {}, {}};
    auto [v, cnt] =
        eng.run(nd, false, opts.record_cover ? &res.cover : nullptr);
    total += v;
    count += cnt;
  }
  res.value = total > kValueInfinity ? std::numeric_limits<double>::infinity() : total;
  res.cover_size = count;
  return res;
}

// ------------------------------------------------------------ flow map

std::vector<TwoSidedPiece> flow_pieces(const SuspensionSystem& sys,
                                       const TwoSidedPiece& piece, double tau) {
  std::vector<TwoSidedPiece> out;
  bool const_roof = sys.min_roof() == sys.max_roof();
  int extra = const_roof ? 0
                         : static_cast<int>(std::ceil(
                               (std::fabs(tau) + sys.max_roof()) / sys.min_roof())) +
                               1;
  int rlo = sys.roof().window_lo(), rhi = sys.roof().window_hi();
  // only the side the crossings sweep through needs refining
  int extra_fut = tau >= 0 ? extra : 0;
  int extra_past = tau >= 0 ? 0 : extra;
  int need_lo = std::min({piece.lo > piece.hi ? 0 : piece.lo, -extra_past + rlo, rlo, 0});
  int need_hi = std::max({piece.lo > piece.hi ? 0 : piece.hi, extra_fut + rhi, rhi, 0});

  std::vector<int> w(need_hi - need_lo + 1);
  std::function<void(int)> rec = [&](int idx) {
    if (idx == static_cast<int>(w.size())) {
      auto roof_at_pos = [&](long pos) {
        if (const_roof) return sys.min_roof();
        int b0[16];
        for (int k = 0; k < sys.roof().span(); ++k)
          b0[k] = w[pos + sys.roof().window_lo() + k - need_lo];
        return sys.roof().value_word(
            std::span<const int>(b0, static_cast<size_t>(sys.roof().span())));
      };
      // cumulative crossing times: T(k) for k >= 0 sums roofs 0..k-1,
      // for k < 0 it is minus the sum over k..-1
      auto T = [&](long k) {
        double acc = 0.0;
        if (k >= 0)
          for (long j = 0; j < k; ++j) acc += roof_at_pos(j);
        else
          for (long j = k; j < 0; ++j) acc -= roof_at_pos(j);
        return acc;
      };
      double roof0 = roof_at_pos(0);
      double flo = piece.fiber ? std::max(0.0, piece.fiber->lo) : 0.0;
      double fhi = piece.fiber ? std::min(roof0, piece.fiber->hi) : roof0;
      if (fhi <= flo) return;
      // crossing count of v + tau jumps at v = T(k) - tau
      double lo = flo;
      while (lo < fhi - 1e-14) {
        double f = lo + 1e-13 + tau;
        long k = 0;
        while (f >= T(k + 1)) ++k;
        while (f < T(k)) --k;
        double hi = std::min(fhi, T(k + 1) - tau);
        if (hi <= lo) hi = std::min(fhi, lo + 1e-12);
        TwoSidedPiece img;
        img.lo = need_lo - static_cast<int>(k);
        img.hi = need_hi - static_cast<int>(k);
        img.word = w;
        img.fiber = FiberInterval{lo + tau - T(k), hi + tau - T(k)};
        out.push_back(std::move(img));
        lo = hi;
      }
      return;
    }
    int coordi = need_lo + idx;
    for (int s = 0; s < sys.sft().alphabet(); ++s) {
      if (piece.lo <= piece.hi && coordi >= piece.lo && coordi <= piece.hi &&
          piece.word[coordi - piece.lo] != s)
        continue;
      if (idx > 0 && !sys.sft().allowed(w[idx - 1], s)) continue;
      w[idx] = s;
      rec(idx + 1);
    }
  };
  rec(0);
  return out;
}

FlowInvarianceReport flow_invariance_check(const SuspensionSystem& sys, double pressure,
                                           const std::vector<TwoSidedPiece>& target,
                                           double tau, double cutoff_T, int depth_cap,
                                           TwoSidedOptions opts) {
  FlowInvarianceReport rep;
  rep.value = m_value(sys, pressure, target, cutoff_T, depth_cap, opts).value;
  std::vector<TwoSidedPiece> flowed;
  for (const auto& p : target) {
    auto imgs = flow_pieces(sys, p, tau);
    flowed.insert(flowed.end(), imgs.begin(), imgs.end());
  }
  rep.flowed_value = m_value(sys, pressure, flowed, cutoff_T, depth_cap, opts).value;
  rep.ratio = rep.flowed_value / rep.value;
  return rep;
}

double gibbs_star_check(const SuspensionSystem& sys, double pressure,
                        std::span<const GibbsStarSample> samples, double cutoff_T,
                        int depth_cap) {
  double bound = 1.0;
  for (const auto& smp : samples) {
    if (smp.s < cutoff_T || smp.t < cutoff_T)
      throw std::invalid_argument("gibbs_star_check: sample orders below cutoff");
    // snap the orders to completed roof sums
    long m = 0, n = 0;
    double sstar = 0.0, tstar = 0.0;
    while (sstar < smp.s) {
      ++m;
      sstar += sys.roof_at(smp.x, -m);
    }
    while (tstar < smp.t) {
      tstar += sys.roof_at(smp.x, n);
      ++n;
    }
    TwoSidedPiece ball;
    ball.lo = -(static_cast<int>(m) + sys.k_r());
    ball.hi = static_cast<int>(n) + sys.k_r();
    ball.word.resize(ball.hi - ball.lo + 1);
    for (int i = ball.lo; i <= ball.hi; ++i) ball.word[i - ball.lo] = smp.x.at(i);
    double halfwidth = sys.r_unit() / (sstar + tstar);
    double u = smp.x.fiber();
    double roof0 = sys.roof_at(smp.x, 0);
    ball.fiber = FiberInterval{std::max(0.0, u - halfwidth),
                               std::min(roof0, u + halfwidth)};
    double mass = m_value(sys, pressure, {ball}, cutoff_T, depth_cap).value;
    SymbolicPoint back = flow(sys, smp.x.with_fiber(0.0), -sstar);
    double phi = birkhoff(sys, back, sstar + tstar);
    double rho = mass * (sstar + tstar) * std::exp((sstar + tstar) * pressure - phi);
    bound = std::max(bound, std::max(rho, 1.0 / rho));
  }
  return bound;
}

SrbMainReport srb_main_check(const SuspensionSystem& sys,
                             const std::vector<TwoSidedPiece>& family, double cutoff_T,
                             int depth_cap) {
  double P = flow_pressure(sys);
  if (std::fabs(P) > 1e-6)
    throw std::invalid_argument("srb_main_check: flow pressure must vanish");
  auto oracle = OracleMeasure::flow_equilibrium(sys);

  SrbMainReport rep;
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (const auto& z : family) {
    double m = m_value(sys, 0.0, {z}, cutoff_T, depth_cap).value;
    CylinderSet c;
    c.lo = z.lo;
    c.hi = z.hi;
    c.word = z.word;
    if (z.fiber) c.fiber = *z.fiber;
    double o = oracle.mass(c);
    double ratio = m / o;
    rep.ratios.push_back(ratio);
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
  }
  TwoSidedPiece whole;
  double mw = m_value(sys, 0.0, {whole}, cutoff_T, depth_cap).value;
  rep.whole_space_ratio = mw;
  rmin = std::min(rmin, rep.whole_space_ratio);
  rmax = std::max(rmax, rep.whole_space_ratio);
  rep.spread = rmax / rmin - 1.0;
  return rep;
}

}  // namespace cdyn
