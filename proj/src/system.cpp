#include "carathedyn/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdyn {

std::string symbol_name(int s) {
  if (s < 0 || s >= 26) return "#" + std::to_string(s);
  return std::string(1, static_cast<char>('a' + s));
}

// ---------------------------------------------------------------- Sft

Sft::Sft(int alphabet_size, std::vector<uint8_t> transitions)
    : n_(alphabet_size), transitions_(std::move(transitions)) {
  if (n_ < 2) throw std::invalid_argument("Sft: alphabet_size must be >= 2");
  if (transitions_.size() != static_cast<size_t>(n_) * n_)
    throw std::invalid_argument("Sft: transition matrix size mismatch");
  validate();
}

void Sft::validate() const {
  for (int s = 0; s < n_; ++s) {
    bool has_succ = false, has_pred = false;
    for (int t = 0; t < n_; ++t) {
      has_succ |= allowed(s, t);
      has_pred |= allowed(t, s);
    }
    if (!has_succ || !has_pred)
      throw std::invalid_argument("Sft: symbol " + symbol_name(s) +
                                  " lacks a successor or predecessor");
  }
  // Primitivity: some power of the matrix is strictly positive. The Wielandt
  // bound (n-1)^2 + 1 caps the exponent to check.
  std::vector<uint8_t> pow = transitions_, next(n_ * n_);
  int cap = (n_ - 1) * (n_ - 1) + 1;
  for (int e = 1; e <= cap; ++e) {
    bool all = true;
    for (int i = 0; i < n_ * n_ && all; ++i) all = pow[i] != 0;
    if (all) return;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        uint8_t v = 0;
        for (int k = 0; k < n_; ++k) v |= pow[i * n_ + k] & transitions_[k * n_ + j];
        next[i * n_ + j] = v;
      }
    pow.swap(next);
  }
  throw std::invalid_argument("Sft: transition matrix is not primitive");
}

int Sft::min_successor(int s) const {
  for (int t = 0; t < n_; ++t)
    if (allowed(s, t)) return t;
  throw std::logic_error("Sft: no successor");
}

int Sft::min_predecessor(int s) const {
  for (int t = 0; t < n_; ++t)
    if (allowed(t, s)) return t;
  throw std::logic_error("Sft: no predecessor");
}

// ------------------------------------------- LocallyConstantFunction

LocallyConstantFunction::LocallyConstantFunction(int alphabet, int window_lo,
                                                 int window_hi,
                                                 std::vector<double> values)
    : alphabet_(alphabet), lo_(window_lo), hi_(window_hi), table_(std::move(values)) {
  if (window_lo > 0 || window_hi < 0)
    throw std::invalid_argument("LocallyConstantFunction: window must contain 0");
  size_t expect = 1;
  for (int i = 0; i < span(); ++i) expect *= alphabet_;
  if (table_.size() != expect)
    throw std::invalid_argument("LocallyConstantFunction: value table size mismatch");
}

LocallyConstantFunction LocallyConstantFunction::constant(int alphabet, double c) {
  return LocallyConstantFunction(alphabet, 0, 0, std::vector<double>(alphabet, c));
}

LocallyConstantFunction LocallyConstantFunction::per_symbol(int alphabet,
                                                            std::vector<double> values) {
  return LocallyConstantFunction(alphabet, 0, 0, std::move(values));
}

double LocallyConstantFunction::value_word(std::span<const int> word) const {
  size_t idx = 0;
  for (int v : word) idx = idx * alphabet_ + static_cast<size_t>(v);
  return table_[idx];
}

double LocallyConstantFunction::min_value() const {
  return *std::min_element(table_.begin(), table_.end());
}

double LocallyConstantFunction::max_value() const {
  return *std::max_element(table_.begin(), table_.end());
}

// ---------------------------------------------------- SymbolicPoint

SymbolicPoint::SymbolicPoint(int lo, std::vector<int> window, double fiber,
                             TailRule tail)
    : lo_(lo), window_(std::move(window)), fiber_(fiber), tail_(std::move(tail)) {
  if (window_.empty()) throw std::invalid_argument("SymbolicPoint: empty window");
  if (lo_ > 0 || hi() < 0)
    throw std::invalid_argument("SymbolicPoint: window must contain coordinate 0");
}

int SymbolicPoint::at(long i) const {
  if (i >= lo_ && i <= hi()) return window_[i - lo_];
  if (i > hi()) {
    int s = window_.back();
    for (long k = hi(); k < i; ++k) s = tail_.succ[s];
    return s;
  }
  int s = window_.front();
  for (long k = lo_; k > i; --k) s = tail_.prev[s];
  return s;
}

SymbolicPoint SymbolicPoint::with_fiber(double f) const {
  SymbolicPoint q = *this;
  q.fiber_ = f;
  return q;
}

SymbolicPoint SymbolicPoint::shifted(long n) const {
  // Materialize enough that coordinate 0 stays inside the stored window.
  SymbolicPoint q = materialized(static_cast<int>(std::min<long>(lo_, n)),
                                 static_cast<int>(std::max<long>(hi(), n)));
  q.lo_ = static_cast<int>(q.lo_ - n);
  return q;
}

SymbolicPoint SymbolicPoint::materialized(int lo, int hi_req) const {
  int nlo = std::min(lo, lo_);
  int nhi = std::max(hi_req, hi());
  std::vector<int> w(nhi - nlo + 1);
  for (int i = nlo; i <= nhi; ++i) w[i - nlo] = at(i);
  return SymbolicPoint(nlo, std::move(w), fiber_, tail_);
}

std::string SymbolicPoint::str() const {
  std::string out;
  for (int i = lo_; i <= hi(); ++i) {
    if (i == 0) out += '.';
    out += symbol_name(window_[i - lo_]);
  }
  return out;
}

std::string CylinderSet::key() const {
  std::string out = "[";
  if (!base_unconstrained()) {
    out += std::to_string(lo) + ":";
    for (int v : word) out += symbol_name(v);
  }
  out += "]";
  if (fiber) out += "x[" + std::to_string(fiber->lo) + "," + std::to_string(fiber->hi) + ")";
  return out;
}

// ------------------------------------------------- SuspensionSystem

SuspensionSystem::SuspensionSystem(Sft sft, LocallyConstantFunction roof,
                                   LocallyConstantFunction potential, int k_r,
                                   std::optional<double> r_unit)
    : sft_(std::move(sft)), roof_(std::move(roof)), potential_(std::move(potential)),
      k_r_(k_r) {
  if (k_r_ < 0) throw std::invalid_argument("SuspensionSystem: k_r must be >= 0");
  if (roof_.alphabet() != sft_.alphabet() || potential_.alphabet() != sft_.alphabet())
    throw std::invalid_argument("SuspensionSystem: alphabet mismatch");
  min_roof_ = roof_.min_value();
  max_roof_ = roof_.max_value();
  if (min_roof_ <= 0.0)
    throw std::invalid_argument("SuspensionSystem: roof must be strictly positive");
  r_unit_ = r_unit.value_or(min_roof_ / 4.0);
  if (r_unit_ <= 0.0) throw std::invalid_argument("SuspensionSystem: r_unit must be > 0");
  tail_.succ.resize(sft_.alphabet());
  tail_.prev.resize(sft_.alphabet());
  for (int s = 0; s < sft_.alphabet(); ++s) {
    tail_.succ[s] = sft_.min_successor(s);
    tail_.prev[s] = sft_.min_predecessor(s);
  }
}

namespace {
double eval_window(const LocallyConstantFunction& f, const SymbolicPoint& p, long pos) {
  int n = f.span();
  int buf[16];
  std::vector<int> big;
  int* w = buf;
  if (n > 16) {
    big.resize(n);
    w = big.data();
  }
  for (int k = 0; k < n; ++k) w[k] = p.at(pos + f.window_lo() + k);
  return f.value_word(std::span<const int>(w, static_cast<size_t>(n)));
}
}  // namespace

double SuspensionSystem::roof_at(const SymbolicPoint& p, long pos) const {
  return eval_window(roof_, p, pos);
}

double SuspensionSystem::potential_at(const SymbolicPoint& p, long pos) const {
  return eval_window(potential_, p, pos);
}

SymbolicPoint SuspensionSystem::make_point(int lo, std::vector<int> window,
                                           double fiber) const {
  SymbolicPoint p(lo, std::move(window), fiber, tail_);
  for (int i = p.lo(); i < p.hi(); ++i)
    if (!sft_.allowed(p.at(i), p.at(i + 1)))
      throw std::invalid_argument("make_point: inadmissible word");
  return p;
}

SymbolicPoint SuspensionSystem::periodic_point(std::span<const int> cycle,
                                               double fiber) const {
  if (cycle.empty()) throw std::invalid_argument("periodic_point: empty cycle");
  for (size_t i = 0; i < cycle.size(); ++i)
    if (!sft_.allowed(cycle[i], cycle[(i + 1) % cycle.size()]))
      throw std::invalid_argument("periodic_point: inadmissible cycle");
  int n = static_cast<int>(cycle.size());
  std::vector<int> w(cycle.begin(), cycle.end());
  TailRule t = tail_;
  // Tails follow the cycle itself.
  for (size_t i = 0; i < cycle.size(); ++i) {
    t.succ[cycle[i]] = cycle[(i + 1) % cycle.size()];
    t.prev[cycle[(i + 1) % cycle.size()]] = cycle[i];
  }
  SymbolicPoint p(0, std::move(w), fiber, std::move(t));
  (void)n;
  return p;
}

SymbolicPoint SuspensionSystem::parse_point(const std::string& text, double fiber) const {
  auto dot = text.find('.');
  if (dot == std::string::npos) throw std::invalid_argument("parse_point: missing '.'");
  std::vector<int> w;
  for (char c : text)
    if (c != '.') w.push_back(c - 'a');
  if (w.empty()) throw std::invalid_argument("parse_point: empty word");
  int lo = -static_cast<int>(dot);
  if (lo > 0 || lo + static_cast<int>(w.size()) - 1 < 0) {
    // Dot at an end: pad with the tail of the neighbouring symbol.
    if (lo > 0) throw std::invalid_argument("parse_point: no coordinate 0");
    w.push_back(tail_.succ[w.back()]);
  }
  return make_point(lo, std::move(w), fiber);
}

SuspensionSystem SuspensionSystem::reversed() const {
  int n = sft_.alphabet();
  std::vector<uint8_t> tr(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) tr[i * n + j] = sft_.allowed(j, i) ? 1 : 0;

  auto reflect = [n](const LocallyConstantFunction& f) {
    // Index reflection i -> -i. The reflected function has window
    // [-hi, -lo] and reads its word in reverse; reflected position j
    // evaluates the original function at position -j.
    int span = f.span();
    size_t total = f.values().size();
    std::vector<double> vals(total);
    std::vector<int> word(span), rword(span);
    for (size_t idx = 0; idx < total; ++idx) {
      size_t x = idx;
      for (int k = span - 1; k >= 0; --k) {
        word[k] = static_cast<int>(x % n);
        x /= n;
      }
      for (int k = 0; k < span; ++k) rword[k] = word[span - 1 - k];
      size_t ridx = 0;
      for (int v : rword) ridx = ridx * n + static_cast<size_t>(v);
      vals[ridx] = f.values()[idx];
    }
    return LocallyConstantFunction(n, -f.window_hi(), -f.window_lo(), std::move(vals));
  };

  return SuspensionSystem(Sft(n, std::move(tr)), reflect(roof_), reflect(potential_),
                          k_r_, r_unit_);
}

// ------------------------------------------------------- operations

SymbolicPoint shift(const SymbolicPoint& p, long n) { return p.shifted(n); }

SymbolicPoint reflect_point(const SymbolicPoint& p, int extent) {
  int lo = std::min(-p.hi(), -extent);
  int hi = std::max(-p.lo(), extent);
  std::vector<int> w(hi - lo + 1);
  for (int i = lo; i <= hi; ++i) w[i - lo] = p.at(-i);
  TailRule t;
  t.succ = p.tail().prev;
  t.prev = p.tail().succ;
  return SymbolicPoint(lo, std::move(w), p.fiber(), std::move(t));
}

FlowResult flow_with_crossings(const SuspensionSystem& sys, const SymbolicPoint& p,
                               double t) {
  double f = p.fiber() + t;
  long pos = 0;
  if (f >= 0.0) {
    while (true) {
      double r = sys.roof_at(p, pos);
      if (f < r) break;
      f -= r;
      ++pos;
    }
  } else {
    while (f < 0.0) {
      --pos;
      f += sys.roof_at(p, pos);
    }
  }
  if (pos == 0) return {p.with_fiber(f), 0};
  return {p.materialized(static_cast<int>(std::min<long>(0, pos)),
                         static_cast<int>(std::max<long>(0, pos)))
              .shifted(pos)
              .with_fiber(f),
          pos};
}

SymbolicPoint flow(const SuspensionSystem& sys, const SymbolicPoint& p, double t) {
  return flow_with_crossings(sys, p, t).point;
}

double birkhoff(const SuspensionSystem& sys, const SymbolicPoint& p, double t) {
  if (t < 0.0) return -birkhoff(sys, flow(sys, p, t), -t);
  double acc = 0.0;
  double remaining = t;
  long pos = 0;
  double seg = sys.roof_at(p, 0) - p.fiber();  // time left at position 0
  while (remaining > 0.0) {
    double dt = std::min(seg, remaining);
    acc += sys.potential_at(p, pos) * dt;
    remaining -= dt;
    if (remaining <= 0.0) break;
    ++pos;
    seg = sys.roof_at(p, pos);
  }
  return acc;
}

double roof_sum_forward(const SuspensionSystem& sys, const SymbolicPoint& p, long n) {
  double s = 0.0;
  for (long j = 0; j < n; ++j) s += sys.roof_at(p, j);
  return s;
}

double roof_sum_backward(const SuspensionSystem& sys, const SymbolicPoint& p, long n) {
  double s = 0.0;
  for (long j = 1; j <= n; ++j) s += sys.roof_at(p, -j);
  return s;
}

CylinderSet cylinder_ball(const SuspensionSystem& sys, const SymbolicPoint& p,
                          double t, BallSide side) {
  if (t < 0.0) throw std::invalid_argument("cylinder_ball: t must be >= 0");
  long n = 0;
  double s = 0.0;
  if (side == BallSide::forward) {
    while (s < t) {
      s += sys.roof_at(p, n);
      ++n;
    }
  } else {
    while (s < t) {
      ++n;
      s += sys.roof_at(p, -n);
    }
  }
  CylinderSet c;
  if (side == BallSide::forward) {
    c.lo = 0;
    c.hi = static_cast<int>(n) + sys.k_r();
  } else {
    c.lo = -(static_cast<int>(n) + sys.k_r());
    c.hi = 0;
  }
  c.word.resize(c.hi - c.lo + 1);
  for (int i = c.lo; i <= c.hi; ++i) c.word[i - c.lo] = p.at(i);
  return c;
}

}  // namespace cdyn
