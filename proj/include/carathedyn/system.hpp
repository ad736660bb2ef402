#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cdyn {

// Symbols are 0-based integers; text form uses 'a', 'b', 'c', ...

class Sft {
 public:
  Sft(int alphabet_size, std::vector<uint8_t> transitions);

  int alphabet() const { return n_; }
  bool allowed(int from, int to) const { return transitions_[from * n_ + to] != 0; }
  const std::vector<uint8_t>& transitions() const { return transitions_; }

  // Least allowed successor / predecessor of a symbol.
  int min_successor(int s) const;
  int min_predecessor(int s) const;

 private:
  void validate() const;  // irreducible + aperiodic, no dead symbols

  int n_;
  std::vector<uint8_t> transitions_;
};

// Real-valued function of finitely many coordinates [window_lo, window_hi].
// The value table covers all words of the window length in lexicographic
// order (first symbol most significant); entries for inadmissible words are
// carried but never read.
class LocallyConstantFunction {
 public:
  LocallyConstantFunction() = default;
  LocallyConstantFunction(int alphabet, int window_lo, int window_hi,
                          std::vector<double> values);

  static LocallyConstantFunction constant(int alphabet, double c);
  static LocallyConstantFunction per_symbol(int alphabet, std::vector<double> values);

  int alphabet() const { return alphabet_; }
  int window_lo() const { return lo_; }
  int window_hi() const { return hi_; }
  int span() const { return hi_ - lo_ + 1; }

  double value_word(std::span<const int> word) const;
  double min_value() const;
  double max_value() const;
  const std::vector<double>& values() const { return table_; }

 private:
  int alphabet_ = 0;
  int lo_ = 0, hi_ = 0;
  std::vector<double> table_;
};

// Deterministic per-symbol continuation maps used to extend a finite window
// to a full two-sided sequence. Iterating succ (resp. prev) from any symbol
// enters an admissible cycle, so the extension is eventually periodic.
struct TailRule {
  std::vector<int> succ;
  std::vector<int> prev;
};

class SymbolicPoint {
 public:
  SymbolicPoint(int lo, std::vector<int> window, double fiber, TailRule tail);

  int lo() const { return lo_; }
  int hi() const { return lo_ + static_cast<int>(window_.size()) - 1; }
  double fiber() const { return fiber_; }
  const TailRule& tail() const { return tail_; }

  // Symbol at coordinate i, extending through the tail rule as needed.
  int at(long i) const;

  SymbolicPoint with_fiber(double f) const;
  // Left shift by n: new point q with q_i = p_{i+n}; the stored window's
  // index range translates by -n.
  SymbolicPoint shifted(long n) const;
  // Copy whose explicit window covers at least [lo, hi].
  SymbolicPoint materialized(int lo, int hi) const;

  std::string str() const;  // "...ab.ba..." with '.' before coordinate 0

 private:
  int lo_;
  std::vector<int> window_;
  double fiber_;
  TailRule tail_;
};

struct FiberInterval {
  double lo = 0.0;
  double hi = 0.0;  // half-open [lo, hi)
  double length() const { return hi > lo ? hi - lo : 0.0; }
  bool empty() const { return hi <= lo; }
};

// Symbolic cylinder, optionally crossed with a fiber interval. An empty
// coordinate range (lo > hi) leaves the base unconstrained.
struct CylinderSet {
  int lo = 1, hi = 0;
  std::vector<int> word;
  std::optional<FiberInterval> fiber;

  bool base_unconstrained() const { return lo > hi; }
  int depth() const { return base_unconstrained() ? 0 : hi - lo + 1; }
  int symbol_at(int i) const { return word[i - lo]; }
  std::string key() const;
};

class SuspensionSystem {
 public:
  SuspensionSystem(Sft sft, LocallyConstantFunction roof,
                   LocallyConstantFunction potential, int k_r,
                   std::optional<double> r_unit = std::nullopt);

  const Sft& sft() const { return sft_; }
  const LocallyConstantFunction& roof() const { return roof_; }
  const LocallyConstantFunction& potential() const { return potential_; }
  int k_r() const { return k_r_; }
  double r_unit() const { return r_unit_; }
  double min_roof() const { return min_roof_; }
  double max_roof() const { return max_roof_; }
  const TailRule& tail() const { return tail_; }

  double roof_at(const SymbolicPoint& p, long pos) const;
  double potential_at(const SymbolicPoint& p, long pos) const;

  // Point with the given window placed at [lo, lo+size-1], default tails.
  SymbolicPoint make_point(int lo, std::vector<int> window, double fiber) const;
  // Fixed point of the cycle repeated over all coordinates.
  SymbolicPoint periodic_point(std::span<const int> cycle, double fiber) const;
  // Parses "aab.ba" (dot precedes coordinate 0); empty side filled by tails.
  SymbolicPoint parse_point(const std::string& text, double fiber) const;

  // Time-reversed system: transposed transitions, windows reflected under
  // the index map i -> -i.
  SuspensionSystem reversed() const;

 private:
  Sft sft_;
  LocallyConstantFunction roof_, potential_;
  int k_r_;
  double r_unit_;
  double min_roof_, max_roof_;
  TailRule tail_;
};

// Suspension-flow primitives. All pure.
SymbolicPoint shift(const SymbolicPoint& p, long n);
// Image of p under the index reflection i -> -i, with tails swapped;
// exact on every coordinate. `extent` sizes the materialized window.
SymbolicPoint reflect_point(const SymbolicPoint& p, int extent);
SymbolicPoint flow(const SuspensionSystem& sys, const SymbolicPoint& p, double t);
struct FlowResult {
  SymbolicPoint point;
  long crossings;  // signed base-shift count
};
FlowResult flow_with_crossings(const SuspensionSystem& sys, const SymbolicPoint& p,
                               double t);
double birkhoff(const SuspensionSystem& sys, const SymbolicPoint& p, double t);

enum class BallSide { forward, backward };
CylinderSet cylinder_ball(const SuspensionSystem& sys, const SymbolicPoint& p,
                          double t, BallSide side);

// Forward roof sum S_n = sum_{j=0}^{n-1} roof(position j).
double roof_sum_forward(const SuspensionSystem& sys, const SymbolicPoint& p, long n);
// Backward roof sum over positions -1..-n.
double roof_sum_backward(const SuspensionSystem& sys, const SymbolicPoint& p, long n);

std::string symbol_name(int s);

}  // namespace cdyn
