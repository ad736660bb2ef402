#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "carathedyn/system.hpp"

namespace cdyn {

// One Bowen-ball stand-in in a cover: a cylinder of the leaf tree together
// with its order t and Birkhoff weight. xi * eta^alpha = e^{Phi - t*alpha}.
struct CoverElement {
  int lo = 1;
  std::vector<int> word;
  double order = 0.0;
  double log_phi = 0.0;  // Phi at the achieved order

  double xi() const;
  double eta() const;
  double psi() const;
  double weight_at(double alpha) const;
};

struct CoverDpResult {
  double value = 0.0;
  double cutoff_T = 0.0;
  int depth_cap = 0;
  double cover_size = 0.0;  // element count of the optimal antichain
  std::vector<CoverElement> optimal_cover;  // materialized when small enough
};

// Values above this are reported as +infinity for bracketing purposes.
inline constexpr double kValueInfinity = 1e12;

// A constrained coordinate block on a leaf: symbols word[0..] sit at
// coordinates start, start+1, ...; coordinates before `start` are free.
struct LeafTarget {
  int start = 1;
  std::vector<int> word;
  int end() const { return start + static_cast<int>(word.size()) - 1; }
};

// Minimum-weight antichain cover of a cylinder tree rooted on one leaf.
//
// The leaf is described by a base point: coordinates <= 0 and the fiber
// offset come from `leaf`; coordinates >= 1 index the tree. Targets are
// coordinate blocks (an empty list means the whole leaf). Node weights are
// exp(sum of (potential - alpha) * roof over crossed positions), with the
// order measured from the leaf's fiber.
//
// `position_offset` 0 sums positions 0..n-1 (unstable side); 1 sums
// positions 1..n (time-reversed stable side after reflection).
class LeafCoverEngine {
 public:
  LeafCoverEngine(const SuspensionSystem& sys, SymbolicPoint leaf, double alpha,
                  double cutoff, int depth_cap, int position_offset = 0);

  CoverDpResult value(const std::vector<std::vector<int>>& target_words,
                      bool record_cover = false);
  CoverDpResult value_blocks(const std::vector<LeafTarget>& targets,
                             bool record_cover = false);
  CoverDpResult whole_leaf(bool record_cover = false) { return value({}, record_cover); }

  double alpha() const { return alpha_; }
  double cutoff() const { return cutoff_; }

 private:
  struct NodeOut {
    double value;
    double count;
  };
  struct Key {
    int depth;
    int state;
    uint64_t residual_bits;
    uint64_t mask;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      uint64_t h = static_cast<uint64_t>(k.depth) * 1000003u ^
                   static_cast<uint64_t>(k.state) * 0x9e3779b97f4a7c15ull ^
                   k.residual_bits;
      h ^= k.mask + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h ^= h >> 33;
      h *= 0xff51afd7ed558ccdull;
      h ^= h >> 33;
      return static_cast<size_t>(h);
    }
  };

  int coord(const std::vector<int>& word, int i) const;
  double added_roof(const std::vector<int>& word, int child_depth) const;
  double added_g(const std::vector<int>& word, int child_depth) const;
  double anchor_scalar(const std::vector<int>& word) const;
  int state_code(const std::vector<int>& word, int depth) const;

  NodeOut rec(int depth, std::vector<int>& word, double logw, double roofsum,
              std::vector<CoverElement>* out);

  const SuspensionSystem& sys_;
  SymbolicPoint leaf_;
  double alpha_, cutoff_;
  int depth_cap_;
  int pos_off_;
  double fiber_off_;  // signed: -u on unstable leaves, +u on reflected stable
  int k_r_;
  int state_len_;
  int memo_min_depth_;
  double cutoff_eff_;
  std::vector<LeafTarget> targets_;
  std::unordered_map<Key, NodeOut, KeyHash> memo_;          // fully inside
  std::unordered_map<Key, NodeOut, KeyHash> memo_partial_;  // target-specific
  std::vector<int> pow_;
};

CoverDpResult cover_value(const SuspensionSystem& sys, const SymbolicPoint& leaf,
                          const std::vector<std::vector<int>>& target_words,
                          double alpha, double cutoff_T, int depth_cap,
                          bool record_cover = false);

struct ExtrapolationResult {
  double value = 0.0;
  double raw_tail = 0.0;
  double accelerated = 0.0;
  bool oscillation_flagged = false;
};

ExtrapolationResult extrapolate_limit(const std::vector<std::pair<double, double>>& values);

struct CriticalValueEstimate {
  double alpha_star = 0.0;
  std::vector<std::pair<double, double>> per_cutoff;  // (T, crossing alpha)
  double tolerance = 0.0;
};

// Pressure as the critical exponent: for each cutoff T the crossing of the
// whole-leaf cover value through 1 is bisected in alpha (maximized over the
// canonical leaves, one per boundary symbol), then the T->infinity limit is
// accelerated.
CriticalValueEstimate critical_value(const SuspensionSystem& sys,
                                     const std::vector<double>& T_schedule,
                                     int depth_cap, double alpha_tol = 1e-9);

struct LeafMeasureEntry {
  double value = 0.0;
  std::vector<std::pair<double, double>> per_cutoff;
  bool unstable = false;
};

// m^u of a forward cylinder (word over coordinates [1, d]) on the unstable
// leaf of `leaf`; empty word means the whole local leaf.
LeafMeasureEntry leaf_measure_u(const SuspensionSystem& sys, double pressure,
                                const SymbolicPoint& leaf,
                                const std::vector<int>& target_word,
                                const std::vector<double>& cutoffs, int depth_cap);

// m^s of a backward cylinder (word over coordinates [-d, -1]) on the stable
// leaf of `leaf`. Computed on the time-reversed system.
LeafMeasureEntry leaf_measure_s(const SuspensionSystem& sys, double pressure,
                                const SymbolicPoint& leaf,
                                const std::vector<int>& target_word,
                                const std::vector<double>& cutoffs, int depth_cap);

// Convenience: single-cutoff m^u value of a union of forward cylinders on
// the unstable leaf of `leaf` (whose fiber sets the order offset).
double leaf_value_u(const SuspensionSystem& sys, double pressure,
                    const SymbolicPoint& leaf,
                    const std::vector<std::vector<int>>& targets, double cutoff,
                    int depth_cap);
// Mirror for m^s; backward words live on coordinates [-d, -1].
double leaf_value_s(const SuspensionSystem& sys, double pressure,
                    const SymbolicPoint& leaf,
                    const std::vector<std::vector<int>>& backward_words, double cutoff,
                    int depth_cap);

}  // namespace cdyn
