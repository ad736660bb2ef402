#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "carathedyn/system.hpp"

namespace cdyn {

// Symbolic rectangle around a center q (fiber 0): the unstable plaque varies
// futures over q's past, the weak-stable plaque varies pasts over q's future
// with fiber offsets in (-delta, delta).
struct Rectangle {
  SymbolicPoint q;
  double delta;
};

// A set inside a rectangle: past word over [-dp, -1] (empty = free), future
// word over [1, df] (empty = free), fiber offsets within (-delta, delta).
// sym0 pins the coordinate-0 symbol; -1 inherits the rectangle center's.
struct RectSet {
  std::vector<int> past;
  std::vector<int> future;
  FiberInterval fiber;
  int sym0 = -1;
  std::string key() const;
};

struct MeasureEntry {
  double mass = 0.0;
  std::string provenance;
};
using MeasureTable = std::map<std::string, MeasureEntry>;

// Weak-stable plaque mass: integral over fiber offsets of the stable-leaf
// mass of the flowed slice. `leaf` holds the shared future, the word lives
// on coordinates [-d, -1].
double weak_leaf_measure(const SuspensionSystem& sys, double pressure,
                         const SymbolicPoint& leaf, const std::vector<int>& back_word,
                         FiberInterval fiber, double cutoff, int depth_cap);

// Evaluates the four product formulas for the rectangle measure.
class ProductEngine {
 public:
  ProductEngine(const SuspensionSystem& sys, double pressure, Rectangle rect,
                double cutoff, int depth_cap);

  double mu(const RectSet& z, int formula) const;  // formula in 1..4
  std::array<double, 4> mu_all(const RectSet& z) const;

  // Conditional density h(y) for y given by a past word and fiber offset,
  // computed both as the holonomy integral and as the plaque mass of the
  // unstable leaf through y.
  std::pair<double, double> conditional_density(const std::vector<int>& past,
                                                double tau) const;

  const Rectangle& rectangle() const { return rect_; }
  double pressure() const { return pressure_; }

  // m^u on the leaf f_tau(L) where L is the unstable leaf of `base` at
  // fiber 0; words live on coordinates [1, d] of the unflowed leaf.
  double unstable_slice(const SymbolicPoint& base,
                        const std::vector<std::vector<int>>& words, double tau) const;
  // m^s of the fiber-tau slice of backward cylinders on the stable leaf of
  // `base` (coordinates [-d, -1]).
  double stable_slice(const SymbolicPoint& base, const std::vector<int>& back_word,
                      double tau) const;

 private:
  struct Cell;
  std::vector<std::vector<int>> past_cells(const RectSet& z) const;
  std::vector<std::vector<int>> future_cells(const RectSet& z) const;
  SymbolicPoint make_z(const std::vector<int>& past, const std::vector<int>& fut) const;
  SymbolicPoint make_x(const std::vector<int>& fut) const;
  SymbolicPoint make_y(const std::vector<int>& past) const;

  const SuspensionSystem& sys_;
  SuspensionSystem rev_;
  double pressure_;
  Rectangle rect_;
  double cutoff_;
  int depth_cap_;
  int grid_depth_;  // stabilization depth for the cocycle densities
};

struct PatchOutcome {
  MeasureTable table;
  double max_overlap_deviation = 0.0;
  bool consistent = true;
};

// Assigns each set the value from a containing rectangle after checking
// overlap agreement.
PatchOutcome patch_global(const SuspensionSystem& sys, double pressure,
                          const std::vector<Rectangle>& rects,
                          const std::vector<RectSet>& sets, double cutoff,
                          int depth_cap, double tolerance = 1e-6);

// SRB product for geometric-potential systems (flow pressure 0): unstable
// leaf volume against the backward-cover transversal measure.
double srb_product(const SuspensionSystem& sys, const Rectangle& rect,
                   const RectSet& z, double cutoff, int depth_cap);

}  // namespace cdyn
