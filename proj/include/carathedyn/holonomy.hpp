#pragma once

#include <vector>

#include "carathedyn/system.hpp"

namespace cdyn {

// Local product structure: bracket point, flow displacement beta putting the
// bracket on the strong-stable leaf of x, and the displacement of x onto the
// strong-stable leaf of the bracket.
struct BracketResult {
  SymbolicPoint point;
  double beta = 0.0;
  double t_displacement = 0.0;
};

struct CocycleValue {
  double value = 0.0;
  int truncation_depth = 0;
  bool exact = false;
};

// Smallest index i0 such that x and y carry the same symbols on [i0, +inf);
// throws if they disagree arbitrarily far out.
int futures_agree_from(const SymbolicPoint& x, const SymbolicPoint& y);
// Largest index j0 such that x and y agree on (-inf, j0].
int pasts_agree_to(const SymbolicPoint& x, const SymbolicPoint& y);

// Unique tau with f_tau(x) on the strong-stable leaf of y (futures agree).
double stable_sync_displacement(const SuspensionSystem& sys, const SymbolicPoint& x,
                                const SymbolicPoint& y);
// Unique tau with f_tau(x) on the strong-unstable leaf of y (pasts agree).
double unstable_sync_displacement(const SuspensionSystem& sys, const SymbolicPoint& x,
                                  const SymbolicPoint& y);

BracketResult bracket(const SuspensionSystem& sys, const SymbolicPoint& x,
                      const SymbolicPoint& y);

CocycleValue omega_plus(const SuspensionSystem& sys, double pressure,
                        const SymbolicPoint& x, const SymbolicPoint& y);
CocycleValue omega_minus(const SuspensionSystem& sys, double pressure,
                         const SymbolicPoint& x, const SymbolicPoint& y);

// Variants with the flow displacement supplied by the caller (the local
// product structure determines it; points on periodic tails would otherwise
// leave it defined only up to tail loops).
CocycleValue omega_plus_at(const SuspensionSystem& sys, double pressure,
                           const SymbolicPoint& x, const SymbolicPoint& y, double t);
CocycleValue omega_minus_at(const SuspensionSystem& sys, double pressure,
                            const SymbolicPoint& x, const SymbolicPoint& y, double t);

struct ConformalityReport {
  double lhs = 0.0;   // m^u_{f_t W}(f_t Z)
  double rhs = 0.0;   // integral of e^{tP - Phi} over Z
  double ratio = 1.0;
  double max_piece_deviation = 0.0;
  int pieces = 0;
};

// Checks the scaling law of the unstable leaf measure under the flow on a
// forward cylinder Z (word over [1, d]; empty = whole leaf). t >= 0.
ConformalityReport check_conformality(const SuspensionSystem& sys, double pressure,
                                      double t, const SymbolicPoint& leaf,
                                      const std::vector<int>& z_word, double cutoff,
                                      int depth_cap);

struct HolonomyReport {
  double max_deviation = 0.0;
  double lhs_total = 0.0;
  double rhs_total = 0.0;
  int pieces = 0;
};

// Weak-stable holonomy z -> [z, q2] between the unstable leaves of q1 and
// q2 (same coordinate-0 symbol), checked against the cocycle density on a
// family of forward cylinders.
HolonomyReport holonomy_rn_check(const SuspensionSystem& sys, double pressure,
                                 const SymbolicPoint& q1, const SymbolicPoint& q2,
                                 const std::vector<std::vector<int>>& z_words,
                                 double cutoff, int depth_cap);

}  // namespace cdyn
