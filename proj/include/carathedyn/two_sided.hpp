#pragma once

#include <optional>
#include <vector>

#include "carathedyn/system.hpp"

namespace cdyn {

// Two-sided Bowen-ball stand-in: a two-sided cylinder with recorded orders
// and the flow-direction constraint |beta| < r_unit/(s+t).
struct TwoSidedBall {
  SymbolicPoint center;
  double s = 0.0, t = 0.0;
  CylinderSet word;  // coordinates [-(m+k_r), n+k_r]
  double beta_halfwidth = 0.0;
};

TwoSidedBall bstar(const SuspensionSystem& sys, const SymbolicPoint& x, double s,
                   double t);
bool bstar_contains(const SuspensionSystem& sys, const TwoSidedBall& ball,
                    const SymbolicPoint& z);

// Product piece: two-sided cylinder times a fiber interval (absolute, inside
// [0, roof)); no interval means the full fiber over each base point.
struct TwoSidedPiece {
  int lo = 1, hi = 0;  // empty constraint if lo > hi; otherwise lo <= 0 <= hi
  std::vector<int> word;
  std::optional<FiberInterval> fiber;
};

struct TwoSidedElement {
  int lo = 0;
  std::vector<int> word;
  double s = 0.0, t = 0.0;
  long fiber_tiles = 0;
};

struct TwoSidedResult {
  double value = 0.0;
  double cutoff_T = 0.0;
  int depth_cap = 0;
  double cover_size = 0.0;
  std::vector<TwoSidedElement> cover;
};

struct TwoSidedOptions {
  bool symmetric_forced = false;  // refine both sides in lockstep
  bool record_cover = false;
};

// Restricted-class infimum over two-sided antichains with the 1/(s+t)
// fiber-tiled weights.
TwoSidedResult m_value(const SuspensionSystem& sys, double pressure,
                       const std::vector<TwoSidedPiece>& target, double cutoff_T,
                       int depth_cap, TwoSidedOptions opts = {});

// Image of a product piece under f_tau, split into product pieces.
std::vector<TwoSidedPiece> flow_pieces(const SuspensionSystem& sys,
                                       const TwoSidedPiece& piece, double tau);

struct FlowInvarianceReport {
  double value = 0.0;
  double flowed_value = 0.0;
  double ratio = 1.0;
};

FlowInvarianceReport flow_invariance_check(const SuspensionSystem& sys, double pressure,
                                           const std::vector<TwoSidedPiece>& target,
                                           double tau, double cutoff_T, int depth_cap,
                                           TwoSidedOptions opts = {});

struct GibbsStarSample {
  SymbolicPoint x;
  double s = 0.0, t = 0.0;
};

// Empirical constant for the two-sided Gibbs bound: max over samples of
// max(rho, 1/rho) with rho = m(B*) (s+t) e^{(s+t)P - Phi(f_{-s}x, s+t)}.
// Orders snap to completed roof sums.
double gibbs_star_check(const SuspensionSystem& sys, double pressure,
                        std::span<const GibbsStarSample> samples, double cutoff_T,
                        int depth_cap);

struct SrbMainReport {
  std::vector<double> ratios;  // per family set, m / oracle
  double whole_space_ratio = 0.0;
  double spread = 0.0;  // max/min - 1 including the whole space
};

// Theorem-level check for geometric-potential systems: m with zero pressure
// and inverse-determinant weights is proportional to the oracle SRB measure.
SrbMainReport srb_main_check(const SuspensionSystem& sys,
                             const std::vector<TwoSidedPiece>& family, double cutoff_T,
                             int depth_cap);

}  // namespace cdyn
