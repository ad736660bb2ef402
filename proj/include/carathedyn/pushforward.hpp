#pragma once

#include "carathedyn/two_sided.hpp"

namespace cdyn {

// Averaged pushforward of the unstable leaf measure of `plaque` evaluated on
// a product set: (1/t) integral over s in [0, t] of m^u(f_{-s} Z traced on
// the leaf). The integrand is piecewise constant between detected
// breakpoints; `quadrature_step` controls how densely each constant segment
// is cross-checked.
double nu_t(const SuspensionSystem& sys, double pressure, const SymbolicPoint& plaque,
            double t, const TwoSidedPiece& z, double cutoff, int depth_cap,
            double quadrature_step = 0.0);

// Total-variation distance between the normalized nu_t and the normalized
// oracle flow measure on the algebra of two-sided words over [-depth, depth]
// crossed with fiber halves.
double tv_to_oracle(const SuspensionSystem& sys, double pressure,
                    const SymbolicPoint& plaque, double t, int depth, double cutoff,
                    int depth_cap, double quadrature_step = 0.0);

}  // namespace cdyn
