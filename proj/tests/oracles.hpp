#pragma once

// Frozen reference values. Each one is recomputed by an independent oracle
// in the unit tests; the acceptance run only reads them.
namespace oracle {

// f = 1 + 0.1 x1 on the flat unit disk with the m = 2 constant: deficit - 1,
// from nested Gauss-Kronrod quadrature of both sides.
inline constexpr double linear_density_margin = 0.0486899558217369;

// Catenoid a = 1, h = 1: |dS| / (2 sqrt(pi) sqrt|S|) from 1-D quadrature of
// area and boundary.
inline constexpr double catenoid_isoperimetric_ratio = 1.3010247130186;

}  // namespace oracle
