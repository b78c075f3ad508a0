// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace qot {

// Numerical tolerances shared across the library. All relative unless noted.
struct Tolerances {
  double self_adjoint = 1e-10;       // symmetrization threshold, relative to operator norm
  double rank = 1e-9;                // support/kernel detection, relative to largest eigenvalue
  double degeneracy = 1e-9;          // eigenvalue merging in joint functional calculus
  double strict_positivity = 1e-10;  // minimal eigenvalue / largest for invertibility
  double structure = 1e-8;           // *-homomorphism / derivation identity checks
  double mass = 1e-10;               // minimal admissible mass of a restricted state (absolute)
  double fixed_part_mismatch = 1e-8; // infeasibility threshold for transport endpoints
};

struct EpsSchedule {
  double eps0 = 1e-2;
  double ratio = 0.25;
  int max_steps = 20;
  double rel_convergence = 1e-8;
  double divergence_cap = 1e12;  // times ||w||^2
};

struct QuadratureOptions {
  int nodes = 200;       // Gauss-Legendre nodes on (0,1) after s = r/(1-r)
  int max_nodes = 1600;  // doubling limit
  double rel_tol = 1e-9;
  bool strict = true;    // error on non-convergence (false: accept the last level)
};

struct OptimizerOptions {
  int max_iter = 5000;
  double rel_decrease = 1e-9;    // convergence: relative energy decrease per step
  double grad_tol = 0.0;         // > 0: additionally require this gradient norm
  double floor0 = 1e-3;          // initial interior floor delta
  double floor_shrink = 0.5;     // annealing factor
  double barrier = 1e-6;         // min-eigenvalue threshold (relative to xi) triggering the floor
  double armijo = 1e-4;
  int richardson_levels = 0;     // extra refinements K -> 2K -> 4K
  int restarts = 1;              // independent seeds; all local minima reported
};

inline const Tolerances& default_tol() {
  static const Tolerances t{};
  return t;
}

}  // namespace qot
