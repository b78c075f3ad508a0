// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/geometry.hpp"

namespace qot {

// Time grid with per-node densities and per-edge fields (edge midpoints).
struct DiscretePath {
  std::vector<double> grid;     // t_0 < ... < t_K
  std::vector<Density> states;  // K+1
  std::vector<Element> fields;  // K, elements of B
  const QuantumGradient* gradient = nullptr;

  int edges() const { return static_cast<int>(fields.size()); }
  double h(int k) const { return grid[k + 1] - grid[k]; }
  Element midpoint(int k) const {
    return 0.5 * (states[k].element() + states[k + 1].element());
  }

  struct Report {
    double max_continuity_residual = 0.0;
    double max_mass_deviation = 0.0;
    double max_fixed_part_deviation = 0.0;
    bool ok = false;
  };
  // Continuity residual per edge, mass preservation, fixed-part preservation.
  Report validate(const HeatData& hd, double tolerance = 1e-6) const;
};

// Midpoint-rule energy (1/2) sum_k h_k I(sigma_k, sigma_k, w_k); infinity
// propagates from quasi-entropy divergence.
double path_energy(const DiscretePath& path, const RepresentingFunction& f, double theta,
                   const EpsSchedule& schedule = EpsSchedule(),
                   const Tolerances& tol = default_tol());
double path_length(const DiscretePath& path, const RepresentingFunction& f, double theta,
                   const EpsSchedule& schedule = EpsSchedule(),
                   const Tolerances& tol = default_tol());
// Per-edge speeds sqrt(I_k).
std::vector<double> path_speeds(const DiscretePath& path, const RepresentingFunction& f,
                                double theta, const EpsSchedule& schedule = EpsSchedule(),
                                const Tolerances& tol = default_tol());

// w = M^theta nabla S^{-1} x: among all fields v with nabla* v = x, the unique
// minimizer of I(mu, mu, v). x must lie in im(Delta_xi).
Element optimal_field(const FixedStateGeometry& geo, const Density& mu, const Element& x,
                      const RepresentingFunction& f, double theta);

enum class TransportStatus { converged, max_iter, infeasible };

struct TransportResult {
  double distance = 0.0;
  bool infinite = false;
  TransportStatus status = TransportStatus::converged;
  DiscretePath path;                         // minimizer candidate at the finest grid
  double gap = 0.0;                          // reported optimality gap
  std::vector<std::pair<int, double>> per_grid;  // raw (K, W_K) values
  std::vector<double> energy_history;
  std::vector<double> restart_energies;
  int iterations = 0;

  double value_or_inf() const {
    return infinite ? std::numeric_limits<double>::infinity() : distance;
  }
};

struct TransportOptions {
  OptimizerOptions optimizer;
  EpsSchedule schedule;
  std::uint64_t seed = 0;
  // gradient quadrature used inside the descent loop (loose, non-strict)
  int inner_quad_nodes = 96;
};

// W(rho0, rho1) = inf sqrt(2 E) over endpoint-pinned discrete paths; interior
// grid states are the decision variables, fields recovered via optimal_field.
TransportResult transport_distance(const QuantumGradient& g, const HeatData& hd,
                                   const RepresentingFunction& f, double theta,
                                   const Density& rho0, const Density& rho1, int K,
                                   const TransportOptions& opts = TransportOptions(),
                                   const Tolerances& tol = default_tol());

// Arc-length resampling onto a uniform grid; fields recovered via optimal_field.
DiscretePath reparametrize_constant_speed(const DiscretePath& path,
                                          const RepresentingFunction& f, double theta,
                                          const HeatData& hd,
                                          const Tolerances& tol = default_tol());

}  // namespace qot
