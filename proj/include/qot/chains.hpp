// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/transport.hpp"

namespace qot {

struct ChainStage {
  AlgebraPtr algebra;
  BimoduleStructure bimodule;
  QuantumGradient gradient;
  HeatData heat;
  std::string label;
};

struct ChainLink {
  CMat iota_A;  // A_j -> A_{j+1} on vectorized coordinates
  CMat iota_B;  // B_j -> B_{j+1}
  std::string kind;
};

// Finite tower A_1 < ... < A_J with trace-compatible *-embeddings and exactly
// block-structural locality of the gradients.
class ChainDescriptor {
 public:
  static ChainDescriptor car_tower(int stages, std::vector<double> nu = {},
                                   const Tolerances& tol = default_tol());
  static ChainDescriptor corner_tower(int n0, int stages, std::vector<double> nu = {},
                                      const Tolerances& tol = default_tol());
  static ChainDescriptor from_stages(std::vector<ChainStage> stages, std::vector<ChainLink> links,
                                     const Tolerances& tol = default_tol());

  int num_stages() const { return static_cast<int>(stages_.size()); }
  const ChainStage& stage(int j) const { return stages_[j]; }

  // iota_{kj}: stage j -> stage k (j <= k), composed links; pi is its adjoint.
  CMat iota_matrix(int j, int k, bool target_side = false) const;
  Element include(int j, int k, const Element& x, bool target_side = false) const;
  Element project(int k, int j, const Element& x, bool target_side = false) const;

  // isometry of iota, pi o iota = id, gradient locality, unit compatibility.
  void validate(const Tolerances& tol = default_tol()) const;

 private:
  std::vector<ChainStage> stages_;
  std::vector<ChainLink> links_;
};

// Restriction of a state from stage k to stage j <= k: project and renormalize
// by the mass mu(iota(1_j)); errors when the mass falls below mass_tolerance.
Density restrict_state(const ChainDescriptor& chain, int k, int j, const Density& rho,
                       double* mass_out = nullptr, const Tolerances& tol = default_tol());

// Pathwise restriction (one normalization, taken at the first node) and
// inclusion (no normalization).
DiscretePath restrict_path(const ChainDescriptor& chain, int k, int j, const DiscretePath& path,
                           const Tolerances& tol = default_tol());
DiscretePath include_path(const ChainDescriptor& chain, int j, int k, const DiscretePath& path);

struct StageDistanceRow {
  int stage = 0;  // 1-based, matching the tower
  double mass0 = 1.0, mass1 = 1.0;
  double distance = 0.0;
  double gap = 0.0;
  bool infeasible = false;
  TransportStatus status = TransportStatus::converged;
  int K = 0;
};

struct ChainConvergenceReport {
  std::vector<StageDistanceRow> rows;
  bool nondecreasing_within_gaps = false;
};

// Per-stage transport distances between normalized restrictions of a top-stage
// endpoint pair; reports masses and whether the sequence is nondecreasing
// within the combined optimality gaps.
ChainConvergenceReport distance_convergence(const ChainDescriptor& chain, const Density& rho0,
                                            const Density& rho1, const RepresentingFunction& f,
                                            double theta, int K,
                                            const TransportOptions& topts = TransportOptions(),
                                            const Tolerances& tol = default_tol());

// || pi(h_t^k rho) - h_t^j(pi rho) ||_tau: exact commutation by locality.
double heat_restriction_deviation(const ChainDescriptor& chain, int k, int j, const Density& rho,
                                  double t);

}  // namespace qot
