// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/examples.hpp"
#include "qot/transport.hpp"

namespace qot {

// Central-difference residuals of d/dt S^{-1}(mu') = -(1/2) Lambda*(Theta mu',
// Theta mu') at interior nodes (indices 2..K-2). Log-mean setting.
std::vector<double> euler_lagrange_residual(const FixedStateGeometry& geo,
                                            const DiscretePath& path,
                                            const QuadratureOptions& quad = QuadratureOptions());

struct EviReport {
  double lambda = 0.0;
  double worst_margin = 0.0;  // min over checks of (rhs - lhs + folded tolerance)
  bool pass = false;
  int checks = 0;
  int infeasible_pairs = 0;
};

// Integral-form evolution variational inequality along the heat flow, with
// transport optimality gaps folded into the tolerance.
EviReport evi_check(const QuantumGradient& g, const HeatData& hd, double lambda,
                    const std::vector<std::pair<Density, Density>>& pairs,
                    const std::vector<double>& t_grid, int K,
                    const TransportOptions& topts = TransportOptions(),
                    const Tolerances& tol = default_tol());

struct ConvexityReport {
  double lambda = 0.0;
  double worst_margin = 0.0;
  bool pass = false;
  int checks = 0;
  int infeasible_pairs = 0;
};

// Ent(mu_t) <= (1-t) Ent0 + t Ent1 - (lambda/2) t (1-t) W^2 along computed
// minimizers, checked at grid nodes.
ConvexityReport geodesic_convexity_check(const QuantumGradient& g, const HeatData& hd,
                                         double lambda,
                                         const std::vector<std::pair<Density, Density>>& pairs,
                                         int K, const TransportOptions& topts = TransportOptions(),
                                         const Tolerances& tol = default_tol(),
                                         double slack = 5e-4);

struct CertifyOptions {
  int n_fixed_states = 3;      // sampled kernel densities used as xi
  HessianBoundOptions hessian;
  BeOptions be;
  int n_pairs = 3;             // same-component pairs for EVI/convexity
  std::vector<double> evi_t_grid = {0.0, 0.25, 0.75};
  int K = 16;
  TransportOptions transport;
  double frontier_delta = 0.5;  // checks re-run at lambda + delta must fail
  double convexity_slack = 5e-4;
  double pair_spread = 0.6;     // how far pair endpoints sit toward the boundary
};

struct CertificationReport {
  std::string example;
  bool auto_lambda = false;
  double lambda_tested = 0.0;
  double hessian_lambda_est = 0.0;
  int hessian_samples = 0;
  BeReport be;
  EviReport evi;
  ConvexityReport convexity;
  BeReport be_above;           // at lambda + frontier_delta
  bool frontier_located = false;  // all pass at lambda, BE fails above
  bool consistent = false;        // the four checks agree on the frontier side
  bool verdict = false;           // all four checks pass at lambda_tested
};

// Full certification pipeline; lambda = nullopt bisects via the Hessian bound.
CertificationReport certify_example(const BuiltExample& ex, std::optional<double> lambda,
                                    const CertifyOptions& opts, Rng& rng,
                                    const Tolerances& tol = default_tol());

// Same-component pair sampling: both endpoints share the fixed part of `base`.
std::vector<std::pair<Density, Density>> sample_component_pairs(const FixedStateGeometry& geo,
                                                                int n_pairs, double spread,
                                                                Rng& rng);

}  // namespace qot
