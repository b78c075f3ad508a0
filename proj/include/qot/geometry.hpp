// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qot/gradient.hpp"
#include "qot/quasientropy.hpp"

namespace qot {

// Relative entropy tau(rho log rho), computed on the support.
double entropy(const Density& rho, double rank_tol = default_tol().rank);
double entropy_element(const Element& rho, double rank_tol = default_tol().rank);

// Fixed state xi (Delta-kernel member) with the orthogonal decomposition
// A_{xi,h} = I(Delta_xi) (+) <supp xi> (+) K(Delta_xi) of the self-adjoint
// part of the compressed algebra, tau-orthonormal bases throughout.
class FixedStateGeometry {
 public:
  FixedStateGeometry() = default;
  FixedStateGeometry(const QuantumGradient& g, const HeatData& hd, const Density& xi,
                     const Tolerances& tol = default_tol());

  const Density& xi() const { return xi_; }
  const Element& support() const { return supp_; }
  const QuantumGradient& gradient() const { return *g_; }
  const HeatData& heat() const { return *hd_; }
  const Tolerances& tol() const { return tol_; }

  int tangent_dim() const { return static_cast<int>(tangent_.size()); }
  int kernel_dim() const { return static_cast<int>(kernel_.size()); }
  const std::vector<Element>& tangent_basis() const { return tangent_; }
  const std::vector<Element>& kernel_basis() const { return kernel_; }

  RVec coords(const Element& x) const;        // tangent coordinates of proj_I(x)
  Element from_coords(const RVec& c) const;
  Element project_tangent(const Element& x) const;
  double tangent_residual(const Element& x) const;  // || x - proj_I x ||_tau

  // Delta restricted to I(Delta_xi) as a real symmetric matrix.
  const RMat& delta_tangent() const { return delta_I_; }

  // Whether mu lies in theta(xi): same fixed part, strictly positive on supp xi.
  bool in_theta(const Density& mu, double* min_eig = nullptr) const;
  // Largest t with xi + t y >= 0 on the face (boundary distance along a ray).
  double ray_to_boundary(const Element& y) const;

 private:
  Density xi_;
  Element supp_;
  const QuantumGradient* g_ = nullptr;
  const HeatData* hd_ = nullptr;
  Tolerances tol_;
  std::vector<Element> tangent_, kernel_;
  CMat tangent_vecs_;  // dim x m, columns vec(e_i)
  RMat delta_I_;
};

// S_mu = nabla* M_mu^theta nabla on I(Delta_xi), with factorization, plus the
// ingredients of Theta(mu, x) = M^theta nabla S^{-1} x.
class MetricOperator {
 public:
  MetricOperator() = default;
  MetricOperator(const FixedStateGeometry& geo, const Density& mu, const RepresentingFunction& f,
                 double theta);

  const RMat& S() const { return S_; }
  RVec solve(const RVec& x) const;   // S^{-1} x
  RVec apply(const RVec& x) const;   // S x
  double metric(const RVec& x, const RVec& y) const;  // g_mu(x,y) = <S^{-1}x, y>
  // Theta(mu, x): the optimal field with nabla* w = x.
  Element theta_field(const RVec& x_coords) const;
  const Superoperator& mult_theta() const { return mult_theta_; }
  const Density& mu() const { return mu_; }

 private:
  const FixedStateGeometry* geo_ = nullptr;
  Density mu_;
  Superoperator mult_theta_;
  RMat S_;
  Eigen::LDLT<RMat> ldlt_;
};

// Resolvent data for the log-mean Lambda integrals at a fixed mu in theta(xi).
// All integrands are evaluated in the eigenbases of phi(mu), psi(mu), where
// the resolvents act diagonally.
class LambdaContext {
 public:
  LambdaContext(const FixedStateGeometry& geo, const Density& mu,
                const QuadratureOptions& quad = QuadratureOptions());

  // Lambda_mu(x, u) in B; x in A_xi, u in B_xi.
  Element lambda(const Element& x, const Element& u) const;
  // Lambda*_mu(u, v) in A.
  Element lambda_star(const Element& u, const Element& v) const;

 private:
  const FixedStateGeometry* geo_;
  Density mu_;
  QuadratureOptions quad_;
  std::vector<CMat> basis_phi_, basis_psi_;  // per-block eigenvectors
  std::vector<RVec> evals_phi_, evals_psi_;
  // blockwise integral with each block integrand in mixed eigenbases
  std::vector<CMat> integrate_blocks(
      const std::function<void(double, std::vector<CMat>&)>& add_node) const;
};

// Hess_mu Ent(x) = -<(1/2) Lambda*(Theta x, Theta x), Delta mu> + g_mu(x, Delta x).
// Log-mean setting only.
double hessian_entropy(const FixedStateGeometry& geo, const MetricOperator& metric,
                       const Element& x, const QuadratureOptions& quad = QuadratureOptions());

// Matrix of the Hessian quadratic form on the tangent basis (by polarization).
RMat hessian_matrix(const FixedStateGeometry& geo, const MetricOperator& metric,
                    const QuadratureOptions& quad = QuadratureOptions());

struct HessianSample {
  double lambda_min = 0.0;
  RVec direction;  // tangent coords of the minimizing x
};

struct HessianBoundReport {
  double lambda_est = 0.0;
  int samples = 0;
  double worst_min_eig_mu = 0.0;  // min eigenvalue of the argmin state on its face
  RVec argmin_state_coords;
};

struct HessianBoundOptions {
  int n_samples = 64;
  int n_corner_rays = 8;
  std::vector<double> corner_fractions = {0.9, 0.99};
  double spread = 1.0;
  QuadratureOptions quad;
};

// Rayleigh minimization of Hess/g over sampled mu in theta(xi): an empirical
// certificate up to sampling, not a proof. Corner probes push toward the
// boundary of the face where minimizers may hide.
HessianBoundReport hessian_lower_bound(const FixedStateGeometry& geo,
                                       const HessianBoundOptions& opts, Rng& rng);

struct BeReport {
  double lambda = 0.0;
  double worst_margin = 0.0;  // min over samples of (rhs - lhs)/scale
  bool pass = false;
  int samples = 0;
  double tolerance = 0.0;
};

struct BeOptions {
  int n_states = 12;
  int n_test_elements = 6;
  std::vector<double> t_grid = {0.05, 0.1, 0.5, 1.0};
  double tolerance = 1e-8;
  double spread = 1.0;
};

// Gradient estimate ||M_mu^{1/2} nabla h_t u||^2 <= e^{-2 lambda t}
// ||M_{h_t mu}^{1/2} nabla u||^2 over sampled mu, u in A_{h(mu)}, t in grid.
BeReport bakry_emery_check(const QuantumGradient& g, const HeatData& hd, double lambda,
                           const BeOptions& opts, Rng& rng,
                           const Tolerances& tol = default_tol());

// Requires the logarithmic mean with theta = 1; other callers are rejected.
void require_log_mean(const RepresentingFunction& f, double theta);

}  // namespace qot
