// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "qot/bimodule.hpp"

namespace qot {

struct Provenance {
  enum class Kind { commutator, twisted, direct_sum, markov, custom };
  Kind kind = Kind::custom;
  Element generator;                    // D for commutator/twisted
  std::vector<int> child_offsets;       // vec offsets of the summands in B (direct_sum)
  std::vector<int> child_dims;
  std::vector<Provenance> children;     // nested provenance of the summands
  RMat kernel_matrix;                   // K (markov)
  RVec steady_state;                    // pi (markov)
  std::string describe() const;
};

// Symmetric module derivation nabla: A -> B with adjoint w.r.t. the weighted
// inner products, stored densely on vectorized coordinates.
class QuantumGradient {
 public:
  QuantumGradient() = default;

  // nabla x = i[D, x] on the canonical bimodule; nabla* = -nabla.
  static QuantumGradient from_commutator(const BimoduleStructure& bm, const Element& D,
                                         const Tolerances& tol = default_tol());
  // nabla x = i(D x - phi(x) D) for an involutive self-adjoint hom phi with
  // phi(D) = -D; nabla* x = -i(D x + phi(x) D).
  static QuantumGradient from_twisted(const BimoduleStructure& bm, const Element& D,
                                      const Tolerances& tol = default_tol());
  // Direct sum over a shared source; target is the N-fold direct-sum bimodule.
  static QuantumGradient direct_sum(const std::vector<QuantumGradient>& children,
                                    const Tolerances& tol = default_tol());
  static QuantumGradient custom(BimoduleStructure bm, CMat nabla, Provenance prov,
                                const Tolerances& tol = default_tol());

  const BimoduleStructure& bimodule() const { return bm_; }
  const AlgebraPtr& source() const { return bm_.source; }
  const AlgebraPtr& target() const { return bm_.target; }
  const CMat& nabla() const { return nabla_; }
  const CMat& nabla_star() const { return nabla_star_; }
  const Provenance& provenance() const { return prov_; }

  Element apply(const Element& x) const;       // nabla x
  Element apply_star(const Element& u) const;  // nabla* u

  // Leibniz rule, gamma-symmetry, adjoint correctness, units in kernel.
  void validate(Rng& rng, const Tolerances& tol = default_tol(), int samples = 8) const;

 private:
  BimoduleStructure bm_;
  CMat nabla_, nabla_star_;
  Provenance prov_;
};

// Markov-chain discrete gradient together with the algebras it lives on.
struct MarkovModel {
  AlgebraPtr functions;  // C(X), weights pi(x)
  AlgebraPtr edges;      // C(E), weights K(x,y) pi(x) on E = supp K
  std::vector<std::pair<int, int>> edge_list;
  BimoduleStructure bm;
  QuantumGradient gradient;
};

// Requires K irreducible row-stochastic with stationary pi > 0 satisfying
// detailed balance (the symmetric involution needs reversibility).
MarkovModel from_markov(const RMat& K, const RVec& pi, const Tolerances& tol = default_tol());

// Laplacian Delta = nabla* nabla with its eigendecomposition cache. The
// kernel tolerance is shared with the support-projection rank tolerance.
class HeatData {
 public:
  HeatData() = default;
  explicit HeatData(const QuantumGradient& g, const Tolerances& tol = default_tol());

  const AlgebraPtr& algebra() const { return alg_; }
  const CMat& delta() const { return delta_; }
  const RVec& eigenvalues() const { return evals_; }
  double kernel_cut() const { return kernel_cut_; }

  Element apply_delta(const Element& x) const;
  Element heat_apply(double t, const Element& x) const;  // e^{-t Delta} x
  Element kernel_project(const Element& x) const;        // t -> infinity limit

  Density fixed_part(const Density& rho) const;   // h(rho), a density
  Element image_part(const Density& rho) const;   // rho - h(rho)

  // Reciprocal of the smallest nonzero eigenvalue; nullopt when Delta = 0.
  std::optional<double> spectral_gap() const;

 private:
  AlgebraPtr alg_;
  CMat delta_;
  CMat evecs_, evecs_inv_;
  RVec evals_;
  double kernel_cut_ = 0.0;
};

// Spectral gap of a state on its support: 1 / min nonzero eigenvalue.
std::optional<double> spectral_gap(const Density& xi, double rank_tol = default_tol().rank);

struct CommutationFit {
  double lambda = 0.0;
  double residual = 0.0;
  bool certified = false;  // residual below tolerance: hypothesis holds
};

// Least-squares lambda minimizing ||nabla_n Delta - (Delta + lambda) nabla_n||_F
// for the n-th direct summand (or the whole gradient when it has no summands).
CommutationFit commutation_lambda(const QuantumGradient& g, int component = 0,
                                  const Tolerances& tol = default_tol());

}  // namespace qot
