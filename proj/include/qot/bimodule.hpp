// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "qot/algebra.hpp"

namespace qot {

// Unital *-homomorphism A -> B stored as a dense matrix on vectorized
// coordinates, with structural metadata when available.
class StarHom {
 public:
  StarHom() = default;
  static StarHom identity(AlgebraPtr alg);
  // Pullback hom C(X) -> C(E) along one coordinate of an edge set
  // E subset X x X: (phi F)(x,y) = F(x) for coordinate 0, F(y) for 1.
  static StarHom coordinate_embedding(AlgebraPtr functions, AlgebraPtr edges,
                                      const std::vector<std::pair<int, int>>& edge_list,
                                      int coordinate);
  // x -> x (+) x (+) ... into a direct-sum algebra (N copies of src).
  static StarHom diagonal_into_sum(AlgebraPtr src, AlgebraPtr sum, int copies);
  // Arbitrary matrix hom; invariants checked by BimoduleStructure::validate.
  static StarHom from_matrix(AlgebraPtr src, AlgebraPtr dst, CMat matrix,
                             std::string kind = "matrix");
  // Conjugation by a self-adjoint unitary u: x -> u x u (an involutive hom).
  static StarHom conjugation(AlgebraPtr alg, const Element& u);

  const AlgebraPtr& source() const { return src_; }
  const AlgebraPtr& target() const { return dst_; }
  const CMat& matrix() const { return m_; }
  const std::string& kind() const { return kind_; }

  Element apply(const Element& x) const;
  // Adjoint w.r.t. <.,.>_tau and <.,.>_omega as a matrix B -> A.
  CMat adjoint_matrix() const;
  Element apply_adjoint(const Element& u) const;

  void validate(Rng& rng, const Tolerances& tol, int samples = 8) const;

 private:
  AlgebraPtr src_, dst_;
  CMat m_;
  std::string kind_;
};

// Anti-linear map u -> G conj(vec u). Involutions used as the gamma datum of a
// bimodule; this canonical form is the anti-linear half of a real-linear map
// on realified coordinates.
class AntiLinearMap {
 public:
  AntiLinearMap() = default;
  static AntiLinearMap adjoint_map(AlgebraPtr alg);  // u -> u*
  // u -> sign * phi(u*) for an involutive hom phi on the target algebra.
  static AntiLinearMap signed_hom_star(const StarHom& phi, double sign);
  // u(x,y) -> sign * conj(u(y,x)) on an edge algebra (finite Markov chains).
  static AntiLinearMap signed_swap_conj(AlgebraPtr edges,
                                        const std::vector<std::pair<int, int>>& edge_list,
                                        double sign);
  static AntiLinearMap from_coeff(AlgebraPtr alg, CMat coeff, std::string kind = "custom");

  const AlgebraPtr& algebra() const { return alg_; }
  const CMat& coeff() const { return coeff_; }
  const std::string& kind() const { return kind_; }
  Element apply(const Element& u) const;

  // anti-linearity is structural; checks isometry and involutivity.
  void validate(Rng& rng, const Tolerances& tol, int samples = 8) const;

 private:
  AlgebraPtr alg_;
  CMat coeff_;
  std::string kind_;
};

// AF-A-bimodule structure (phi, psi, gamma) on a target algebra (B, omega).
struct BimoduleStructure {
  AlgebraPtr source;  // (A, tau)
  AlgebraPtr target;  // (B, omega)
  StarHom phi, psi;
  AntiLinearMap gamma;

  static BimoduleStructure canonical(AlgebraPtr alg);
  // phi-left, identity-right action with gamma = -phi(.*) so that twisted
  // gradients are gamma-symmetric.
  static BimoduleStructure twisted(AlgebraPtr alg, const StarHom& phi_invol);
  static BimoduleStructure direct_sum(const BimoduleStructure& bm, int copies);

  // Checks: phi/psi unital multiplicative *-maps on samples, gamma isometric
  // involution intertwining the actions.
  void validate(Rng& rng, const Tolerances& tol = default_tol(), int samples = 8) const;
};

// Dense linear map on vectorized target-algebra elements.
class Superoperator {
 public:
  Superoperator() = default;
  Superoperator(AlgebraPtr alg, CMat m) : alg_(std::move(alg)), m_(std::move(m)) {}
  static Superoperator identity(AlgebraPtr alg);

  const AlgebraPtr& algebra() const { return alg_; }
  const CMat& matrix() const { return m_; }

  Element apply(const Element& u) const;
  Superoperator compose(const Superoperator& o) const;  // this after o
  Superoperator operator+(const Superoperator& o) const;
  Superoperator operator-(const Superoperator& o) const;
  friend Superoperator operator*(double c, const Superoperator& s);

  // Spectral power of an omega-self-adjoint positive superoperator. Negative
  // exponents require eigenvalues > strict_tol * max.
  Superoperator power(double exponent, const Tolerances& tol = default_tol()) const;
  // Power with eigenvalues clamped from below at a known spectral floor
  // (used by the eps-regularized division, where min spec >= eps is exact).
  Superoperator power_floored(double exponent, double floor) const;
  // Smallest/largest eigenvalue w.r.t. <.,.>_omega (self-adjoint part).
  std::pair<double, double> eigen_range() const;
  double operator_norm() const;  // w.r.t. ||.||_omega

 private:
  AlgebraPtr alg_;
  CMat m_;
  CMat hermitianized() const;
};

// L_x(u) = phi(x) u and R_y(u) = u psi(y).
Superoperator left_action(const BimoduleStructure& bm, const Element& x);
Superoperator right_action(const BimoduleStructure& bm, const Element& y);

// (L_x (x) R_y)(g): with phi(x) = sum_i lambda_i P_i and psi(y) = sum_j kappa_j Q_j,
// u -> sum_{ij} g(lambda_i, kappa_j) P_i u Q_j. Near-degenerate eigenvalues are
// merged into one eigenprojection before applying g.
Superoperator joint_calculus(const BimoduleStructure& bm, const Element& x, const Element& y,
                             const std::function<double(double, double)>& g,
                             const Tolerances& tol = default_tol());

// Bimodule restriction to (pAp, phi(p) B psi(p)), kept in the ambient space.
struct CompressedBimodule {
  const BimoduleStructure* bm = nullptr;
  Element p;        // projection in A
  Element phi_p;    // phi(p)
  Element psi_p;    // psi(p)

  Element compress_source(const Element& x) const { return p * x * p; }
  Element compress_target(const Element& u) const { return phi_p * u * psi_p; }
  bool target_supported(const Element& u, double tol) const;
  // Restricted joint calculus (L_{x,C} (x) R_{y,C})(g) acting on the compressed
  // subspace; equals the ambient operator there (finite splitting).
  Superoperator joint_calculus_compressed(const Element& x, const Element& y,
                                          const std::function<double(double, double)>& g,
                                          const Tolerances& tol = default_tol()) const;
};

CompressedBimodule restrict_bimodule(const BimoduleStructure& bm, const Element& p,
                                     const Tolerances& tol = default_tol());

}  // namespace qot
