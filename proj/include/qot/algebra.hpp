// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qot/config.hpp"
#include "qot/error.hpp"
#include "qot/rng.hpp"

namespace qot {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Complex = std::complex<double>;

// Finite-dimensional tracial C*-algebra: a direct sum of full matrix blocks
// M_{n_l}(C) with trace tau(x) = sum_l C_l tr(x_l), C_l > 0.
class AlgebraDescriptor {
 public:
  static std::shared_ptr<const AlgebraDescriptor> make(std::vector<int> block_dims,
                                                       std::vector<double> trace_weights,
                                                       std::string label = "");

  const std::vector<int>& block_dims() const { return block_dims_; }
  const std::vector<double>& trace_weights() const { return trace_weights_; }
  const std::string& label() const { return label_; }
  int num_blocks() const { return static_cast<int>(block_dims_.size()); }
  int dim() const { return dim_; }  // sum of n_l^2
  int block_offset(int l) const { return offsets_[l]; }
  // Diagonal weight of <.,.>_tau on vectorized coordinates.
  const RVec& weight_vec() const { return weight_vec_; }
  double total_trace() const { return total_trace_; }  // tau(1)

  bool same_as(const AlgebraDescriptor& other) const;

 private:
  AlgebraDescriptor() = default;
  std::vector<int> block_dims_;
  std::vector<double> trace_weights_;
  std::string label_;
  std::vector<int> offsets_;
  int dim_ = 0;
  RVec weight_vec_;
  double total_trace_ = 0.0;
};

using AlgebraPtr = std::shared_ptr<const AlgebraDescriptor>;

// Block-diagonal element of an algebra. Value type; cross-block entries are
// structurally zero and never stored.
class Element {
 public:
  Element() = default;
  explicit Element(AlgebraPtr alg);  // zero element
  Element(AlgebraPtr alg, std::vector<CMat> blocks);

  static Element zero(AlgebraPtr alg) { return Element(alg); }
  static Element identity(AlgebraPtr alg);
  static Element from_vec(AlgebraPtr alg, const CVec& v);

  const AlgebraPtr& algebra() const { return alg_; }
  bool valid() const { return alg_ != nullptr; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const CMat& block(int l) const { return blocks_[l]; }
  CMat& block(int l) { return blocks_[l]; }

  // Row-major flattening, blocks concatenated.
  CVec vec() const;

  Element adjoint() const;
  Element operator+(const Element& o) const;
  Element operator-(const Element& o) const;
  Element operator-() const;
  Element operator*(const Element& o) const;  // blockwise matrix product
  Element& operator+=(const Element& o);
  Element& operator-=(const Element& o);
  friend Element operator*(Complex c, const Element& x);
  friend Element operator*(double c, const Element& x);

  double norm_tau() const;  // sqrt(<x,x>_tau)
  double norm_op() const;   // largest singular value across blocks
  bool is_self_adjoint(double rel_tol) const;
  Element symmetrized() const;  // (x + x*)/2

  // Eigenvalues of a self-adjoint element, blockwise, ascending within block.
  std::vector<RVec> eigenvalues(double rel_tol) const;
  RVec all_eigenvalues(double rel_tol) const;  // concatenated, unsorted across blocks
  double min_eigenvalue(double rel_tol) const;
  double max_eigenvalue(double rel_tol) const;

 private:
  AlgebraPtr alg_;
  std::vector<CMat> blocks_;
  void check_compatible(const Element& o) const;
};

Complex trace(const Element& x);
Complex inner(const Element& x, const Element& y);  // <x,y>_tau = tau(x* y)

// Spectral calculus g(x) for self-adjoint x, full eigenprojections per block.
Element func_calc(const Element& x, const std::function<double(double)>& g,
                  const Tolerances& tol = default_tol());

// Positive unit-trace element representing the state mu = rho^flat.
class Density {
 public:
  Density() = default;
  // Validates self-adjointness (symmetrizing), positivity and unit trace.
  static Density make(const Element& x, double tolerance = default_tol().self_adjoint);
  // Same checks except trace may be arbitrary positive (subnormalized states).
  static Density make_subnormalized(const Element& x,
                                    double tolerance = default_tol().self_adjoint);

  const Element& element() const { return elem_; }
  double tolerance() const { return tolerance_; }
  const AlgebraPtr& algebra() const { return elem_.algebra(); }
  bool valid() const { return elem_.valid(); }
  double mass() const;  // tau(rho)

 private:
  Element elem_;
  double tolerance_ = 0.0;
};

// Spectral projection of rho onto eigenvalues > rank_tol * max eigenvalue.
Element support_projection(const Density& rho, double rank_tol = default_tol().rank);
Element support_projection(const Element& x, double rank_tol = default_tol().rank);

bool is_projection(const Element& p, double tol = default_tol().self_adjoint);

// p x p, with p checked to be a projection.
Element compress(const Element& x, const Element& p, const Tolerances& tol = default_tol());

// Linear span of elements closed under product and adjoint, with its own unit.
class SubalgebraBasis {
 public:
  static SubalgebraBasis make(AlgebraPtr parent, std::vector<Element> basis, Element unit,
                              const Tolerances& tol = default_tol());
  // Convenience: orthonormalizes the span of generators, closes under products
  // and adjoints, finds the unit by solving within the span.
  const AlgebraPtr& parent() const { return parent_; }
  const std::vector<Element>& basis() const { return basis_; }
  const Element& unit() const { return unit_; }

 private:
  AlgebraPtr parent_;
  std::vector<Element> basis_;
  Element unit_;
};

// Orthogonal projection onto span(C) w.r.t. <.,.>_tau via the Gram matrix.
Element project_subalgebra(const Element& x, const SubalgebraBasis& C);

// Mass difference kappa_C(x, tau) of the non-unital conditional expectation
// decomposition; zero when 1_C = 1_A.
Complex mass_difference(const Element& x, const SubalgebraBasis& C,
                        const Tolerances& tol = default_tol());

// --- sampling helpers -------------------------------------------------------

Element random_element(AlgebraPtr alg, Rng& rng, double scale = 1.0);
Element random_self_adjoint(AlgebraPtr alg, Rng& rng, double scale = 1.0);
// Strictly positive density: normalized exp(-H) for random self-adjoint H.
Density random_density(AlgebraPtr alg, Rng& rng, double spread = 1.0);
// Density supported in the face of projection p (strictly positive there).
Density random_density_in_face(AlgebraPtr alg, const Element& p, Rng& rng, double spread = 1.0);

}  // namespace qot
