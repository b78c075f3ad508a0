// SPDX-License-Identifier: Apache-2.0
#include "qot/algebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qot {

std::shared_ptr<const AlgebraDescriptor> AlgebraDescriptor::make(std::vector<int> block_dims,
                                                                 std::vector<double> trace_weights,
                                                                 std::string label) {
  require(!block_dims.empty(), ErrorCode::config, "algebra needs at least one block");
  require(block_dims.size() == trace_weights.size(), ErrorCode::config,
          "block_dims and trace_weights must have equal length");
  auto a = std::shared_ptr<AlgebraDescriptor>(new AlgebraDescriptor());
  a->block_dims_ = std::move(block_dims);
  a->trace_weights_ = std::move(trace_weights);
  a->label_ = std::move(label);
  a->offsets_.resize(a->block_dims_.size());
  int off = 0;
  for (size_t l = 0; l < a->block_dims_.size(); ++l) {
    require(a->block_dims_[l] >= 1, ErrorCode::config, "block dimension must be >= 1");
    require(a->trace_weights_[l] > 0.0, ErrorCode::config,
            "trace weights must be strictly positive (faithfulness)");
    a->offsets_[l] = off;
    off += a->block_dims_[l] * a->block_dims_[l];
  }
  a->dim_ = off;
  a->weight_vec_.resize(off);
  a->total_trace_ = 0.0;
  for (size_t l = 0; l < a->block_dims_.size(); ++l) {
    int n = a->block_dims_[l];
    a->weight_vec_.segment(a->offsets_[l], n * n).setConstant(a->trace_weights_[l]);
    a->total_trace_ += a->trace_weights_[l] * n;
  }
  return a;
}

bool AlgebraDescriptor::same_as(const AlgebraDescriptor& other) const {
  if (this == &other) return true;
  if (block_dims_ != other.block_dims_) return false;
  for (size_t l = 0; l < trace_weights_.size(); ++l)
    if (std::abs(trace_weights_[l] - other.trace_weights_[l]) >
        1e-14 * (1.0 + std::abs(trace_weights_[l])))
      return false;
  return true;
}

Element::Element(AlgebraPtr alg) : alg_(std::move(alg)) {
  blocks_.reserve(alg_->num_blocks());
  for (int l = 0; l < alg_->num_blocks(); ++l)
    blocks_.push_back(CMat::Zero(alg_->block_dims()[l], alg_->block_dims()[l]));
}

Element::Element(AlgebraPtr alg, std::vector<CMat> blocks)
    : alg_(std::move(alg)), blocks_(std::move(blocks)) {
  require(static_cast<int>(blocks_.size()) == alg_->num_blocks(), ErrorCode::shape_mismatch,
          "wrong number of blocks");
  for (int l = 0; l < alg_->num_blocks(); ++l) {
    int n = alg_->block_dims()[l];
    require(blocks_[l].rows() == n && blocks_[l].cols() == n, ErrorCode::shape_mismatch,
            "block shape mismatch");
  }
}

Element Element::identity(AlgebraPtr alg) {
  Element x(alg);
  for (int l = 0; l < alg->num_blocks(); ++l) x.blocks_[l].setIdentity();
  return x;
}

Element Element::from_vec(AlgebraPtr alg, const CVec& v) {
  require(v.size() == alg->dim(), ErrorCode::shape_mismatch, "vector length mismatch");
  Element x(alg);
  for (int l = 0; l < alg->num_blocks(); ++l) {
    int n = alg->block_dims()[l];
    int off = alg->block_offset(l);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) x.blocks_[l](i, j) = v[off + i * n + j];
  }
  return x;
}

CVec Element::vec() const {
  CVec v(alg_->dim());
  for (int l = 0; l < alg_->num_blocks(); ++l) {
    int n = alg_->block_dims()[l];
    int off = alg_->block_offset(l);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v[off + i * n + j] = blocks_[l](i, j);
  }
  return v;
}

void Element::check_compatible(const Element& o) const {
  require(alg_ && o.alg_ && alg_->same_as(*o.alg_), ErrorCode::shape_mismatch,
          "elements of different algebras");
}

Element Element::adjoint() const {
  Element r(alg_);
  for (size_t l = 0; l < blocks_.size(); ++l) r.blocks_[l] = blocks_[l].adjoint();
  return r;
}

Element Element::operator+(const Element& o) const {
  check_compatible(o);
  Element r(alg_);
  for (size_t l = 0; l < blocks_.size(); ++l) r.blocks_[l] = blocks_[l] + o.blocks_[l];
  return r;
}

Element Element::operator-(const Element& o) const {
  check_compatible(o);
  Element r(alg_);
  for (size_t l = 0; l < blocks_.size(); ++l) r.blocks_[l] = blocks_[l] - o.blocks_[l];
  return r;
}

Element Element::operator-() const {
  Element r(alg_);
  for (size_t l = 0; l < blocks_.size(); ++l) r.blocks_[l] = -blocks_[l];
  return r;
}

Element Element::operator*(const Element& o) const {
  check_compatible(o);
  Element r(alg_);
  for (size_t l = 0; l < blocks_.size(); ++l) r.blocks_[l] = blocks_[l] * o.blocks_[l];
  return r;
}

Element& Element::operator+=(const Element& o) {
  check_compatible(o);
  for (size_t l = 0; l < blocks_.size(); ++l) blocks_[l] += o.blocks_[l];
  return *this;
}

Element& Element::operator-=(const Element& o) {
  check_compatible(o);
  for (size_t l = 0; l < blocks_.size(); ++l) blocks_[l] -= o.blocks_[l];
  return *this;
}

Element operator*(Complex c, const Element& x) {
  Element r(x.alg_);
  for (size_t l = 0; l < x.blocks_.size(); ++l) r.blocks_[l] = c * x.blocks_[l];
  return r;
}

Element operator*(double c, const Element& x) { return Complex(c, 0.0) * x; }

Complex trace(const Element& x) {
  Complex t = 0.0;
  for (int l = 0; l < x.num_blocks(); ++l)
    t += x.algebra()->trace_weights()[l] * x.block(l).trace();
  return t;
}

Complex inner(const Element& x, const Element& y) {
  require(x.algebra() && y.algebra() && x.algebra()->same_as(*y.algebra()),
          ErrorCode::shape_mismatch, "inner product across algebras");
  Complex t = 0.0;
  for (int l = 0; l < x.num_blocks(); ++l)
    t += x.algebra()->trace_weights()[l] * (x.block(l).adjoint() * y.block(l)).trace();
  return t;
}

double Element::norm_tau() const { return std::sqrt(std::abs(std::real(inner(*this, *this)))); }

double Element::norm_op() const {
  double m = 0.0;
  for (const auto& b : blocks_) {
    if (b.rows() == 1) {
      m = std::max(m, std::abs(b(0, 0)));
    } else {
      Eigen::JacobiSVD<CMat> svd(b);
      m = std::max(m, svd.singularValues()[0]);
    }
  }
  return m;
}

bool Element::is_self_adjoint(double rel_tol) const {
  double scale = norm_op();
  double dev = 0.0;
  for (const auto& b : blocks_) dev = std::max(dev, (b - b.adjoint()).cwiseAbs().maxCoeff());
  return dev <= rel_tol * (1.0 + scale);
}

Element Element::symmetrized() const {
  Element r(alg_);
  for (size_t l = 0; l < blocks_.size(); ++l) r.blocks_[l] = 0.5 * (blocks_[l] + blocks_[l].adjoint());
  return r;
}

std::vector<RVec> Element::eigenvalues(double rel_tol) const {
  require(is_self_adjoint(rel_tol), ErrorCode::domain, "eigenvalues of non-self-adjoint element");
  std::vector<RVec> out;
  for (const auto& b : blocks_) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (b + b.adjoint()), Eigen::EigenvaluesOnly);
    require(es.info() == Eigen::Success, ErrorCode::numerical, "eigendecomposition failed");
    out.push_back(es.eigenvalues());
  }
  return out;
}

RVec Element::all_eigenvalues(double rel_tol) const {
  auto per = eigenvalues(rel_tol);
  RVec all(alg_ ? std::accumulate(alg_->block_dims().begin(), alg_->block_dims().end(), 0) : 0);
  int k = 0;
  for (const auto& ev : per)
    for (int i = 0; i < ev.size(); ++i) all[k++] = ev[i];
  return all;
}

double Element::min_eigenvalue(double rel_tol) const {
  return all_eigenvalues(rel_tol).minCoeff();
}

double Element::max_eigenvalue(double rel_tol) const {
  return all_eigenvalues(rel_tol).maxCoeff();
}

Element func_calc(const Element& x, const std::function<double(double)>& g,
                  const Tolerances& tol) {
  require(x.is_self_adjoint(tol.self_adjoint), ErrorCode::domain,
          "func_calc requires a self-adjoint element");
  Element r(x.algebra());
  for (int l = 0; l < x.num_blocks(); ++l) {
    CMat h = 0.5 * (x.block(l) + x.block(l).adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    require(es.info() == Eigen::Success, ErrorCode::numerical, "eigendecomposition failed");
    RVec gv(es.eigenvalues().size());
    for (int i = 0; i < gv.size(); ++i) {
      double v = g(es.eigenvalues()[i]);
      require(std::isfinite(v), ErrorCode::domain, "func_calc: g undefined at an eigenvalue");
      gv[i] = v;
    }
    r.block(l) = es.eigenvectors() * gv.asDiagonal() * es.eigenvectors().adjoint();
  }
  return r;
}

Density Density::make(const Element& x, double tolerance) {
  Density d = make_subnormalized(x, tolerance);
  double m = std::real(trace(d.elem_));
  double scale = 1.0 + d.elem_.norm_op();
  require(std::abs(m - 1.0) <= 1e3 * tolerance * scale,
          ErrorCode::domain, "density trace differs from 1 beyond tolerance");
  return d;
}

Density Density::make_subnormalized(const Element& x, double tolerance) {
  double scale = 1.0 + x.norm_op();
  require(x.is_self_adjoint(tolerance * 1e3), ErrorCode::domain,
          "density element is not self-adjoint within tolerance");
  Density d;
  d.elem_ = x.symmetrized();
  d.tolerance_ = tolerance;
  double mineig = d.elem_.min_eigenvalue(tolerance);
  require(mineig >= -1e3 * tolerance * scale, ErrorCode::domain,
          "density element is not positive semidefinite");
  return d;
}

double Density::mass() const { return std::real(trace(elem_)); }

Element support_projection(const Element& x, double rank_tol) {
  Element p(x.algebra());
  double lmax = 0.0;
  std::vector<Eigen::SelfAdjointEigenSolver<CMat>> solvers;
  for (int l = 0; l < x.num_blocks(); ++l) {
    solvers.emplace_back(CMat(0.5 * (x.block(l) + x.block(l).adjoint())));
    require(solvers.back().info() == Eigen::Success, ErrorCode::numerical,
            "eigendecomposition failed");
    lmax = std::max(lmax, solvers.back().eigenvalues().cwiseAbs().maxCoeff());
  }
  double cut = rank_tol * lmax;
  for (int l = 0; l < x.num_blocks(); ++l) {
    const auto& es = solvers[l];
    CMat acc = CMat::Zero(x.block(l).rows(), x.block(l).cols());
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > cut) acc += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    p.block(l) = acc;
  }
  return p;
}

Element support_projection(const Density& rho, double rank_tol) {
  return support_projection(rho.element(), rank_tol);
}

bool is_projection(const Element& p, double tol) {
  if (!p.is_self_adjoint(tol * 1e2)) return false;
  Element diff = p * p - p;
  return diff.norm_op() <= tol * 1e2 * (1.0 + p.norm_op());
}

Element compress(const Element& x, const Element& p, const Tolerances& tol) {
  require(is_projection(p, tol.self_adjoint), ErrorCode::domain,
          "compress: p is not a projection");
  return p * x * p;
}

SubalgebraBasis SubalgebraBasis::make(AlgebraPtr parent, std::vector<Element> basis, Element unit,
                                      const Tolerances& tol) {
  require(!basis.empty(), ErrorCode::config, "empty subalgebra basis");
  int m = static_cast<int>(basis.size());
  // Linear independence via the Gram matrix.
  CMat gram(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) gram(i, j) = inner(basis[i], basis[j]);
  Eigen::SelfAdjointEigenSolver<CMat> es(gram);
  require(es.info() == Eigen::Success, ErrorCode::numerical, "Gram eigendecomposition failed");
  double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
  require(lmin > 1e-12 * std::max(1.0, lmax), ErrorCode::domain,
          "degenerate Gram matrix: basis not linearly independent");

  SubalgebraBasis C;
  C.parent_ = std::move(parent);
  C.basis_ = std::move(basis);
  C.unit_ = std::move(unit);

  // Closure under product and adjoint, checked by projecting onto the span.
  auto in_span = [&](const Element& x) {
    Element px = project_subalgebra(x, C);
    return (x - px).norm_tau() <= tol.structure * (1.0 + x.norm_tau());
  };
  for (const auto& b : C.basis_) {
    require(in_span(b.adjoint()), ErrorCode::domain, "basis not closed under adjoint");
    for (const auto& c : C.basis_)
      require(in_span(b * c), ErrorCode::domain, "basis not closed under product");
  }
  for (const auto& b : C.basis_) {
    require((C.unit_ * b - b).norm_tau() <= tol.structure * (1.0 + b.norm_tau()) &&
                (b * C.unit_ - b).norm_tau() <= tol.structure * (1.0 + b.norm_tau()),
            ErrorCode::domain, "unit does not act as identity on the basis");
  }
  return C;
}

Element project_subalgebra(const Element& x, const SubalgebraBasis& C) {
  require(x.algebra()->same_as(*C.parent()), ErrorCode::shape_mismatch,
          "element does not belong to the subalgebra's parent");
  int m = static_cast<int>(C.basis().size());
  CMat gram(m, m);
  CVec rhs(m);
  for (int i = 0; i < m; ++i) {
    rhs[i] = inner(C.basis()[i], x);
    for (int j = 0; j < m; ++j) gram(i, j) = inner(C.basis()[i], C.basis()[j]);
  }
  Eigen::LDLT<CMat> ldlt(gram);
  require(ldlt.info() == Eigen::Success, ErrorCode::numerical, "degenerate Gram matrix");
  CVec coef = ldlt.solve(rhs);
  Element p(x.algebra());
  for (int i = 0; i < m; ++i) p += coef[i] * C.basis()[i];
  return p;
}

Complex mass_difference(const Element& x, const SubalgebraBasis& C, const Tolerances& tol) {
  Element one = Element::identity(x.algebra());
  Element gap = one - C.unit();
  double denom = std::real(trace(gap));
  if (std::abs(denom) <= tol.mass * (1.0 + x.algebra()->total_trace())) return 0.0;  // 1_C = 1_A
  Element r = x - project_subalgebra(x, C);
  return trace(r) / denom;
}

Element random_element(AlgebraPtr alg, Rng& rng, double scale) {
  Element x(alg);
  for (int l = 0; l < alg->num_blocks(); ++l) {
    int n = alg->block_dims()[l];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        x.block(l)(i, j) = Complex(rng.normal(0.0, scale), rng.normal(0.0, scale));
  }
  return x;
}

Element random_self_adjoint(AlgebraPtr alg, Rng& rng, double scale) {
  return random_element(alg, rng, scale).symmetrized();
}

Density random_density(AlgebraPtr alg, Rng& rng, double spread) {
  Element h = random_self_adjoint(alg, rng, spread);
  Element e = func_calc(h, [](double s) { return std::exp(-s); });
  double z = std::real(trace(e));
  return Density::make((1.0 / z) * e);
}

Density random_density_in_face(AlgebraPtr alg, const Element& p, Rng& rng, double spread) {
  Element h = random_self_adjoint(alg, rng, spread);
  Element php = p * h * p;
  // exp(-h) within the compressed corner: functional calculus then re-compress
  Element e = p * func_calc(php, [](double s) { return std::exp(-s); }) * p;
  e = e.symmetrized();
  double z = std::real(trace(e));
  require(z > 0, ErrorCode::numerical, "degenerate face sample");
  return Density::make((1.0 / z) * e);
}

}  // namespace qot
