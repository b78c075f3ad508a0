// SPDX-License-Identifier: Apache-2.0
#include "qot/bimodule.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace qot {

namespace {

// Row-major vec: vec(a u b) = kron(a, b^T) vec(u), assembled blockwise.
CMat sandwich_superop(const AlgebraPtr& alg, const Element& a, const Element& b) {
  CMat m = CMat::Zero(alg->dim(), alg->dim());
  for (int l = 0; l < alg->num_blocks(); ++l) {
    int n = alg->block_dims()[l];
    int off = alg->block_offset(l);
    const CMat& A = a.block(l);
    CMat Bt = b.block(l).transpose();
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        if (A(i, k) == Complex(0, 0)) continue;
        m.block(off + i * n, off + k * n, n, n) += A(i, k) * Bt;
      }
  }
  return m;
}

}  // namespace

StarHom StarHom::identity(AlgebraPtr alg) {
  StarHom h;
  h.src_ = alg;
  h.dst_ = alg;
  h.m_ = CMat::Identity(alg->dim(), alg->dim());
  h.kind_ = "identity";
  return h;
}

StarHom StarHom::coordinate_embedding(AlgebraPtr functions, AlgebraPtr edges,
                                      const std::vector<std::pair<int, int>>& edge_list,
                                      int coordinate) {
  require(coordinate == 0 || coordinate == 1, ErrorCode::config, "coordinate must be 0 or 1");
  require(static_cast<int>(edge_list.size()) == edges->dim(), ErrorCode::shape_mismatch,
          "edge list does not match edge algebra");
  StarHom h;
  h.src_ = functions;
  h.dst_ = edges;
  h.m_ = CMat::Zero(edges->dim(), functions->dim());
  for (size_t e = 0; e < edge_list.size(); ++e) {
    int site = coordinate == 0 ? edge_list[e].first : edge_list[e].second;
    require(site >= 0 && site < functions->dim(), ErrorCode::shape_mismatch, "bad edge site");
    h.m_(static_cast<int>(e), site) = 1.0;
  }
  h.kind_ = coordinate == 0 ? "first_coordinate" : "second_coordinate";
  return h;
}

StarHom StarHom::diagonal_into_sum(AlgebraPtr src, AlgebraPtr sum, int copies) {
  require(sum->dim() == copies * src->dim(), ErrorCode::shape_mismatch,
          "direct sum dimension mismatch");
  StarHom h;
  h.src_ = src;
  h.dst_ = sum;
  h.m_ = CMat::Zero(sum->dim(), src->dim());
  for (int c = 0; c < copies; ++c)
    h.m_.block(c * src->dim(), 0, src->dim(), src->dim()).setIdentity();
  h.kind_ = "diagonal_embedding";
  return h;
}

StarHom StarHom::from_matrix(AlgebraPtr src, AlgebraPtr dst, CMat matrix, std::string kind) {
  require(matrix.rows() == dst->dim() && matrix.cols() == src->dim(), ErrorCode::shape_mismatch,
          "hom matrix shape mismatch");
  StarHom h;
  h.src_ = std::move(src);
  h.dst_ = std::move(dst);
  h.m_ = std::move(matrix);
  h.kind_ = std::move(kind);
  return h;
}

StarHom StarHom::conjugation(AlgebraPtr alg, const Element& u) {
  require(u.is_self_adjoint(default_tol().self_adjoint * 1e2), ErrorCode::domain,
          "conjugation generator must be self-adjoint");
  Element usq = u * u - Element::identity(alg);
  require(usq.norm_op() <= 1e-10 * (1.0 + u.norm_op()), ErrorCode::domain,
          "conjugation generator must be a self-adjoint unitary");
  StarHom h;
  h.src_ = alg;
  h.dst_ = alg;
  h.m_ = sandwich_superop(alg, u, u);
  h.kind_ = "conjugation";
  return h;
}

Element StarHom::apply(const Element& x) const {
  require(x.algebra()->same_as(*src_), ErrorCode::shape_mismatch, "hom applied across algebras");
  return Element::from_vec(dst_, m_ * x.vec());
}

CMat StarHom::adjoint_matrix() const {
  // phi^* = W_A^{-1} M^H W_B for the weighted inner products.
  return src_->weight_vec().cwiseInverse().asDiagonal() * m_.adjoint() *
         dst_->weight_vec().asDiagonal();
}

Element StarHom::apply_adjoint(const Element& u) const {
  require(u.algebra()->same_as(*dst_), ErrorCode::shape_mismatch, "adjoint applied across algebras");
  return Element::from_vec(src_, adjoint_matrix() * u.vec());
}

void StarHom::validate(Rng& rng, const Tolerances& tol, int samples) const {
  Element one_src = Element::identity(src_), one_dst = Element::identity(dst_);
  require((apply(one_src) - one_dst).norm_op() <= tol.structure, ErrorCode::domain,
          "hom is not unital");
  for (int s = 0; s < samples; ++s) {
    Element x = random_element(src_, rng), y = random_element(src_, rng);
    double scale = 1.0 + x.norm_op() * y.norm_op();
    require((apply(x * y) - apply(x) * apply(y)).norm_op() <= tol.structure * scale,
            ErrorCode::domain, "hom is not multiplicative");
    require((apply(x.adjoint()) - apply(x).adjoint()).norm_op() <= tol.structure * (1.0 + x.norm_op()),
            ErrorCode::domain, "hom does not intertwine adjoints");
  }
}

AntiLinearMap AntiLinearMap::adjoint_map(AlgebraPtr alg) {
  // vec(u*) = P conj(vec u) with P the blockwise transposition permutation.
  CMat p = CMat::Zero(alg->dim(), alg->dim());
  for (int l = 0; l < alg->num_blocks(); ++l) {
    int n = alg->block_dims()[l];
    int off = alg->block_offset(l);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) p(off + i * n + j, off + j * n + i) = 1.0;
  }
  AntiLinearMap g;
  g.alg_ = alg;
  g.coeff_ = p;
  g.kind_ = "adjoint";
  return g;
}

AntiLinearMap AntiLinearMap::signed_hom_star(const StarHom& phi, double sign) {
  require(phi.source()->same_as(*phi.target()), ErrorCode::config,
          "signed_hom_star needs an endomorphism");
  AntiLinearMap star = adjoint_map(phi.source());
  AntiLinearMap g;
  g.alg_ = phi.source();
  g.coeff_ = sign * (phi.matrix() * star.coeff_);
  g.kind_ = sign >= 0 ? "hom_star" : "neg_hom_star";
  return g;
}

AntiLinearMap AntiLinearMap::signed_swap_conj(AlgebraPtr edges,
                                              const std::vector<std::pair<int, int>>& edge_list,
                                              double sign) {
  require(static_cast<int>(edge_list.size()) == edges->dim(), ErrorCode::shape_mismatch,
          "edge list does not match edge algebra");
  CMat p = CMat::Zero(edges->dim(), edges->dim());
  for (size_t e = 0; e < edge_list.size(); ++e) {
    auto rev = std::make_pair(edge_list[e].second, edge_list[e].first);
    auto it = std::find(edge_list.begin(), edge_list.end(), rev);
    require(it != edge_list.end(), ErrorCode::domain, "edge set is not symmetric");
    p(static_cast<int>(e), static_cast<int>(it - edge_list.begin())) = sign;
  }
  AntiLinearMap g;
  g.alg_ = edges;
  g.coeff_ = p;
  g.kind_ = sign >= 0 ? "swap_conj" : "neg_swap_conj";
  return g;
}

AntiLinearMap AntiLinearMap::from_coeff(AlgebraPtr alg, CMat coeff, std::string kind) {
  require(coeff.rows() == alg->dim() && coeff.cols() == alg->dim(), ErrorCode::shape_mismatch,
          "gamma coefficient shape mismatch");
  AntiLinearMap g;
  g.alg_ = std::move(alg);
  g.coeff_ = std::move(coeff);
  g.kind_ = std::move(kind);
  return g;
}

Element AntiLinearMap::apply(const Element& u) const {
  require(u.algebra()->same_as(*alg_), ErrorCode::shape_mismatch, "gamma applied across algebras");
  return Element::from_vec(alg_, coeff_ * u.vec().conjugate());
}

void AntiLinearMap::validate(Rng& rng, const Tolerances& tol, int samples) const {
  for (int s = 0; s < samples; ++s) {
    Element u = random_element(alg_, rng), v = random_element(alg_, rng);
    // isometry: <gamma u, gamma v> = conj(<u, v>)
    Complex lhs = inner(apply(u), apply(v));
    Complex rhs = std::conj(inner(u, v));
    require(std::abs(lhs - rhs) <= tol.structure * (1.0 + std::abs(rhs)), ErrorCode::domain,
            "gamma is not an isometry");
    require((apply(apply(u)) - u).norm_tau() <= tol.structure * (1.0 + u.norm_tau()),
            ErrorCode::domain, "gamma is not an involution");
  }
}

BimoduleStructure BimoduleStructure::canonical(AlgebraPtr alg) {
  BimoduleStructure bm;
  bm.source = alg;
  bm.target = alg;
  bm.phi = StarHom::identity(alg);
  bm.psi = StarHom::identity(alg);
  bm.gamma = AntiLinearMap::adjoint_map(alg);
  return bm;
}

BimoduleStructure BimoduleStructure::twisted(AlgebraPtr alg, const StarHom& phi_invol) {
  BimoduleStructure bm;
  bm.source = alg;
  bm.target = alg;
  bm.phi = phi_invol;
  bm.psi = StarHom::identity(alg);
  // gamma(u) = -phi(u*): intertwines the (phi, id)-action and makes the
  // induced differential dynamics gamma-symmetric.
  bm.gamma = AntiLinearMap::signed_hom_star(phi_invol, -1.0);
  return bm;
}

BimoduleStructure BimoduleStructure::direct_sum(const BimoduleStructure& bm, int copies) {
  require(copies >= 1, ErrorCode::config, "direct sum needs at least one copy");
  std::vector<int> dims;
  std::vector<double> weights;
  for (int c = 0; c < copies; ++c) {
    dims.insert(dims.end(), bm.target->block_dims().begin(), bm.target->block_dims().end());
    weights.insert(weights.end(), bm.target->trace_weights().begin(),
                   bm.target->trace_weights().end());
  }
  auto sum = AlgebraDescriptor::make(dims, weights, bm.target->label() + "^" + std::to_string(copies));
  BimoduleStructure out;
  out.source = bm.source;
  out.target = sum;
  CMat phim = CMat::Zero(sum->dim(), bm.source->dim());
  CMat psim = CMat::Zero(sum->dim(), bm.source->dim());
  CMat gam = CMat::Zero(sum->dim(), sum->dim());
  int d = bm.target->dim();
  for (int c = 0; c < copies; ++c) {
    phim.block(c * d, 0, d, bm.source->dim()) = bm.phi.matrix();
    psim.block(c * d, 0, d, bm.source->dim()) = bm.psi.matrix();
    gam.block(c * d, c * d, d, d) = bm.gamma.coeff();
  }
  out.phi = StarHom::from_matrix(bm.source, sum, phim, "diagonal_embedding");
  out.psi = StarHom::from_matrix(bm.source, sum, psim, "diagonal_embedding");
  out.gamma = AntiLinearMap::from_coeff(sum, gam, bm.gamma.kind());
  return out;
}

void BimoduleStructure::validate(Rng& rng, const Tolerances& tol, int samples) const {
  phi.validate(rng, tol, samples);
  psi.validate(rng, tol, samples);
  gamma.validate(rng, tol, samples);
  for (int s = 0; s < samples; ++s) {
    Element x = random_element(source, rng), y = random_element(source, rng);
    Element u = random_element(target, rng);
    // gamma(phi(x) u psi(y)) = phi(y*) gamma(u) psi(x*)
    Element lhs = gamma.apply(phi.apply(x) * u * psi.apply(y));
    Element rhs = phi.apply(y.adjoint()) * gamma.apply(u) * psi.apply(x.adjoint());
    double scale = 1.0 + x.norm_op() * u.norm_tau() * y.norm_op();
    require((lhs - rhs).norm_tau() <= tol.structure * scale, ErrorCode::domain,
            "gamma does not intertwine the bimodule action");
  }
}

Superoperator Superoperator::identity(AlgebraPtr alg) {
  return Superoperator(alg, CMat::Identity(alg->dim(), alg->dim()));
}

Element Superoperator::apply(const Element& u) const {
  require(u.algebra()->same_as(*alg_), ErrorCode::shape_mismatch,
          "superoperator applied across algebras");
  return Element::from_vec(alg_, m_ * u.vec());
}

Superoperator Superoperator::compose(const Superoperator& o) const {
  require(alg_->same_as(*o.alg_), ErrorCode::shape_mismatch, "composition across algebras");
  return Superoperator(alg_, m_ * o.m_);
}

Superoperator Superoperator::operator+(const Superoperator& o) const {
  return Superoperator(alg_, m_ + o.m_);
}
Superoperator Superoperator::operator-(const Superoperator& o) const {
  return Superoperator(alg_, m_ - o.m_);
}
Superoperator operator*(double c, const Superoperator& s) {
  return Superoperator(s.alg_, c * s.m_);
}

CMat Superoperator::hermitianized() const {
  RVec w = alg_->weight_vec();
  RVec ws = w.cwiseSqrt();
  return ws.asDiagonal() * m_ * ws.cwiseInverse().asDiagonal();
}

Superoperator Superoperator::power(double exponent, const Tolerances& tol) const {
  CMat h = hermitianized();
  CMat hs = 0.5 * (h + h.adjoint());
  double asym = (h - h.adjoint()).cwiseAbs().maxCoeff();
  require(asym <= 1e-8 * (1.0 + hs.cwiseAbs().maxCoeff()), ErrorCode::domain,
          "power of a non-self-adjoint superoperator");
  Eigen::SelfAdjointEigenSolver<CMat> es(hs);
  require(es.info() == Eigen::Success, ErrorCode::numerical, "superoperator eigensolve failed");
  RVec ev = es.eigenvalues();
  double lmax = ev.cwiseAbs().maxCoeff();
  RVec pv(ev.size());
  for (int i = 0; i < ev.size(); ++i) {
    double v = std::max(ev[i], 0.0);
    if (exponent < 0.0) {
      require(ev[i] > tol.strict_positivity * std::max(lmax, 1e-300), ErrorCode::domain,
              "inverse power of a singular superoperator");
      pv[i] = std::pow(v, exponent);
    } else {
      pv[i] = v > 0.0 ? std::pow(v, exponent) : 0.0;
    }
  }
  CMat hp = es.eigenvectors() * pv.asDiagonal() * es.eigenvectors().adjoint();
  RVec ws = alg_->weight_vec().cwiseSqrt();
  CMat back = ws.cwiseInverse().asDiagonal() * hp * ws.asDiagonal();
  return Superoperator(alg_, back);
}

Superoperator Superoperator::power_floored(double exponent, double floor) const {
  CMat h = hermitianized();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
  require(es.info() == Eigen::Success, ErrorCode::numerical, "superoperator eigensolve failed");
  require(floor > 0.0, ErrorCode::domain, "power_floored needs a positive floor");
  RVec pv(es.eigenvalues().size());
  for (int i = 0; i < pv.size(); ++i) pv[i] = std::pow(std::max(es.eigenvalues()[i], floor), exponent);
  CMat hp = es.eigenvectors() * pv.asDiagonal() * es.eigenvectors().adjoint();
  RVec ws = alg_->weight_vec().cwiseSqrt();
  return Superoperator(alg_, ws.cwiseInverse().asDiagonal() * hp * ws.asDiagonal());
}

std::pair<double, double> Superoperator::eigen_range() const {
  CMat h = hermitianized();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::numerical, "superoperator eigensolve failed");
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

double Superoperator::operator_norm() const {
  Eigen::JacobiSVD<CMat> svd(hermitianized());
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

Superoperator left_action(const BimoduleStructure& bm, const Element& x) {
  Element ph = bm.phi.apply(x);
  return Superoperator(bm.target, sandwich_superop(bm.target, ph, Element::identity(bm.target)));
}

Superoperator right_action(const BimoduleStructure& bm, const Element& y) {
  Element ps = bm.psi.apply(y);
  return Superoperator(bm.target, sandwich_superop(bm.target, Element::identity(bm.target), ps));
}

namespace {

// Eigenvalues with near-degenerate values replaced by their group mean, so g
// acts on full eigenprojections and results stay basis-independent.
RVec merged_eigenvalues(const RVec& ev, double degeneracy_tol) {
  RVec out = ev;
  double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
  int i = 0;
  while (i < ev.size()) {
    int j = i;
    double mean = ev[i];
    while (j + 1 < ev.size() && std::abs(ev[j + 1] - ev[i]) <= degeneracy_tol * scale) {
      ++j;
      mean += ev[j];
    }
    mean /= (j - i + 1);
    for (int k = i; k <= j; ++k) out[k] = mean;
    i = j + 1;
  }
  return out;
}

}  // namespace

Superoperator joint_calculus(const BimoduleStructure& bm, const Element& x, const Element& y,
                             const std::function<double(double, double)>& g,
                             const Tolerances& tol) {
  require(x.is_self_adjoint(tol.self_adjoint * 1e2) && y.is_self_adjoint(tol.self_adjoint * 1e2),
          ErrorCode::domain, "joint_calculus requires self-adjoint arguments");
  Element px = bm.phi.apply(x).symmetrized();
  Element py = bm.psi.apply(y).symmetrized();
  const AlgebraPtr& B = bm.target;
  CMat m = CMat::Zero(B->dim(), B->dim());
  for (int l = 0; l < B->num_blocks(); ++l) {
    int n = B->block_dims()[l];
    int off = B->block_offset(l);
    Eigen::SelfAdjointEigenSolver<CMat> ex(px.block(l)), ey(py.block(l));
    require(ex.info() == Eigen::Success && ey.info() == Eigen::Success, ErrorCode::numerical,
            "eigendecomposition failed");
    RVec lx = merged_eigenvalues(ex.eigenvalues(), tol.degeneracy);
    RVec ly = merged_eigenvalues(ey.eigenvalues(), tol.degeneracy);
    // With row-major vec, u -> P_a u Q_b diagonalizes over the rank-one basis
    // kron(e_a, conj(f_b)): M = U diag(g(lambda_a, kappa_b)) U^H.
    CMat U(n * n, n * n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        int col = a * n + b;
        for (int i = 0; i < n; ++i)
          U.block(i * n, col, n, 1) =
              ex.eigenvectors()(i, a) * ey.eigenvectors().col(b).conjugate();
      }
    RVec vals(n * n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double val = g(lx[a], ly[b]);
        require(std::isfinite(val), ErrorCode::domain,
                "joint_calculus: g undefined at a spectral pair");
        vals[a * n + b] = val;
      }
    m.block(off, off, n * n, n * n) = U * vals.asDiagonal() * U.adjoint();
  }
  return Superoperator(B, m);
}

bool CompressedBimodule::target_supported(const Element& u, double tol) const {
  return (u - compress_target(u)).norm_tau() <= tol * (1.0 + u.norm_tau());
}

Superoperator CompressedBimodule::joint_calculus_compressed(
    const Element& x, const Element& y, const std::function<double(double, double)>& g,
    const Tolerances& tol) const {
  // Perturb the arguments by multiples of p-perp; on the compressed subspace
  // the result agrees with the restricted functional calculus, while keeping
  // the spectra away from artifacts of the complement.
  Element one = Element::identity(bm->source);
  double ax = std::max(1.0, x.norm_op());
  double ay = std::max(1.0, y.norm_op());
  Element xp = compress_source(x) + ax * (one - p);
  Element yp = compress_source(y) + ay * (one - p);
  return joint_calculus(*bm, xp, yp, g, tol);
}

CompressedBimodule restrict_bimodule(const BimoduleStructure& bm, const Element& p,
                                     const Tolerances& tol) {
  require(is_projection(p, tol.self_adjoint), ErrorCode::domain,
          "restrict_bimodule: p is not a projection");
  CompressedBimodule c;
  c.bm = &bm;
  c.p = p;
  c.phi_p = bm.phi.apply(p);
  c.psi_p = bm.psi.apply(p);
  require(is_projection(c.phi_p, tol.self_adjoint) && is_projection(c.psi_p, tol.self_adjoint),
          ErrorCode::domain, "restrict_bimodule: phi(p), psi(p) must be projections");
  return c;
}

}  // namespace qot
