// SPDX-License-Identifier: Apache-2.0
#include "qot/gradient.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace qot {

namespace {

CMat weighted_adjoint(const CMat& m, const AlgebraPtr& src, const AlgebraPtr& dst) {
  // adjoint of m: src -> dst w.r.t. the weighted inner products, as dst -> src
  return src->weight_vec().cwiseInverse().asDiagonal() * m.adjoint() *
         dst->weight_vec().asDiagonal();
}

}  // namespace

std::string Provenance::describe() const {
  switch (kind) {
    case Kind::commutator: return "commutator";
    case Kind::twisted: return "twisted";
    case Kind::direct_sum: return "direct_sum(" + std::to_string(child_offsets.size()) + ")";
    case Kind::markov: return "markov";
    case Kind::custom: return "custom";
  }
  return "?";
}

Element QuantumGradient::apply(const Element& x) const {
  require(x.algebra()->same_as(*bm_.source), ErrorCode::shape_mismatch,
          "gradient applied across algebras");
  return Element::from_vec(bm_.target, nabla_ * x.vec());
}

Element QuantumGradient::apply_star(const Element& u) const {
  require(u.algebra()->same_as(*bm_.target), ErrorCode::shape_mismatch,
          "adjoint gradient applied across algebras");
  return Element::from_vec(bm_.source, nabla_star_ * u.vec());
}

void QuantumGradient::validate(Rng& rng, const Tolerances& tol, int samples) const {
  // adjoint matrix consistency
  CMat adj = weighted_adjoint(nabla_, bm_.source, bm_.target);
  require((adj - nabla_star_).cwiseAbs().maxCoeff() <=
              tol.structure * (1.0 + nabla_.cwiseAbs().maxCoeff()),
          ErrorCode::domain, "nabla_star is not the weighted adjoint of nabla");
  Element one = Element::identity(bm_.source);
  require(apply(one).norm_tau() <= tol.structure, ErrorCode::domain, "nabla 1 != 0");
  for (int s = 0; s < samples; ++s) {
    Element x = random_element(bm_.source, rng), y = random_element(bm_.source, rng);
    Element u = random_element(bm_.target, rng);
    // Leibniz: nabla(xy) = phi(x) nabla y + (nabla x) psi(y)
    Element lhs = apply(x * y);
    Element rhs = bm_.phi.apply(x) * apply(y) + apply(x) * bm_.psi.apply(y);
    double scale = 1.0 + x.norm_op() * y.norm_op() * (1.0 + nabla_.cwiseAbs().maxCoeff());
    require((lhs - rhs).norm_tau() <= tol.structure * scale, ErrorCode::domain,
            "Leibniz rule fails");
    // symmetry: gamma(nabla x) = nabla x*
    Element sym = bm_.gamma.apply(apply(x)) - apply(x.adjoint());
    require(sym.norm_tau() <= tol.structure * scale, ErrorCode::domain,
            "gradient is not gamma-symmetric");
    // adjoint correctness on samples
    Complex a = inner(apply(x), u), b = inner(x, apply_star(u));
    require(std::abs(a - b) <= tol.structure * (1.0 + std::abs(a)), ErrorCode::domain,
            "<nabla x, u> != <x, nabla* u>");
  }
}

QuantumGradient QuantumGradient::from_commutator(const BimoduleStructure& bm, const Element& D,
                                                 const Tolerances& tol) {
  require(bm.source->same_as(*bm.target), ErrorCode::config,
          "commutator gradients need the canonical bimodule");
  require(bm.phi.kind() == "identity" && bm.psi.kind() == "identity", ErrorCode::config,
          "commutator gradients need identity actions");
  require(D.is_self_adjoint(tol.self_adjoint * 1e2), ErrorCode::domain,
          "commutator generator must be self-adjoint");
  Element Ds = D.symmetrized();
  Superoperator L = left_action(bm, Ds), R = right_action(bm, Ds);
  QuantumGradient g;
  g.bm_ = bm;
  g.nabla_ = Complex(0, 1) * (L.matrix() - R.matrix());
  g.nabla_star_ = -g.nabla_;  // anti-symmetric derivation
  g.prov_.kind = Provenance::Kind::commutator;
  g.prov_.generator = Ds;
  return g;
}

QuantumGradient QuantumGradient::from_twisted(const BimoduleStructure& bm, const Element& D,
                                              const Tolerances& tol) {
  require(bm.source->same_as(*bm.target), ErrorCode::config,
          "twisted gradients act on a single algebra");
  require(D.is_self_adjoint(tol.self_adjoint * 1e2), ErrorCode::domain,
          "twisted generator must be self-adjoint");
  Element Ds = D.symmetrized();
  // phi must be involutive and anti-commute with D
  Element phiD = bm.phi.apply(Ds);
  require((phiD + Ds).norm_op() <= tol.structure * (1.0 + Ds.norm_op()), ErrorCode::domain,
          "twisted generator must be odd: phi(D) = -D");
  CMat phi2 = bm.phi.matrix() * bm.phi.matrix();
  require((phi2 - CMat::Identity(phi2.rows(), phi2.cols())).cwiseAbs().maxCoeff() <= tol.structure,
          ErrorCode::domain, "phi must be involutive");
  BimoduleStructure canon = BimoduleStructure::canonical(bm.target);
  Superoperator L = left_action(canon, Ds), R = right_action(canon, Ds);
  QuantumGradient g;
  g.bm_ = bm;
  g.nabla_ = Complex(0, 1) * (L.matrix() - R.matrix() * bm.phi.matrix());
  g.nabla_star_ = Complex(0, -1) * (L.matrix() + R.matrix() * bm.phi.matrix());
  g.prov_.kind = Provenance::Kind::twisted;
  g.prov_.generator = Ds;
  return g;
}

QuantumGradient QuantumGradient::direct_sum(const std::vector<QuantumGradient>& children,
                                            const Tolerances& tol) {
  require(!children.empty(), ErrorCode::config, "direct sum of no gradients");
  if (children.size() == 1) return children.front();
  const AlgebraPtr& A = children.front().source();
  std::vector<int> dims;
  std::vector<double> weights;
  int total = 0;
  for (const auto& c : children) {
    require(c.source()->same_as(*A), ErrorCode::config, "direct sum children must share the source");
    dims.insert(dims.end(), c.target()->block_dims().begin(), c.target()->block_dims().end());
    weights.insert(weights.end(), c.target()->trace_weights().begin(),
                   c.target()->trace_weights().end());
    total += c.target()->dim();
  }
  auto sum = AlgebraDescriptor::make(dims, weights, A->label() + "^sum");
  BimoduleStructure bm;
  bm.source = A;
  bm.target = sum;
  CMat phim = CMat::Zero(total, A->dim()), psim = CMat::Zero(total, A->dim());
  CMat gam = CMat::Zero(total, total);
  CMat nab = CMat::Zero(total, A->dim());
  QuantumGradient g;
  g.prov_.kind = Provenance::Kind::direct_sum;
  int off = 0;
  for (const auto& c : children) {
    int d = c.target()->dim();
    phim.block(off, 0, d, A->dim()) = c.bimodule().phi.matrix();
    psim.block(off, 0, d, A->dim()) = c.bimodule().psi.matrix();
    gam.block(off, off, d, d) = c.bimodule().gamma.coeff();
    nab.block(off, 0, d, A->dim()) = c.nabla();
    g.prov_.child_offsets.push_back(off);
    g.prov_.child_dims.push_back(d);
    g.prov_.children.push_back(c.provenance());
    off += d;
  }
  bm.phi = StarHom::from_matrix(A, sum, phim, "diagonal_embedding");
  bm.psi = StarHom::from_matrix(A, sum, psim, "diagonal_embedding");
  bm.gamma = AntiLinearMap::from_coeff(sum, gam, children.front().bimodule().gamma.kind());
  g.bm_ = bm;
  g.nabla_ = nab;
  g.nabla_star_ = weighted_adjoint(nab, A, sum);
  (void)tol;
  return g;
}

QuantumGradient QuantumGradient::custom(BimoduleStructure bm, CMat nabla, Provenance prov,
                                        const Tolerances& tol) {
  require(nabla.rows() == bm.target->dim() && nabla.cols() == bm.source->dim(),
          ErrorCode::shape_mismatch, "gradient matrix shape mismatch");
  QuantumGradient g;
  g.nabla_star_ = weighted_adjoint(nabla, bm.source, bm.target);
  g.bm_ = std::move(bm);
  g.nabla_ = std::move(nabla);
  g.prov_ = std::move(prov);
  (void)tol;
  return g;
}

MarkovModel from_markov(const RMat& K, const RVec& pi, const Tolerances& tol) {
  int n = static_cast<int>(K.rows());
  require(K.cols() == n && pi.size() == n && n >= 2, ErrorCode::config, "bad Markov kernel shape");
  for (int x = 0; x < n; ++x) {
    require(pi[x] > 0.0, ErrorCode::domain, "steady state must have full support");
    double row = 0.0;
    for (int y = 0; y < n; ++y) {
      require(K(x, y) >= 0.0, ErrorCode::domain, "kernel entries must be nonnegative");
      row += K(x, y);
    }
    require(std::abs(row - 1.0) <= tol.structure, ErrorCode::domain, "kernel is not row-stochastic");
  }
  RVec piK = K.transpose() * pi;
  require((piK - pi).cwiseAbs().maxCoeff() <= tol.structure, ErrorCode::domain,
          "pi is not stationary for K");
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      require(std::abs(K(x, y) * pi[x] - K(y, x) * pi[y]) <= tol.structure, ErrorCode::domain,
              "kernel is not reversible w.r.t. pi (detailed balance required)");
  // irreducibility on the support graph
  std::vector<bool> seen(n, false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  while (!q.empty()) {
    int x = q.front();
    q.pop();
    for (int y = 0; y < n; ++y)
      if (K(x, y) > 0.0 && !seen[y]) {
        seen[y] = true;
        q.push(y);
      }
  }
  require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }), ErrorCode::domain,
          "kernel is not irreducible");

  MarkovModel m;
  std::vector<int> fdims(n, 1);
  std::vector<double> fweights(pi.data(), pi.data() + n);
  m.functions = AlgebraDescriptor::make(fdims, fweights, "C(X)");
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (K(x, y) > 0.0) m.edge_list.emplace_back(x, y);
  std::vector<int> edims(m.edge_list.size(), 1);
  std::vector<double> eweights;
  for (auto [x, y] : m.edge_list) eweights.push_back(K(x, y) * pi[x]);
  m.edges = AlgebraDescriptor::make(edims, eweights, "C(E)");

  m.bm.source = m.functions;
  m.bm.target = m.edges;
  m.bm.phi = StarHom::coordinate_embedding(m.functions, m.edges, m.edge_list, 0);
  m.bm.psi = StarHom::coordinate_embedding(m.functions, m.edges, m.edge_list, 1);
  m.bm.gamma = AntiLinearMap::signed_swap_conj(m.edges, m.edge_list, -1.0);

  CMat nab = CMat::Zero(m.edges->dim(), n);
  for (size_t e = 0; e < m.edge_list.size(); ++e) {
    nab(static_cast<int>(e), m.edge_list[e].first) += 1.0;
    nab(static_cast<int>(e), m.edge_list[e].second) -= 1.0;
  }
  Provenance prov;
  prov.kind = Provenance::Kind::markov;
  prov.kernel_matrix = K;
  prov.steady_state = pi;
  m.gradient = QuantumGradient::custom(m.bm, nab, prov, tol);
  return m;
}

HeatData::HeatData(const QuantumGradient& g, const Tolerances& tol) {
  alg_ = g.source();
  delta_ = g.nabla_star() * g.nabla();
  RVec ws = alg_->weight_vec().cwiseSqrt();
  CMat h = ws.asDiagonal() * delta_ * ws.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
  require(es.info() == Eigen::Success, ErrorCode::numerical, "Laplacian eigensolve failed");
  evals_ = es.eigenvalues().cwiseMax(0.0);
  evecs_ = ws.cwiseInverse().asDiagonal() * es.eigenvectors();
  evecs_inv_ = es.eigenvectors().adjoint() * ws.asDiagonal();
  kernel_cut_ = tol.rank * std::max(evals_.maxCoeff(), 0.0);
}

Element HeatData::apply_delta(const Element& x) const {
  return Element::from_vec(alg_, delta_ * x.vec());
}

Element HeatData::heat_apply(double t, const Element& x) const {
  require(t >= 0.0, ErrorCode::domain, "heat semigroup needs t >= 0");
  require(x.algebra()->same_as(*alg_), ErrorCode::shape_mismatch, "heat_apply across algebras");
  if (std::isinf(t)) return kernel_project(x);
  CVec c = evecs_inv_ * x.vec();
  for (int i = 0; i < evals_.size(); ++i) c[i] *= std::exp(-t * evals_[i]);
  return Element::from_vec(alg_, evecs_ * c);
}

Element HeatData::kernel_project(const Element& x) const {
  CVec c = evecs_inv_ * x.vec();
  for (int i = 0; i < evals_.size(); ++i)
    if (evals_[i] > kernel_cut_) c[i] = 0.0;
  return Element::from_vec(alg_, evecs_ * c);
}

Density HeatData::fixed_part(const Density& rho) const {
  Element h = kernel_project(rho.element()).symmetrized();
  return Density::make(h, std::max(rho.tolerance(), 1e-9));
}

Element HeatData::image_part(const Density& rho) const {
  return rho.element() - kernel_project(rho.element());
}

std::optional<double> HeatData::spectral_gap() const {
  double smallest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < evals_.size(); ++i)
    if (evals_[i] > kernel_cut_) smallest = std::min(smallest, evals_[i]);
  if (!std::isfinite(smallest)) return std::nullopt;  // Delta = 0: gap undefined
  return 1.0 / smallest;
}

std::optional<double> spectral_gap(const Density& xi, double rank_tol) {
  RVec ev = xi.element().all_eigenvalues(default_tol().self_adjoint * 1e2);
  double lmax = ev.maxCoeff();
  double smallest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > rank_tol * lmax) smallest = std::min(smallest, ev[i]);
  if (!std::isfinite(smallest)) return std::nullopt;
  return 1.0 / smallest;
}

CommutationFit commutation_lambda(const QuantumGradient& g, int component, const Tolerances& tol) {
  CMat nab_n;
  if (g.provenance().kind == Provenance::Kind::direct_sum) {
    require(component >= 0 && component < static_cast<int>(g.provenance().child_offsets.size()),
            ErrorCode::config, "component index out of range");
    int off = g.provenance().child_offsets[component];
    int d = g.provenance().child_dims[component];
    require(d == g.source()->dim(), ErrorCode::config,
            "commutation identity needs components with target = source");
    nab_n = g.nabla().block(off, 0, d, g.source()->dim());
  } else {
    require(g.target()->dim() == g.source()->dim(), ErrorCode::config,
            "commutation identity needs target = source");
    nab_n = g.nabla();
  }
  CMat delta = g.nabla_star() * g.nabla();
  CMat diff = nab_n * delta - delta * nab_n;
  double nn2 = nab_n.squaredNorm();
  CommutationFit fit;
  if (nn2 == 0.0) return fit;
  fit.lambda = std::real((diff.array() * nab_n.array().conjugate()).sum()) / nn2;
  fit.residual = (diff - fit.lambda * nab_n).norm();
  double scale = nab_n.norm() * std::max(1.0, delta.norm());
  fit.certified = fit.residual <= tol.structure * scale;
  return fit;
}

}  // namespace qot
