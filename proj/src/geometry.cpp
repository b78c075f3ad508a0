// SPDX-License-Identifier: Apache-2.0
#include "qot/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>

namespace qot {

namespace {

// Gauss-Legendre nodes/weights on (0,1), cached per order.
struct GaussLegendre {
  std::vector<double> nodes, weights;
};

const GaussLegendre& gauss_legendre(int n) {
  static std::map<int, GaussLegendre> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p0 = 1.0, p1 = x, dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    gl.nodes[n - 1 - i] = 0.5 * (x + 1.0);
    gl.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(gl)).first->second;
}

double eta(double s) { return s > 0.0 ? s * std::log(s) : 0.0; }

}  // namespace

double entropy_element(const Element& rho, double rank_tol) {
  double out = 0.0;
  auto per_block = rho.eigenvalues(default_tol().self_adjoint * 1e3);
  double lmax = 0.0;
  for (const auto& ev : per_block) lmax = std::max(lmax, ev.cwiseAbs().maxCoeff());
  double cut = rank_tol * lmax;
  for (int l = 0; l < rho.num_blocks(); ++l) {
    double acc = 0.0;
    for (int i = 0; i < per_block[l].size(); ++i)
      if (per_block[l][i] > cut) acc += eta(per_block[l][i]);
    out += rho.algebra()->trace_weights()[l] * acc;
  }
  return out;
}

double entropy(const Density& rho, double rank_tol) {
  return entropy_element(rho.element(), rank_tol);
}

void require_log_mean(const RepresentingFunction& f, double theta) {
  require(f.kind() == RepresentingFunction::Kind::logarithmic && theta == 1.0, ErrorCode::config,
          "this operation requires the logarithmic mean with theta = 1");
}

FixedStateGeometry::FixedStateGeometry(const QuantumGradient& g, const HeatData& hd,
                                       const Density& xi, const Tolerances& tol)
    : xi_(xi), g_(&g), hd_(&hd), tol_(tol) {
  require(hd.algebra()->same_as(*g.source()), ErrorCode::shape_mismatch,
          "heat data does not match the gradient");
  Element hxi = hd.kernel_project(xi.element());
  require((hxi - xi.element()).norm_tau() <=
              tol.fixed_part_mismatch * (1.0 + xi.element().norm_tau()),
          ErrorCode::domain, "xi is not a fixed state");
  supp_ = support_projection(xi, tol.rank);

  const AlgebraPtr& A = g.source();
  // tau-orthonormal self-adjoint basis of A_{xi,h} from per-block isometries.
  std::vector<Element> sa_basis;
  for (int l = 0; l < A->num_blocks(); ++l) {
    int n = A->block_dims()[l];
    Eigen::SelfAdjointEigenSolver<CMat> es(supp_.block(l));
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (es.eigenvalues()[i] > 0.5) idx.push_back(i);
    int r = static_cast<int>(idx.size());
    if (r == 0) continue;
    CMat V(n, r);
    for (int c = 0; c < r; ++c) V.col(c) = es.eigenvectors().col(idx[c]);
    double inv = 1.0 / std::sqrt(A->trace_weights()[l]);
    auto push = [&](const CMat& small) {
      Element e(A);
      e.block(l) = inv * (V * small * V.adjoint());
      sa_basis.push_back(e);
    };
    for (int a = 0; a < r; ++a) {
      CMat eaa = CMat::Zero(r, r);
      eaa(a, a) = 1.0;
      push(eaa);
      for (int b = a + 1; b < r; ++b) {
        CMat sym = CMat::Zero(r, r), asym = CMat::Zero(r, r);
        sym(a, b) = sym(b, a) = 1.0 / std::sqrt(2.0);
        asym(a, b) = Complex(0, 1) / std::sqrt(2.0);
        asym(b, a) = Complex(0, -1) / std::sqrt(2.0);
        push(sym);
        push(asym);
      }
    }
  }
  int msa = static_cast<int>(sa_basis.size());
  require(msa >= 1, ErrorCode::numerical, "empty compressed algebra");

  // Delta restricted to the self-adjoint part of A_xi (real symmetric there).
  RMat dm(msa, msa);
  for (int j = 0; j < msa; ++j) {
    Element dj = hd.apply_delta(sa_basis[j]);
    double leak = (dj - supp_ * dj * supp_).norm_tau();
    require(leak <= tol.structure * (1.0 + dj.norm_tau()), ErrorCode::numerical,
            "Delta does not preserve the compressed algebra");
    for (int i = 0; i < msa; ++i) dm(i, j) = std::real(inner(sa_basis[i], dj));
  }
  dm = 0.5 * (dm + dm.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<RMat> es(dm);
  require(es.info() == Eigen::Success, ErrorCode::numerical, "tangent eigensolve failed");
  double lmax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
  double cut = std::max(tol_.rank * lmax, 1e-300);

  std::vector<RVec> kernel_coords;
  std::vector<int> tangent_idx;
  for (int i = 0; i < msa; ++i) {
    if (es.eigenvalues()[i] > cut)
      tangent_idx.push_back(i);
    else
      kernel_coords.push_back(es.eigenvectors().col(i));
  }
  auto assemble = [&](const RVec& c) {
    Element e(A);
    for (int j = 0; j < msa; ++j) e += c[j] * sa_basis[j];
    return e;
  };
  int m = static_cast<int>(tangent_idx.size());
  delta_I_ = RMat::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    tangent_.push_back(assemble(es.eigenvectors().col(tangent_idx[a])));
    delta_I_(a, a) = es.eigenvalues()[tangent_idx[a]];
  }
  // Kernel part: remove the <supp xi> direction, keep K(Delta_xi).
  Element pdir = (1.0 / supp_.norm_tau()) * supp_;
  for (const auto& c : kernel_coords) {
    Element k = assemble(c);
    k -= std::real(inner(pdir, k)) * pdir;
    for (const auto& prev : kernel_) k -= std::real(inner(prev, k)) * prev;
    double n = k.norm_tau();
    if (n > 1e-8) kernel_.push_back((1.0 / n) * k);
  }
  tangent_vecs_.resize(A->dim(), m);
  for (int i = 0; i < m; ++i) tangent_vecs_.col(i) = tangent_[i].vec();
  require(m + 1 + kernel_dim() == msa, ErrorCode::numerical,
          "orthogonal decomposition of the compressed algebra failed");
}

RVec FixedStateGeometry::coords(const Element& x) const {
  CVec wx = g_->source()->weight_vec().asDiagonal() * x.vec();
  CVec c = tangent_vecs_.adjoint() * wx;
  return c.real();
}

Element FixedStateGeometry::from_coords(const RVec& c) const {
  CVec v = tangent_vecs_ * c.cast<Complex>();
  return Element::from_vec(g_->source(), v);
}

Element FixedStateGeometry::project_tangent(const Element& x) const {
  return from_coords(coords(x));
}

double FixedStateGeometry::tangent_residual(const Element& x) const {
  return (x - project_tangent(x)).norm_tau();
}

bool FixedStateGeometry::in_theta(const Density& mu, double* min_eig) const {
  Element h = hd_->kernel_project(mu.element());
  if ((h - xi_.element()).norm_tau() >
      tol_.fixed_part_mismatch * 10.0 * (1.0 + xi_.element().norm_tau()))
    return false;
  Element one = Element::identity(mu.algebra());
  double me = (mu.element() + (one - supp_)).min_eigenvalue(tol_.self_adjoint * 1e3);
  if (min_eig) *min_eig = me;
  return me > tol_.strict_positivity * std::max(1.0, mu.element().norm_op());
}

double FixedStateGeometry::ray_to_boundary(const Element& y) const {
  Element one = Element::identity(xi_.algebra());
  auto ok = [&](double t) {
    Element m = xi_.element() + t * y + (one - supp_);
    return m.min_eigenvalue(tol_.self_adjoint * 1e3) > 0.0;
  };
  if (!ok(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (ok(hi) && hi < 1e12) hi *= 2.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

MetricOperator::MetricOperator(const FixedStateGeometry& geo, const Density& mu,
                               const RepresentingFunction& f, double theta)
    : geo_(&geo), mu_(mu) {
  require(f.symmetric(), ErrorCode::config, "metric operators require a symmetric mean");
  double me = 0.0;
  require(geo.in_theta(mu, &me), ErrorCode::domain,
          "state is outside the relative interior of the fixed-state face");
  const QuantumGradient& g = geo.gradient();
  mult_theta_ = mult_operator(g.bimodule(), mu.element(), mu.element(), f, theta, geo.tol());
  int m = geo.tangent_dim();
  S_.resize(m, m);
  for (int j = 0; j < m; ++j) {
    Element v = g.apply(geo.tangent_basis()[j]);
    Element sj = g.apply_star(mult_theta_.apply(v));
    S_.col(j) = geo.coords(sj);
  }
  S_ = 0.5 * (S_ + S_.transpose()).eval();
  ldlt_.compute(S_);
  require(ldlt_.info() == Eigen::Success && ldlt_.isPositive(), ErrorCode::numerical,
          "metric operator S_mu is not positive definite");
}

RVec MetricOperator::solve(const RVec& x) const { return ldlt_.solve(x); }
RVec MetricOperator::apply(const RVec& x) const { return S_ * x; }

double MetricOperator::metric(const RVec& x, const RVec& y) const { return solve(x).dot(y); }

Element MetricOperator::theta_field(const RVec& x_coords) const {
  RVec c = solve(x_coords);
  Element pre = geo_->from_coords(c);
  return mult_theta_.apply(geo_->gradient().apply(pre));
}

LambdaContext::LambdaContext(const FixedStateGeometry& geo, const Density& mu,
                             const QuadratureOptions& quad)
    : geo_(&geo), mu_(mu), quad_(quad) {
  const auto& bm = geo.gradient().bimodule();
  Element one = Element::identity(bm.source);
  double alpha = std::max(1.0, mu.element().norm_op());
  Element mu_pert =
      (geo.support() * mu.element() * geo.support() + alpha * (one - geo.support())).symmetrized();
  Element phimu = bm.phi.apply(mu_pert).symmetrized();
  Element psimu = bm.psi.apply(mu_pert).symmetrized();
  for (int l = 0; l < bm.target->num_blocks(); ++l) {
    Eigen::SelfAdjointEigenSolver<CMat> ef(phimu.block(l)), ep(psimu.block(l));
    require(ef.info() == Eigen::Success && ep.info() == Eigen::Success, ErrorCode::numerical,
            "resolvent eigensolve failed");
    basis_phi_.push_back(ef.eigenvectors());
    evals_phi_.push_back(ef.eigenvalues());
    basis_psi_.push_back(ep.eigenvectors());
    evals_psi_.push_back(ep.eigenvalues());
  }
}

std::vector<CMat> LambdaContext::integrate_blocks(
    const std::function<void(double, std::vector<CMat>&)>& add_node) const {
  const AlgebraPtr& B = geo_->gradient().target();
  // substitution s = r/(1-r); doubling until the blockwise change is small
  auto eval_weighted = [&](int n) {
    std::vector<CMat> acc;
    for (int l = 0; l < B->num_blocks(); ++l)
      acc.push_back(CMat::Zero(B->block_dims()[l], B->block_dims()[l]));
    const auto& gl = gauss_legendre(n);
    std::vector<CMat> node;
    for (int l = 0; l < B->num_blocks(); ++l)
      node.push_back(CMat::Zero(B->block_dims()[l], B->block_dims()[l]));
    for (int i = 0; i < n; ++i) {
      double r = gl.nodes[i];
      double w = gl.weights[i] / ((1.0 - r) * (1.0 - r));
      for (auto& m : node) m.setZero();
      add_node(r / (1.0 - r), node);
      for (size_t l = 0; l < node.size(); ++l) acc[l] += w * node[l];
    }
    return acc;
  };
  auto norm_diff = [](const std::vector<CMat>& a, const std::vector<CMat>& b) {
    double d = 0.0, s = 0.0;
    for (size_t l = 0; l < a.size(); ++l) {
      d += (a[l] - b[l]).squaredNorm();
      s += b[l].squaredNorm();
    }
    return std::pair<double, double>(std::sqrt(d), std::sqrt(s));
  };
  int n = quad_.nodes;
  std::vector<CMat> prev = eval_weighted(n);
  while (2 * n <= quad_.max_nodes) {
    n *= 2;
    std::vector<CMat> next = eval_weighted(n);
    auto [d, s] = norm_diff(next, prev);
    if (d <= quad_.rel_tol * (1.0 + s)) return next;
    prev = std::move(next);
  }
  if (!quad_.strict) return prev;
  fail(ErrorCode::numerical, "Lambda quadrature did not converge");
}

Element LambdaContext::lambda(const Element& x, const Element& u) const {
  const auto& bm = geo_->gradient().bimodule();
  const AlgebraPtr& B = bm.target;
  Element phix = bm.phi.apply(x), psix = bm.psi.apply(x);
  int nb = B->num_blocks();
  // transform to the mixed eigenbases, where the resolvents are diagonal
  std::vector<CMat> xf(nb), xp(nb), uf(nb);
  for (int l = 0; l < nb; ++l) {
    xf[l] = basis_phi_[l].adjoint() * phix.block(l) * basis_phi_[l];
    xp[l] = basis_psi_[l].adjoint() * psix.block(l) * basis_psi_[l];
    uf[l] = basis_phi_[l].adjoint() * u.block(l) * basis_psi_[l];
  }
  auto acc = integrate_blocks([&](double s, std::vector<CMat>& node) {
    for (int l = 0; l < nb; ++l) {
      RVec df = (evals_phi_[l].array() + s).inverse();
      RVec dp = (evals_psi_[l].array() + s).inverse();
      // R_f phi(x) R_f u R_p  +  R_f u R_p psi(x) R_p, in mixed bases
      CMat a = df.asDiagonal() * xf[l] * df.asDiagonal();
      CMat b = uf[l] * dp.asDiagonal();
      CMat c = df.asDiagonal() * uf[l] * dp.asDiagonal();
      node[l] = a * b + c * (xp[l] * dp.asDiagonal());
    }
  });
  Element out(B);
  for (int l = 0; l < nb; ++l)
    out.block(l) = basis_phi_[l] * acc[l] * basis_psi_[l].adjoint();
  return out;
}

Element LambdaContext::lambda_star(const Element& u, const Element& v) const {
  const auto& bm = geo_->gradient().bimodule();
  const AlgebraPtr& B = bm.target;
  int nb = B->num_blocks();
  std::vector<CMat> vf(nb), us(nb);
  for (int l = 0; l < nb; ++l) {
    vf[l] = basis_phi_[l].adjoint() * v.block(l) * basis_psi_[l];           // E_f^H v E_p
    us[l] = basis_psi_[l].adjoint() * u.block(l).adjoint() * basis_phi_[l];  // E_p^H u* E_f
  }
  // phi part: R_f v R_p u* R_f (accumulated in the phi basis)
  auto phi_acc = integrate_blocks([&](double s, std::vector<CMat>& node) {
    for (int l = 0; l < nb; ++l) {
      RVec df = (evals_phi_[l].array() + s).inverse();
      RVec dp = (evals_psi_[l].array() + s).inverse();
      CMat a = df.asDiagonal() * vf[l] * dp.asDiagonal();
      node[l] = a * (us[l] * df.asDiagonal());
    }
  });
  // psi part: R_p u* R_f v R_p (accumulated in the psi basis)
  auto psi_acc = integrate_blocks([&](double s, std::vector<CMat>& node) {
    for (int l = 0; l < nb; ++l) {
      RVec df = (evals_phi_[l].array() + s).inverse();
      RVec dp = (evals_psi_[l].array() + s).inverse();
      CMat a = dp.asDiagonal() * us[l] * df.asDiagonal();
      node[l] = a * (vf[l] * dp.asDiagonal());
    }
  });
  Element phi_part(B), psi_part(B);
  for (int l = 0; l < nb; ++l) {
    phi_part.block(l) = basis_phi_[l] * phi_acc[l] * basis_phi_[l].adjoint();
    psi_part.block(l) = basis_psi_[l] * psi_acc[l] * basis_psi_[l].adjoint();
  }
  return bm.phi.apply_adjoint(phi_part) + bm.psi.apply_adjoint(psi_part);
}

double hessian_entropy(const FixedStateGeometry& geo, const MetricOperator& metric,
                       const Element& x, const QuadratureOptions& quad) {
  RVec xc = geo.coords(x);
  require(geo.tangent_residual(x) <= geo.tol().structure * (1.0 + x.norm_tau()),
          ErrorCode::domain, "hessian direction must lie in I(Delta_xi)");
  LambdaContext ctx(geo, metric.mu(), quad);
  Element theta_x = metric.theta_field(xc);
  Element dmu = geo.heat().apply_delta(metric.mu().element());
  Element lam = ctx.lambda_star(theta_x, theta_x);
  double first = -0.5 * std::real(inner(lam, dmu));
  RVec dx = geo.delta_tangent() * xc;
  double second = metric.metric(xc, dx);
  return first + second;
}

RMat hessian_matrix(const FixedStateGeometry& geo, const MetricOperator& metric,
                    const QuadratureOptions& quad) {
  int m = geo.tangent_dim();
  LambdaContext ctx(geo, metric.mu(), quad);
  Element dmu = geo.heat().apply_delta(metric.mu().element());
  std::vector<Element> theta(m);
  for (int i = 0; i < m; ++i) {
    RVec e = RVec::Zero(m);
    e[i] = 1.0;
    theta[i] = metric.theta_field(e);
  }
  RMat H(m, m);
  for (int i = 0; i < m; ++i) {
    RVec ei = RVec::Zero(m);
    ei[i] = 1.0;
    RVec di = geo.delta_tangent() * ei;
    for (int j = i; j < m; ++j) {
      Element lam_ij = ctx.lambda_star(theta[i], theta[j]);
      Element lam_ji = ctx.lambda_star(theta[j], theta[i]);
      double first = -0.25 * std::real(inner(lam_ij + lam_ji, dmu));
      RVec ej = RVec::Zero(m);
      ej[j] = 1.0;
      RVec dj = geo.delta_tangent() * ej;
      double second = 0.5 * (metric.metric(ei, dj) + metric.metric(ej, di));
      H(i, j) = H(j, i) = first + second;
    }
  }
  return H;
}

HessianBoundReport hessian_lower_bound(const FixedStateGeometry& geo,
                                       const HessianBoundOptions& opts, Rng& rng) {
  const RepresentingFunction f = RepresentingFunction::logarithmic();
  HessianBoundReport rep;
  rep.lambda_est = std::numeric_limits<double>::infinity();
  int m = geo.tangent_dim();
  if (m == 0) {
    rep.lambda_est = 0.0;
    return rep;
  }

  auto probe = [&](const Density& mu) {
    MetricOperator metric(geo, mu, f, 1.0);
    RMat H = hessian_matrix(geo, metric, opts.quad);
    RMat G = metric.S().inverse();
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<RMat> ges(H, G);
    require(ges.info() == Eigen::Success, ErrorCode::numerical, "Hessian pencil solve failed");
    double lmin = ges.eigenvalues().minCoeff();
    ++rep.samples;
    if (lmin < rep.lambda_est) {
      rep.lambda_est = lmin;
      Element one = Element::identity(mu.algebra());
      rep.worst_min_eig_mu =
          (mu.element() + (one - geo.support())).min_eigenvalue(geo.tol().self_adjoint * 1e3);
      rep.argmin_state_coords = geo.coords(mu.element() - geo.xi().element());
    }
  };

  // interior samples: xi displaced by a random tangent direction
  for (int s = 0; s < opts.n_samples; ++s) {
    RVec c(m);
    for (int i = 0; i < m; ++i) c[i] = rng.normal(0.0, opts.spread);
    Element y = geo.from_coords(c);
    double n = y.norm_tau();
    if (n == 0.0) continue;
    y = (1.0 / n) * y;
    double tmax = geo.ray_to_boundary(y);
    double t = tmax * rng.uniform(0.05, 0.9);
    probe(Density::make(geo.xi().element() + t * y, 1e-9));
  }
  // deterministic corner probes near the boundary of the face
  for (int r = 0; r < opts.n_corner_rays; ++r) {
    RVec c(m);
    for (int i = 0; i < m; ++i) c[i] = rng.normal(0.0, 1.0);
    Element y = geo.from_coords(c);
    double n = y.norm_tau();
    if (n == 0.0) continue;
    y = (1.0 / n) * y;
    double tmax = geo.ray_to_boundary(y);
    for (double frac : opts.corner_fractions)
      probe(Density::make(geo.xi().element() + frac * tmax * y, 1e-9));
  }
  return rep;
}

BeReport bakry_emery_check(const QuantumGradient& g, const HeatData& hd, double lambda,
                           const BeOptions& opts, Rng& rng, const Tolerances& tol) {
  const RepresentingFunction f = RepresentingFunction::logarithmic();
  BeReport rep;
  rep.lambda = lambda;
  rep.tolerance = opts.tolerance;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const auto& bm = g.bimodule();
  for (int s = 0; s < opts.n_states; ++s) {
    Density mu = random_density(g.source(), rng, opts.spread);
    Density hmu = hd.fixed_part(mu);
    Element p = support_projection(hmu, tol.rank);
    Superoperator m_mu = mult_operator(bm, mu.element(), mu.element(), f, 1.0, tol);
    for (int e = 0; e < opts.n_test_elements; ++e) {
      Element u = random_element(g.source(), rng);
      if (e % 2 == 0) u = u.symmetrized();
      u = p * u * p;  // compressed test element in A_{h(mu)}
      Element gu = g.apply(u);
      for (double t : opts.t_grid) {
        Element mu_t = hd.heat_apply(t, mu.element()).symmetrized();
        Element u_t = hd.heat_apply(t, u);
        Superoperator m_mut = mult_operator(bm, mu_t, mu_t, f, 1.0, tol);
        Element gu_t = g.apply(u_t);
        double lhs = std::real(inner(m_mu.apply(gu_t), gu_t));
        double rhs = std::exp(-2.0 * lambda * t) * std::real(inner(m_mut.apply(gu), gu));
        double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
        double margin = (rhs - lhs) / scale;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        ++rep.samples;
      }
    }
  }
  rep.pass = rep.worst_margin >= -opts.tolerance;
  return rep;
}

}  // namespace qot
