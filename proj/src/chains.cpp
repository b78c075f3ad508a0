// SPDX-License-Identifier: Apache-2.0
#include "qot/chains.hpp"

#include "qot/examples.hpp"

#include <cmath>

namespace qot {

namespace {

// vec-level matrix of x -> x (tensor) I_2 for M_n -> M_{2n}, row-major blocks.
CMat tensor_m2_matrix(int n) {
  int N = 2 * n;
  CMat m = CMat::Zero(N * N, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int s = 0; s < 2; ++s) {
        int row = (2 * i + s) * N + (2 * j + s);
        m(row, i * n + j) = 1.0;
      }
  return m;
}

// corner embedding M_n -> M_{n+1}: x -> x (+) 0.
CMat corner_matrix(int n) {
  int N = n + 1;
  CMat m = CMat::Zero(N * N, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i * N + j, i * n + j) = 1.0;
  return m;
}

CMat pi_matrix_from_iota(const CMat& iota, const AlgebraPtr& small, const AlgebraPtr& big) {
  return small->weight_vec().cwiseInverse().asDiagonal() * iota.adjoint() *
         big->weight_vec().asDiagonal();
}

}  // namespace

ChainDescriptor ChainDescriptor::car_tower(int stages, std::vector<double> nu,
                                           const Tolerances& tol) {
  require(stages >= 1, ErrorCode::config, "tower needs at least one stage");
  if (nu.empty()) {
    nu.resize(stages);
    for (int i = 0; i < stages; ++i) nu[i] = i + 1.0;
  }
  require(static_cast<int>(nu.size()) >= stages, ErrorCode::config, "need one energy per stage");
  ChainDescriptor chain;
  for (int j = 1; j <= stages; ++j) {
    auto ex = build(ExampleSpec::car_stage_spec(j, {nu.begin(), nu.begin() + j}), tol);
    chain.stages_.push_back({ex.algebra, ex.bimodule, ex.gradient, ex.heat, ex.label});
    if (j > 1) {
      int n = 1 << (j - 1);
      CMat io = tensor_m2_matrix(n);
      chain.links_.push_back({io, io, "tensor_m2"});
    }
  }
  chain.validate(tol);
  return chain;
}

ChainDescriptor ChainDescriptor::corner_tower(int n0, int stages, std::vector<double> nu,
                                              const Tolerances& tol) {
  require(n0 >= 2 && stages >= 1, ErrorCode::config, "corner tower needs n0 >= 2");
  int ntop = n0 + stages - 1;
  if (nu.empty()) {
    nu.resize(ntop);
    for (int i = 0; i < ntop; ++i) nu[i] = i + 1.0;
  }
  require(static_cast<int>(nu.size()) >= ntop, ErrorCode::config, "need one energy per level");
  ChainDescriptor chain;
  for (int j = 0; j < stages; ++j) {
    int n = n0 + j;
    auto ex = build(ExampleSpec::matrix_dynamics_spec(n, {nu.begin(), nu.begin() + n}), tol);
    chain.stages_.push_back({ex.algebra, ex.bimodule, ex.gradient, ex.heat, ex.label});
    if (j > 0) {
      CMat io = corner_matrix(n - 1);
      chain.links_.push_back({io, io, "corner"});
    }
  }
  chain.validate(tol);
  return chain;
}

ChainDescriptor ChainDescriptor::from_stages(std::vector<ChainStage> stages,
                                             std::vector<ChainLink> links,
                                             const Tolerances& tol) {
  require(stages.size() == links.size() + 1, ErrorCode::config,
          "a tower with S stages needs S-1 links");
  ChainDescriptor chain;
  chain.stages_ = std::move(stages);
  chain.links_ = std::move(links);
  chain.validate(tol);
  return chain;
}

CMat ChainDescriptor::iota_matrix(int j, int k, bool target_side) const {
  require(0 <= j && j <= k && k < num_stages(), ErrorCode::config, "bad stage indices");
  int dim_j = target_side ? stages_[j].gradient.target()->dim() : stages_[j].algebra->dim();
  CMat m = CMat::Identity(dim_j, dim_j);
  for (int s = j; s < k; ++s) m = (target_side ? links_[s].iota_B : links_[s].iota_A) * m;
  return m;
}

Element ChainDescriptor::include(int j, int k, const Element& x, bool target_side) const {
  const AlgebraPtr& dst =
      target_side ? stages_[k].gradient.target() : stages_[k].algebra;
  return Element::from_vec(dst, iota_matrix(j, k, target_side) * x.vec());
}

Element ChainDescriptor::project(int k, int j, const Element& x, bool target_side) const {
  const AlgebraPtr& src = target_side ? stages_[k].gradient.target() : stages_[k].algebra;
  const AlgebraPtr& dst = target_side ? stages_[j].gradient.target() : stages_[j].algebra;
  CMat pi = pi_matrix_from_iota(iota_matrix(j, k, target_side), dst, src);
  return Element::from_vec(dst, pi * x.vec());
}

void ChainDescriptor::validate(const Tolerances& tol) const {
  Rng rng(0xC0FFEE);
  for (size_t s = 0; s + 1 < stages_.size(); ++s) {
    const auto& Aj = stages_[s].algebra;
    const auto& Ak = stages_[s + 1].algebra;
    const CMat& io = links_[s].iota_A;
    // *-embedding, trace isometry, pi o iota = id
    for (int t = 0; t < 6; ++t) {
      Element x = random_element(Aj, rng), y = random_element(Aj, rng);
      Element ix = Element::from_vec(Ak, io * x.vec());
      Element iy = Element::from_vec(Ak, io * y.vec());
      Element ixy = Element::from_vec(Ak, io * (x * y).vec());
      require((ix * iy - ixy).norm_tau() <= tol.structure * (1.0 + ixy.norm_tau()),
              ErrorCode::domain, "chain link is not multiplicative");
      Complex a = inner(ix, iy), b = inner(x, y);
      require(std::abs(a - b) <= tol.structure * (1.0 + std::abs(b)), ErrorCode::domain,
              "chain link is not a trace isometry");
      Element back = project(static_cast<int>(s) + 1, static_cast<int>(s), ix);
      require((back - x).norm_tau() <= tol.structure * (1.0 + x.norm_tau()), ErrorCode::domain,
              "pi o iota != id");
    }
    // exact block-structural locality: nabla_k o iota_A = iota_B o nabla_j and
    // nabla_k* maps included B_j into included A_j
    CMat lhs = stages_[s + 1].gradient.nabla() * io;
    CMat rhs = links_[s].iota_B * stages_[s].gradient.nabla();
    require((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-11 * (1.0 + rhs.cwiseAbs().maxCoeff()),
            ErrorCode::domain, "gradient locality fails along the tower");
    for (int t = 0; t < 4; ++t) {
      Element u = random_element(stages_[s].gradient.target(), rng);
      Element iu = Element::from_vec(stages_[s + 1].gradient.target(), links_[s].iota_B * u.vec());
      Element star = stages_[s + 1].gradient.apply_star(iu);
      Element proj = include(static_cast<int>(s), static_cast<int>(s) + 1,
                             project(static_cast<int>(s) + 1, static_cast<int>(s), star));
      require((star - proj).norm_tau() <= tol.structure * (1.0 + star.norm_tau()),
              ErrorCode::domain, "adjoint gradient escapes the included subalgebra");
    }
  }
}

Density restrict_state(const ChainDescriptor& chain, int k, int j, const Density& rho,
                       double* mass_out, const Tolerances& tol) {
  require(j <= k, ErrorCode::config, "restrict_state needs j <= k");
  Element one_j = Element::identity(chain.stage(j).algebra);
  Element incl_one = chain.include(j, k, one_j);
  double mass = std::real(inner(incl_one, rho.element()));
  if (mass_out) *mass_out = mass;
  require(mass > tol.mass, ErrorCode::domain,
          "restricted state has vanishing mass on the substage");
  Element proj = chain.project(k, j, rho.element());
  return Density::make((1.0 / mass) * proj.symmetrized(), 1e-8);
}

DiscretePath restrict_path(const ChainDescriptor& chain, int k, int j, const DiscretePath& path,
                           const Tolerances& tol) {
  DiscretePath out;
  out.gradient = &chain.stage(j).gradient;
  out.grid = path.grid;
  Element one_j = Element::identity(chain.stage(j).algebra);
  Element incl_one = chain.include(j, k, one_j);
  // one normalization for the whole path, taken at the first node
  double mass = std::real(inner(incl_one, path.states.front().element()));
  require(mass > tol.mass, ErrorCode::domain, "path restriction: vanishing mass");
  for (const auto& st : path.states) {
    Element proj = chain.project(k, j, st.element());
    out.states.push_back(Density::make_subnormalized((1.0 / mass) * proj.symmetrized(), 1e-8));
  }
  for (const auto& w : path.fields) {
    Element proj = chain.project(k, j, w, /*target_side=*/true);
    out.fields.push_back((1.0 / mass) * proj);
  }
  return out;
}

DiscretePath include_path(const ChainDescriptor& chain, int j, int k, const DiscretePath& path) {
  DiscretePath out;
  out.gradient = &chain.stage(k).gradient;
  out.grid = path.grid;
  for (const auto& st : path.states)
    out.states.push_back(Density::make_subnormalized(chain.include(j, k, st.element()), 1e-8));
  for (const auto& w : path.fields)
    out.fields.push_back(chain.include(j, k, w, /*target_side=*/true));
  return out;
}

ChainConvergenceReport distance_convergence(const ChainDescriptor& chain, const Density& rho0,
                                            const Density& rho1, const RepresentingFunction& f,
                                            double theta, int K, const TransportOptions& topts,
                                            const Tolerances& tol) {
  int top = chain.num_stages() - 1;
  ChainConvergenceReport rep;
  for (int j = 0; j <= top; ++j) {
    StageDistanceRow row;
    row.stage = j + 1;
    row.K = K;
    try {
      Density r0 = (j == top) ? rho0 : restrict_state(chain, top, j, rho0, &row.mass0, tol);
      Density r1 = (j == top) ? rho1 : restrict_state(chain, top, j, rho1, &row.mass1, tol);
      TransportResult res = transport_distance(chain.stage(j).gradient, chain.stage(j).heat, f,
                                               theta, r0, r1, K, topts, tol);
      row.infeasible = res.infinite;
      row.distance = res.distance;
      row.gap = res.gap;
      row.status = res.status;
    } catch (const Error&) {
      row.infeasible = true;
      row.status = TransportStatus::infeasible;
    }
    rep.rows.push_back(row);
  }
  rep.nondecreasing_within_gaps = true;
  for (size_t i = 0; i + 1 < rep.rows.size(); ++i) {
    if (rep.rows[i].infeasible || rep.rows[i + 1].infeasible) continue;
    double slack = rep.rows[i].gap + rep.rows[i + 1].gap;
    if (rep.rows[i].distance > rep.rows[i + 1].distance + slack)
      rep.nondecreasing_within_gaps = false;
  }
  return rep;
}

double heat_restriction_deviation(const ChainDescriptor& chain, int k, int j, const Density& rho,
                                  double t) {
  Element flowed = chain.stage(k).heat.heat_apply(t, rho.element());
  Element lhs = chain.project(k, j, flowed);
  Element rhs = chain.stage(j).heat.heat_apply(t, chain.project(k, j, rho.element()));
  return (lhs - rhs).norm_tau();
}

}  // namespace qot
