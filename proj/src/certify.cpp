// SPDX-License-Identifier: Apache-2.0
#include "qot/certify.hpp"

#include <algorithm>
#include <cmath>

namespace qot {

std::vector<double> euler_lagrange_residual(const FixedStateGeometry& geo,
                                            const DiscretePath& path,
                                            const QuadratureOptions& quad) {
  int K = path.edges();
  require(K >= 4, ErrorCode::config, "Euler-Lagrange residuals need at least 4 edges");
  const RepresentingFunction f = RepresentingFunction::logarithmic();
  // nodewise velocities and momenta p_k = S^{-1}(mu'_k) at interior nodes
  std::vector<RVec> p(K + 1), xdot(K + 1);
  std::vector<MetricOperator> metrics(K + 1);
  for (int k = 1; k < K; ++k) {
    double span = path.grid[k + 1] - path.grid[k - 1];
    Element v = (1.0 / span) * (path.states[k + 1].element() - path.states[k - 1].element());
    xdot[k] = geo.coords(v);
    metrics[k] = MetricOperator(geo, path.states[k], f, 1.0);
    p[k] = metrics[k].solve(xdot[k]);
  }
  std::vector<double> residuals;
  for (int k = 2; k <= K - 2; ++k) {
    double span = path.grid[k + 1] - path.grid[k - 1];
    RVec dpdt = (p[k + 1] - p[k - 1]) / span;
    LambdaContext ctx(geo, path.states[k], quad);
    Element w = metrics[k].theta_field(xdot[k]);
    RVec lam = geo.coords(ctx.lambda_star(w, w));
    residuals.push_back((dpdt + 0.5 * lam).norm());
  }
  return residuals;
}

std::vector<std::pair<Density, Density>> sample_component_pairs(const FixedStateGeometry& geo,
                                                                int n_pairs, double spread,
                                                                Rng& rng) {
  std::vector<std::pair<Density, Density>> out;
  int m = geo.tangent_dim();
  if (m == 0) return out;
  auto draw = [&]() {
    RVec c(m);
    for (int i = 0; i < m; ++i) c[i] = rng.normal();
    Element y = geo.from_coords(c);
    double n = y.norm_tau();
    y = (1.0 / n) * y;
    double tmax = geo.ray_to_boundary(y);
    double t = tmax * spread * rng.uniform(0.3, 1.0);
    return Density::make(geo.xi().element() + t * y, 1e-9);
  };
  for (int i = 0; i < n_pairs; ++i) out.emplace_back(draw(), draw());
  return out;
}

EviReport evi_check(const QuantumGradient& g, const HeatData& hd, double lambda,
                    const std::vector<std::pair<Density, Density>>& pairs,
                    const std::vector<double>& t_grid, int K, const TransportOptions& topts,
                    const Tolerances& tol) {
  EviReport rep;
  rep.lambda = lambda;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());
  for (const auto& [mu, eta] : pairs) {
    double ent_eta = entropy(eta);
    // distances W(h_t mu, eta) along the grid
    std::vector<double> W(ts.size()), gap(ts.size()), ent_mu_t(ts.size());
    bool feasible = true;
    for (size_t i = 0; i < ts.size(); ++i) {
      Density mt = Density::make(hd.heat_apply(ts[i], mu.element()).symmetrized(), 1e-9);
      ent_mu_t[i] = entropy(mt);
      TransportResult r = transport_distance(g, hd, RepresentingFunction::logarithmic(), 1.0, mt,
                                             eta, K, topts, tol);
      if (r.infinite) {
        feasible = false;
        break;
      }
      W[i] = r.distance;
      gap[i] = r.gap;
    }
    if (!feasible) {
      ++rep.infeasible_pairs;
      continue;
    }
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
      double s = ts[i], t = ts[i + 1];
      double expfac = std::exp(lambda * (t - s));
      double integ = std::abs(lambda) < 1e-14 ? (t - s) : (expfac - 1.0) / lambda;
      double lhs = 0.5 * expfac * W[i + 1] * W[i + 1] - 0.5 * W[i] * W[i];
      double rhs = integ * (ent_eta - ent_mu_t[i + 1]);
      double folded = expfac * W[i + 1] * gap[i + 1] + W[i] * gap[i] + 1e-6;
      double margin = rhs - lhs + folded;
      rep.worst_margin = std::min(rep.worst_margin, margin);
      ++rep.checks;
    }
  }
  rep.pass = rep.checks > 0 && rep.worst_margin >= 0.0;
  return rep;
}

ConvexityReport geodesic_convexity_check(const QuantumGradient& g, const HeatData& hd,
                                         double lambda,
                                         const std::vector<std::pair<Density, Density>>& pairs,
                                         int K, const TransportOptions& topts,
                                         const Tolerances& tol, double slack) {
  ConvexityReport rep;
  rep.lambda = lambda;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& [mu0, mu1] : pairs) {
    TransportResult r = transport_distance(g, hd, RepresentingFunction::logarithmic(), 1.0, mu0,
                                           mu1, K, topts, tol);
    if (r.infinite) {
      ++rep.infeasible_pairs;
      continue;
    }
    double e0 = entropy(mu0), e1 = entropy(mu1);
    double W2 = r.distance * r.distance;
    for (size_t k = 1; k + 1 < r.path.states.size(); ++k) {
      double t = r.path.grid[k];
      double lhs = entropy(r.path.states[k]);
      double rhs = (1.0 - t) * e0 + t * e1 - 0.5 * lambda * t * (1.0 - t) * W2;
      double folded = std::abs(lambda) * t * (1.0 - t) * r.distance * r.gap + slack;
      double margin = rhs - lhs + folded;
      rep.worst_margin = std::min(rep.worst_margin, margin);
      ++rep.checks;
    }
  }
  rep.pass = rep.checks > 0 && rep.worst_margin >= 0.0;
  return rep;
}

CertificationReport certify_example(const BuiltExample& ex, std::optional<double> lambda,
                                    const CertifyOptions& opts, Rng& rng,
                                    const Tolerances& tol) {
  CertificationReport rep;
  rep.example = ex.label;

  // fixed-state scan: the uniform trace state plus sampled kernel densities
  std::vector<Density> xis;
  Element one = Element::identity(ex.algebra);
  xis.push_back(ex.heat.fixed_part(Density::make((1.0 / ex.algebra->total_trace()) * one)));
  for (int i = 0; i < opts.n_fixed_states; ++i) {
    Density base = random_density(ex.algebra, rng, 1.0);
    xis.push_back(ex.heat.fixed_part(base));
  }

  rep.hessian_lambda_est = std::numeric_limits<double>::infinity();
  const FixedStateGeometry* best_geo = nullptr;
  std::vector<FixedStateGeometry> geos;
  geos.reserve(xis.size());
  for (const auto& xi : xis) {
    geos.emplace_back(ex.gradient, ex.heat, xi, tol);
    if (geos.back().tangent_dim() == 0) continue;
    auto hb = hessian_lower_bound(geos.back(), opts.hessian, rng);
    rep.hessian_samples += hb.samples;
    if (hb.lambda_est < rep.hessian_lambda_est) {
      rep.hessian_lambda_est = hb.lambda_est;
      best_geo = &geos.back();
    }
  }
  require(best_geo != nullptr, ErrorCode::domain,
          "certification needs at least one nontrivial fixed-state face");

  rep.auto_lambda = !lambda.has_value();
  rep.lambda_tested = lambda.value_or(rep.hessian_lambda_est);

  rep.be = bakry_emery_check(ex.gradient, ex.heat, rep.lambda_tested, opts.be, rng, tol);
  rep.be_above = bakry_emery_check(ex.gradient, ex.heat, rep.lambda_tested + opts.frontier_delta,
                                   opts.be, rng, tol);

  auto pairs = sample_component_pairs(*best_geo, opts.n_pairs, opts.pair_spread, rng);
  rep.evi = evi_check(ex.gradient, ex.heat, rep.lambda_tested, pairs, opts.evi_t_grid, opts.K,
                      opts.transport, tol);
  rep.convexity = geodesic_convexity_check(ex.gradient, ex.heat, rep.lambda_tested, pairs, opts.K,
                                           opts.transport, tol, opts.convexity_slack);

  rep.verdict = rep.be.pass && rep.evi.pass && rep.convexity.pass;
  rep.frontier_located = rep.verdict && !rep.be_above.pass;
  // the four checks sit on the same side of the frontier at lambda_tested
  bool hessian_side = rep.hessian_lambda_est >= rep.lambda_tested - 0.05 * (1.0 + std::abs(rep.lambda_tested));
  rep.consistent = (rep.be.pass == rep.evi.pass) && (rep.be.pass == rep.convexity.pass) &&
                   (rep.be.pass == hessian_side);
  return rep;
}

}  // namespace qot
