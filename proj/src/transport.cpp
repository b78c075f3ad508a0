// SPDX-License-Identifier: Apache-2.0
#include "qot/transport.hpp"

#include <algorithm>
#include <cmath>

namespace qot {

DiscretePath::Report DiscretePath::validate(const HeatData& hd, double tolerance) const {
  require(grid.size() == states.size() && grid.size() == fields.size() + 1 && edges() >= 1,
          ErrorCode::shape_mismatch, "inconsistent path sizes");
  for (int k = 0; k < edges(); ++k)
    require(grid[k + 1] > grid[k], ErrorCode::domain, "grid must be strictly increasing");
  Report rep;
  Element h0 = hd.kernel_project(states[0].element());
  for (size_t k = 0; k < states.size(); ++k) {
    rep.max_mass_deviation =
        std::max(rep.max_mass_deviation, std::abs(states[k].mass() - states[0].mass()));
    Element hk = hd.kernel_project(states[k].element());
    rep.max_fixed_part_deviation = std::max(rep.max_fixed_part_deviation, (hk - h0).norm_tau());
  }
  for (int k = 0; k < edges(); ++k) {
    Element xdot = (1.0 / h(k)) * (states[k + 1].element() - states[k].element());
    Element res = xdot - gradient->apply_star(fields[k]);
    rep.max_continuity_residual = std::max(rep.max_continuity_residual, res.norm_tau());
  }
  double scale = 1.0 + states[0].element().norm_tau();
  rep.ok = rep.max_continuity_residual <= tolerance * scale * edges() &&
           rep.max_mass_deviation <= tolerance * scale &&
           rep.max_fixed_part_deviation <= tolerance * scale;
  return rep;
}

double path_energy(const DiscretePath& path, const RepresentingFunction& f, double theta,
                   const EpsSchedule& schedule, const Tolerances& tol) {
  const auto& bm = path.gradient->bimodule();
  double total = 0.0;
  for (int k = 0; k < path.edges(); ++k) {
    Element sigma = path.midpoint(k).symmetrized();
    QuasiEntropyResult q =
        quasi_entropy_positive(bm, sigma, sigma, path.fields[k], f, theta, schedule, tol);
    if (q.infinite) return std::numeric_limits<double>::infinity();
    total += 0.5 * path.h(k) * q.value;
  }
  return total;
}

std::vector<double> path_speeds(const DiscretePath& path, const RepresentingFunction& f,
                                double theta, const EpsSchedule& schedule, const Tolerances& tol) {
  const auto& bm = path.gradient->bimodule();
  std::vector<double> out;
  for (int k = 0; k < path.edges(); ++k) {
    Element sigma = path.midpoint(k).symmetrized();
    QuasiEntropyResult q =
        quasi_entropy_positive(bm, sigma, sigma, path.fields[k], f, theta, schedule, tol);
    out.push_back(q.infinite ? std::numeric_limits<double>::infinity()
                             : std::sqrt(std::max(q.value, 0.0)));
  }
  return out;
}

double path_length(const DiscretePath& path, const RepresentingFunction& f, double theta,
                   const EpsSchedule& schedule, const Tolerances& tol) {
  auto sp = path_speeds(path, f, theta, schedule, tol);
  double total = 0.0;
  for (int k = 0; k < path.edges(); ++k) total += path.h(k) * sp[k];
  return total;
}

Element optimal_field(const FixedStateGeometry& geo, const Density& mu, const Element& x,
                      const RepresentingFunction& f, double theta) {
  double res = geo.tangent_residual(x);
  require(res <= geo.tol().structure * 10.0 * (1.0 + x.norm_tau()), ErrorCode::domain,
          "optimal_field: direction outside im(Delta_xi) (inaccessible)");
  MetricOperator metric(geo, mu, f, theta);
  return metric.theta_field(geo.coords(x));
}

namespace {

struct SolveOutput {
  double energy = 0.0;
  std::vector<RVec> node_coords;  // interior nodes, tangent coordinates rel. to base
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  std::vector<double> history;
};

// Reduced functional E(rho) = (1/2) sum_k h_k <S^{-1}_{sigma_k} x_k, x_k> over
// the interior grid states, fields eliminated through the optimal recovery.
class ReducedEnergy {
 public:
  ReducedEnergy(const FixedStateGeometry& geo, const RepresentingFunction& f, double theta,
                std::vector<Element> base_nodes, std::vector<double> grid)
      : geo_(geo), f_(f), theta_(theta), base_(std::move(base_nodes)), grid_(std::move(grid)) {
    log_mean_ = f_.kind() == RepresentingFunction::Kind::logarithmic && theta_ == 1.0;
  }

  int K() const { return static_cast<int>(base_.size()) - 1; }
  int m() const { return geo_.tangent_dim(); }
  const Element& base_state(int k) const { return base_[k]; }

  Element node_state(const std::vector<RVec>& c, int k) const {
    if (k == 0 || k == K()) return base_[k];
    return base_[k] + geo_.from_coords(c[k - 1]);
  }

  double min_interior_eig(const std::vector<RVec>& c) const {
    Element one = Element::identity(geo_.xi().algebra());
    double me = std::numeric_limits<double>::infinity();
    for (int k = 1; k < K(); ++k) {
      Element s = node_state(c, k) + (one - geo_.support());
      me = std::min(me, s.min_eigenvalue(1e-7));
    }
    return me;
  }

  double energy(const std::vector<RVec>& c) const {
    double total = 0.0;
    for (int k = 0; k < K(); ++k) {
      Element s0 = node_state(c, k), s1 = node_state(c, k + 1);
      double hk = grid_[k + 1] - grid_[k];
      Density sigma = Density::make_subnormalized((0.5 * (s0 + s1)).symmetrized(), 1e-8);
      MetricOperator metric(geo_, sigma, f_, theta_);
      RVec x = geo_.coords((1.0 / hk) * (s1 - s0));
      total += 0.5 * hk * metric.solve(x).dot(x);
    }
    return total;
  }

  double energy_grad(const std::vector<RVec>& c, std::vector<RVec>& grad,
                     const QuadratureOptions& inner_quad) const {
    int KK = K(), mm = m();
    std::vector<RVec> p(KK);
    std::vector<RVec> L(KK);
    double total = 0.0;
    for (int k = 0; k < KK; ++k) {
      Element s0 = node_state(c, k), s1 = node_state(c, k + 1);
      double hk = grid_[k + 1] - grid_[k];
      Density sigma = Density::make_subnormalized((0.5 * (s0 + s1)).symmetrized(), 1e-8);
      MetricOperator metric(geo_, sigma, f_, theta_);
      RVec x = geo_.coords((1.0 / hk) * (s1 - s0));
      p[k] = metric.solve(x);
      total += 0.5 * hk * p[k].dot(x);
      if (log_mean_) {
        LambdaContext ctx(geo_, sigma, inner_quad);
        Element w = metric.theta_field(x);
        L[k] = geo_.coords(ctx.lambda_star(w, w));
      } else {
        // d/d sigma of <M^theta(q), q> by central differences per direction
        Element q = geo_.gradient().apply(geo_.from_coords(p[k]));
        L[k] = RVec::Zero(mm);
        double eps = 1e-6 * std::max(1.0, sigma.element().norm_op());
        const auto& bm = geo_.gradient().bimodule();
        for (int i = 0; i < mm; ++i) {
          RVec e = RVec::Zero(mm);
          e[i] = 1.0;
          Element dir = geo_.from_coords(e);
          Element sp = (sigma.element() + eps * dir).symmetrized();
          Element sm = (sigma.element() - eps * dir).symmetrized();
          Superoperator Mp = mult_operator(bm, sp, sp, f_, theta_, geo_.tol());
          Superoperator Mm = mult_operator(bm, sm, sm, f_, theta_, geo_.tol());
          double fp = std::real(inner(Mp.apply(q), q));
          double fm = std::real(inner(Mm.apply(q), q));
          L[k][i] = (fp - fm) / (2.0 * eps);
        }
      }
    }
    grad.assign(std::max(KK - 1, 0), RVec::Zero(mm));
    for (int node = 1; node < KK; ++node) {
      double h_prev = grid_[node] - grid_[node - 1];
      double h_next = grid_[node + 1] - grid_[node];
      grad[node - 1] = p[node - 1] - p[node] - 0.25 * (h_prev * L[node - 1] + h_next * L[node]);
    }
    return total;
  }

 private:
  const FixedStateGeometry& geo_;
  RepresentingFunction f_;
  double theta_;
  std::vector<Element> base_;
  std::vector<double> grid_;
  bool log_mean_ = false;
};

std::vector<Element> base_nodes(const FixedStateGeometry& geo, const Density& rho0,
                                const Density& rho1, int K, double floor0) {
  std::vector<Element> base(K + 1);
  for (int k = 0; k <= K; ++k) {
    double t = static_cast<double>(k) / K;
    Element lin = (1.0 - t) * rho0.element() + t * rho1.element();
    // endpoints may touch the boundary of the face; interior nodes are floored
    if (k > 0 && k < K) lin = (1.0 - floor0) * lin + floor0 * geo.xi().element();
    base[k] = lin.symmetrized();
  }
  return base;
}

SolveOutput solve_fixed_grid(const FixedStateGeometry& geo, const RepresentingFunction& f,
                             double theta, const Density& rho0, const Density& rho1, int K,
                             const TransportOptions& opts, std::vector<RVec> init) {
  std::vector<double> grid(K + 1);
  for (int k = 0; k <= K; ++k) grid[k] = static_cast<double>(k) / K;
  ReducedEnergy red(geo, f, theta, base_nodes(geo, rho0, rho1, K, opts.optimizer.floor0), grid);
  int m = red.m();

  std::vector<RVec> c = std::move(init);
  if (static_cast<int>(c.size()) != K - 1) c.assign(std::max(K - 1, 0), RVec::Zero(m));

  QuadratureOptions inner_quad;
  inner_quad.nodes = opts.inner_quad_nodes;
  inner_quad.max_nodes = opts.inner_quad_nodes;
  inner_quad.strict = false;
  if (opts.optimizer.grad_tol > 0.0) {
    // gradient-norm convergence needs the descent direction itself accurate
    inner_quad.nodes = std::max(opts.inner_quad_nodes, 200);
    inner_quad.max_nodes = 4 * inner_quad.nodes;
    inner_quad.rel_tol = 1e-11;
  }

  SolveOutput out;
  if (K <= 1 || m == 0) {
    out.energy = red.energy(c);
    out.converged = true;
    out.node_coords = c;
    return out;
  }

  Element one = Element::identity(geo.xi().algebra());
  double xi_floor = (geo.xi().element() + (one - geo.support())).min_eigenvalue(1e-7);
  double barrier = opts.optimizer.barrier * xi_floor;
  double floor_delta = opts.optimizer.floor0;

  auto apply_floor = [&](std::vector<RVec>& cc) {
    bool used = false;
    for (int k = 1; k < K; ++k) {
      Element s = red.node_state(cc, k);
      double me = (s + (one - geo.support())).min_eigenvalue(1e-7);
      if (me < barrier) {
        Element floored = (1.0 - floor_delta) * s + floor_delta * geo.xi().element();
        cc[k - 1] = geo.coords(floored - red.base_state(k));
        used = true;
      }
    }
    if (used) floor_delta = std::max(floor_delta * opts.optimizer.floor_shrink, 1e-12);
    return used;
  };

  std::vector<RVec> grad, prev_c, prev_grad;
  double e = red.energy_grad(c, grad, inner_quad);
  out.history.push_back(e);
  double step = 0.5;
  int stall = 0;
  for (int iter = 0; iter < opts.optimizer.max_iter; ++iter) {
    double gn2 = 0.0;
    for (const auto& gk : grad) gn2 += gk.squaredNorm();
    out.grad_norm = std::sqrt(gn2);
    if (out.grad_norm <= 1e-13 * (1.0 + std::abs(e)) ||
        (opts.optimizer.grad_tol > 0.0 && out.grad_norm <= opts.optimizer.grad_tol)) {
      out.converged = true;
      break;
    }
    // Barzilai-Borwein step seed, safeguarded by monotone backtracking
    if (!prev_c.empty()) {
      double sy = 0.0, yy = 0.0;
      for (int k = 0; k < K - 1; ++k) {
        RVec sk = c[k] - prev_c[k];
        RVec yk = grad[k] - prev_grad[k];
        sy += sk.dot(yk);
        yy += yk.squaredNorm();
      }
      if (sy > 0.0 && yy > 0.0) step = std::clamp(sy / yy, 1e-6, 64.0);
    }
    bool accepted = false;
    double e_new = e;
    std::vector<RVec> c_new;
    for (int ls = 0; ls < 40; ++ls) {
      c_new = c;
      for (int k = 0; k < K - 1; ++k) c_new[k] -= step * grad[k];
      if (red.min_interior_eig(c_new) < barrier) {
        apply_floor(c_new);
        if (red.min_interior_eig(c_new) <= 0.0) {
          step *= 0.5;
          continue;
        }
      }
      e_new = red.energy(c_new);
      if (e_new <= e - opts.optimizer.armijo * step * gn2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = out.grad_norm <= 1e-6 * (1.0 + std::abs(e));
      break;
    }
    double rel_dec = (e - e_new) / std::max(1e-300, std::abs(e));
    prev_c = std::move(c);
    prev_grad = grad;
    c = std::move(c_new);
    e = red.energy_grad(c, grad, inner_quad);
    out.history.push_back(e);
    out.iterations = iter + 1;
    if (rel_dec < opts.optimizer.rel_decrease) {
      double gn2_now = 0.0;
      for (const auto& gk : grad) gn2_now += gk.squaredNorm();
      out.grad_norm = std::sqrt(gn2_now);
      if (opts.optimizer.grad_tol <= 0.0 || out.grad_norm <= opts.optimizer.grad_tol) {
        out.converged = true;
        break;
      }
      // energy has stagnated but the gradient target is unmet: give the
      // polish a bounded budget
      if (++stall >= 50) break;
    } else {
      stall = 0;
    }
  }
  out.energy = e;
  out.node_coords = c;
  return out;
}

DiscretePath assemble_path(const FixedStateGeometry& geo, const RepresentingFunction& f,
                           double theta, const Density& rho0, const Density& rho1, int K,
                           const std::vector<RVec>& coords, const TransportOptions& opts,
                           const QuantumGradient& g) {
  DiscretePath path;
  path.gradient = &g;
  path.grid.resize(K + 1);
  for (int k = 0; k <= K; ++k) path.grid[k] = static_cast<double>(k) / K;
  auto base = base_nodes(geo, rho0, rho1, K, opts.optimizer.floor0);
  for (int k = 0; k <= K; ++k) {
    Element s = base[k];
    if (k > 0 && k < K) s = s + geo.from_coords(coords[k - 1]);
    path.states.push_back(Density::make(s.symmetrized(), 1e-8));
  }
  for (int k = 0; k < K; ++k) {
    Element s0 = path.states[k].element(), s1 = path.states[k + 1].element();
    Density sigma = Density::make_subnormalized((0.5 * (s0 + s1)).symmetrized(), 1e-8);
    MetricOperator metric(geo, sigma, f, theta);
    RVec x = geo.coords((1.0 / path.h(k)) * (s1 - s0));
    path.fields.push_back(metric.theta_field(x));
  }
  return path;
}

}  // namespace

TransportResult transport_distance(const QuantumGradient& g, const HeatData& hd,
                                   const RepresentingFunction& f, double theta,
                                   const Density& rho0, const Density& rho1, int K,
                                   const TransportOptions& opts, const Tolerances& tol) {
  require(K >= 2, ErrorCode::config, "grid size K must be >= 2");
  require(f.symmetric(), ErrorCode::config,
          "transport_distance requires a symmetric representing function");
  TransportResult res;
  Density h0 = hd.fixed_part(rho0);
  Density h1 = hd.fixed_part(rho1);
  if ((h0.element() - h1.element()).norm_tau() > tol.fixed_part_mismatch) {
    res.infinite = true;
    res.status = TransportStatus::infeasible;
    res.distance = std::numeric_limits<double>::infinity();
    return res;
  }
  if ((rho0.element() - rho1.element()).norm_tau() <=
      1e-14 * (1.0 + rho0.element().norm_tau())) {
    res.distance = 0.0;
    res.status = TransportStatus::converged;
    res.path.gradient = &g;
    res.path.grid = {0.0, 1.0};
    res.path.states = {rho0, rho1};
    res.path.fields = {Element::zero(g.target())};
    res.per_grid.emplace_back(K, 0.0);
    return res;
  }
  FixedStateGeometry geo(g, hd, h0, tol);

  int levels = std::max(0, opts.optimizer.richardson_levels);
  int restarts = std::max(1, opts.optimizer.restarts);
  std::vector<RVec> warm;
  int Kc = K;
  bool all_converged = true;
  double opt_gap = 0.0;
  for (int lvl = 0; lvl <= levels; ++lvl, Kc *= 2) {
    SolveOutput best;
    bool have = false;
    for (int r = 0; r < restarts; ++r) {
      std::vector<RVec> init = warm;
      if (r > 0) {
        Rng rng(opts.seed ^ (0x51ed2700ULL + 131 * lvl + r));
        init.assign(Kc - 1, RVec::Zero(geo.tangent_dim()));
        for (auto& v : init)
          for (int i = 0; i < v.size(); ++i) v[i] = 0.02 * rng.normal();
      }
      SolveOutput sol = solve_fixed_grid(geo, f, theta, rho0, rho1, Kc, opts, init);
      res.restart_energies.push_back(sol.energy);
      if (!have || sol.energy < best.energy) {
        best = std::move(sol);
        have = true;
      }
    }
    all_converged = all_converged && best.converged;
    res.iterations += best.iterations;
    res.per_grid.emplace_back(Kc, std::sqrt(std::max(0.0, 2.0 * best.energy)));
    res.energy_history = best.history;
    if (lvl == levels) {
      res.path = assemble_path(geo, f, theta, rho0, rho1, Kc, best.node_coords, opts, g);
      opt_gap = best.grad_norm;
    } else {
      warm.assign(2 * Kc - 1, RVec::Zero(geo.tangent_dim()));
      auto coord_at = [&](int k) -> RVec {
        if (k <= 0 || k >= Kc) return RVec::Zero(geo.tangent_dim());
        return best.node_coords[k - 1];
      };
      for (int j = 1; j < 2 * Kc; ++j) {
        double pos = j / 2.0;
        int k0 = static_cast<int>(std::floor(pos));
        double fr = pos - k0;
        warm[j - 1] = (1.0 - fr) * coord_at(k0) + fr * coord_at(std::min(k0 + 1, Kc));
      }
    }
  }
  double W = res.per_grid.back().second;
  double refine_term = 0.0;
  if (res.per_grid.size() >= 2) {
    double Wp = res.per_grid[res.per_grid.size() - 2].second;
    refine_term = std::abs(W - Wp);
    W = W + (W - Wp) / 3.0;  // midpoint scheme: O(h^2) leading error
  }
  res.distance = W;
  res.gap = refine_term + opt_gap / std::max(W, 1e-8) + 1e-10;
  res.status = all_converged ? TransportStatus::converged : TransportStatus::max_iter;
  return res;
}

DiscretePath reparametrize_constant_speed(const DiscretePath& path, const RepresentingFunction& f,
                                          double theta, const HeatData& hd,
                                          const Tolerances& tol) {
  auto sp = path_speeds(path, f, theta, EpsSchedule(), tol);
  int K = path.edges();
  std::vector<double> cum(K + 1, 0.0);
  for (int k = 0; k < K; ++k) cum[k + 1] = cum[k] + path.h(k) * sp[k];
  double L = cum[K];
  require(L > 0.0 && std::isfinite(L), ErrorCode::domain,
          "cannot reparametrize a zero-length or infinite-length path");
  double a = path.grid.front(), b = path.grid.back();

  DiscretePath out;
  out.gradient = path.gradient;
  out.grid.resize(K + 1);
  out.states.resize(K + 1);
  for (int j = 0; j <= K; ++j) {
    out.grid[j] = a + (b - a) * static_cast<double>(j) / K;
    double target = L * static_cast<double>(j) / K;
    int k = 0;
    while (k < K - 1 && cum[k + 1] < target) ++k;
    double span = cum[k + 1] - cum[k];
    double fr = span > 0.0 ? (target - cum[k]) / span : 0.0;
    fr = std::clamp(fr, 0.0, 1.0);
    Element s = (1.0 - fr) * path.states[k].element() + fr * path.states[k + 1].element();
    out.states[j] = Density::make(s.symmetrized(), 1e-8);
  }
  Density xi = hd.fixed_part(out.states[0]);
  FixedStateGeometry geo(*path.gradient, hd, xi, tol);
  for (int j = 0; j < K; ++j) {
    Element s0 = out.states[j].element(), s1 = out.states[j + 1].element();
    Density sigma = Density::make_subnormalized((0.5 * (s0 + s1)).symmetrized(), 1e-8);
    MetricOperator metric(geo, sigma, f, theta);
    RVec x = geo.coords((1.0 / out.h(j)) * (s1 - s0));
    out.fields.push_back(metric.theta_field(x));
  }
  return out;
}

}  // namespace qot
