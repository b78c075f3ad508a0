// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qot/chains.hpp"
#include "qot/serialize.hpp"

using namespace qot;

TEST_CASE("car tower: inclusion identities and the partial-trace oracle") {
  auto chain = ChainDescriptor::car_tower(2);
  Rng rng(1);
  // a state already included from stage 1 restricts back to itself with mass 1
  Density r1 = random_density(chain.stage(0).algebra, rng);
  Density incl = Density::make(chain.include(0, 1, r1.element()), 1e-9);
  double mass = 0.0;
  Density back = restrict_state(chain, 1, 0, incl, &mass);
  CHECK(mass == doctest::Approx(1.0));
  CHECK((back.element() - r1.element()).norm_tau() < 1e-10);
  // strongly unital tower: any top-stage density has mass 1 on the substage
  Density rho = random_density(chain.stage(1).algebra, rng);
  restrict_state(chain, 1, 0, rho, &mass);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  // partial-trace-with-weights oracle: pi(rho) = ptr_2(rho)/2 on 4x4 -> 2x2
  Element proj = chain.project(1, 0, rho.element());
  const CMat& R = rho.element().block(0);
  CMat ptr2(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) ptr2(i, j) = R(2 * i, 2 * j) + R(2 * i + 1, 2 * j + 1);
  CHECK((proj.block(0) - 0.5 * ptr2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("corner tower: non-unital masses") {
  auto chain = ChainDescriptor::corner_tower(2, 2);
  Rng rng(2);
  Density rho = random_density(chain.stage(1).algebra, rng);  // M_3
  double mass = 0.0;
  Density r = restrict_state(chain, 1, 0, rho, &mass);
  CHECK(mass < 1.0);
  CHECK(mass > 0.0);
  CHECK(r.mass() == doctest::Approx(1.0).epsilon(1e-10));
  // vanishing mass on the substage is an error
  Element edge(chain.stage(1).algebra);
  edge.block(0)(2, 2) = 1.0;  // supported outside the corner
  CHECK_THROWS_AS(restrict_state(chain, 1, 0, Density::make(edge), &mass), Error);
}

TEST_CASE("path inclusion and restriction: energies") {
  auto chain = ChainDescriptor::car_tower(2);
  auto f = RepresentingFunction::logarithmic();
  Rng rng(3);
  const auto& st1 = chain.stage(0);
  HeatData hd1(st1.gradient);
  // same-component endpoints at stage 1
  Density base = random_density(st1.algebra, rng);
  Density xi = hd1.fixed_part(base);
  FixedStateGeometry geo(st1.gradient, hd1, xi);
  auto mk = [&](double frac, int seed) {
    Rng r(seed);
    RVec c(geo.tangent_dim());
    for (int i = 0; i < c.size(); ++i) c[i] = r.normal();
    Element y = geo.from_coords(c);
    y = (1.0 / y.norm_tau()) * y;
    return Density::make(xi.element() + frac * geo.ray_to_boundary(y) * y, 1e-9);
  };
  Density r0 = mk(0.5, 10), r1 = mk(0.5, 11);
  TransportOptions topts;
  auto res = transport_distance(st1.gradient, hd1, f, 1.0, r0, r1, 8, topts);
  double e1 = path_energy(res.path, f, 1.0);
  // include then restrict recovers the original path
  DiscretePath up = include_path(chain, 0, 1, res.path);
  DiscretePath down = restrict_path(chain, 1, 0, up);
  for (size_t k = 0; k < down.states.size(); ++k)
    CHECK((down.states[k].element() - res.path.states[k].element()).norm_tau() < 1e-10);
  // inclusion preserves the energy exactly
  double e2 = path_energy(up, f, 1.0);
  CHECK(e2 == doctest::Approx(e1).epsilon(1e-9));
  // restriction obeys E_j(res) <= mass^-1 E_k on top-stage paths
  const auto& st2 = chain.stage(1);
  HeatData hd2(st2.gradient);
  Density t0 = random_density(st2.algebra, rng);
  Density txi = hd2.fixed_part(t0);
  FixedStateGeometry geo2(st2.gradient, hd2, txi);
  RVec c2(geo2.tangent_dim());
  for (int i = 0; i < c2.size(); ++i) c2[i] = rng.normal();
  Element y2 = geo2.from_coords(c2);
  y2 = (1.0 / y2.norm_tau()) * y2;
  Density t1 = Density::make(txi.element() + 0.5 * geo2.ray_to_boundary(y2) * y2, 1e-9);
  Density t0i = Density::make(txi.element() - 0.3 * geo2.ray_to_boundary(-1.0 * y2) * y2, 1e-9);
  auto rtop = transport_distance(st2.gradient, hd2, f, 1.0, t0i, t1, 8, topts);
  double ek = path_energy(rtop.path, f, 1.0);
  DiscretePath restr = restrict_path(chain, 1, 0, rtop.path);
  double ej = path_energy(restr, f, 1.0);
  double mass = 0.0;
  restrict_state(chain, 1, 0, t0i, &mass);
  CHECK(ej <= ek / mass + 1e-8);
}

TEST_CASE("heat restriction commutes and entropies are monotone") {
  auto chain = ChainDescriptor::car_tower(3);
  Rng rng(4);
  Density rho = random_density(chain.stage(2).algebra, rng);
  for (int j = 0; j < 2; ++j)
    for (double t : {0.2, 1.0, 3.0})
      CHECK(heat_restriction_deviation(chain, 2, j, rho, t) < 1e-10);
  // Ent(mu_j, tau_j) <= Ent(mu_k, tau_k) on subnormalized restrictions
  double e1 = entropy_element(chain.project(2, 0, rho.element()).symmetrized());
  double e2 = entropy_element(chain.project(2, 1, rho.element()).symmetrized());
  double e3 = entropy(rho);
  CHECK(e1 <= e2 + 1e-10);
  CHECK(e2 <= e3 + 1e-10);
}

TEST_CASE("projection-gradient intertwining on included subspaces") {
  auto chain = ChainDescriptor::car_tower(2);
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    Element x1 = random_element(chain.stage(0).algebra, rng);
    Element ix = chain.include(0, 1, x1);
    // pi_j^B nabla_k iota(x) = nabla_j pi_j^A iota(x) = nabla_j x
    Element lhs = chain.project(1, 0, chain.stage(1).gradient.apply(ix), /*target_side=*/true);
    Element rhs = chain.stage(0).gradient.apply(x1);
    CHECK((lhs - rhs).norm_tau() < 1e-10 * (1.0 + rhs.norm_tau()));
  }
}

TEST_CASE("quasi-entropy coarse graining along the tower") {
  auto chain = ChainDescriptor::car_tower(2);
  auto f = RepresentingFunction::logarithmic();
  Rng rng(6);
  const auto& st2 = chain.stage(1);
  const auto& st1 = chain.stage(0);
  for (int i = 0; i < 30; ++i) {
    Element h1 = random_self_adjoint(st2.algebra, rng);
    Element mu = func_calc(h1, [](double s) { return std::exp(-s); });
    Element h2 = random_self_adjoint(st2.algebra, rng);
    Element eta = func_calc(h2, [](double s) { return std::exp(-s); });
    Element w = random_element(st2.gradient.target(), rng);
    double big = quasi_entropy_positive(st2.bimodule, mu, eta, w, f, 0.8).value;
    Element muj = chain.project(1, 0, mu).symmetrized();
    Element etaj = chain.project(1, 0, eta).symmetrized();
    Element wj = chain.project(1, 0, w, /*target_side=*/true);
    double small = quasi_entropy_positive(st1.bimodule, muj, etaj, wj, f, 0.8).value;
    CHECK(small <= big + 1e-8 * (1.0 + big));
  }
}

TEST_CASE("distance convergence: stage-1 endpoints give equal stage values") {
  auto chain = ChainDescriptor::car_tower(2);
  auto f = RepresentingFunction::logarithmic();
  Rng rng(7);
  const auto& st1 = chain.stage(0);
  HeatData hd1(st1.gradient);
  Density base = random_density(st1.algebra, rng);
  Density xi = hd1.fixed_part(base);
  FixedStateGeometry geo(st1.gradient, hd1, xi);
  auto mk = [&](int seed, double frac) {
    Rng r(seed);
    RVec c(geo.tangent_dim());
    for (int i = 0; i < c.size(); ++i) c[i] = r.normal();
    Element y = geo.from_coords(c);
    y = (1.0 / y.norm_tau()) * y;
    return Density::make(xi.element() + frac * geo.ray_to_boundary(y) * y, 1e-9);
  };
  Density r0 = mk(20, 0.5), r1 = mk(21, 0.5);
  // lift both endpoints to the top stage; all per-stage values agree within gaps
  Density R0 = Density::make(chain.include(0, 1, r0.element()), 1e-9);
  Density R1 = Density::make(chain.include(0, 1, r1.element()), 1e-9);
  TransportOptions topts;
  topts.optimizer.richardson_levels = 1;
  auto rep = distance_convergence(chain, R0, R1, f, 1.0, 8, topts);
  REQUIRE(rep.rows.size() == 2);
  CHECK(!rep.rows[0].infeasible);
  CHECK(!rep.rows[1].infeasible);
  CHECK(std::abs(rep.rows[0].distance - rep.rows[1].distance) <=
        2.0 * (rep.rows[0].gap + rep.rows[1].gap) + 1e-6);
  CHECK(rep.nondecreasing_within_gaps);
}

TEST_CASE("chain specs build from json") {
  auto spec = chain_spec_from_json(json{{"kind", "car"}, {"stages", 2}});
  auto chain = build_chain(spec);
  CHECK(chain.num_stages() == 2);
  auto corner = build_chain(chain_spec_from_json(json{{"kind", "corner"}, {"stages", 2}, {"n0", 2}}));
  CHECK(corner.num_stages() == 2);
  CHECK_THROWS_AS(chain_spec_from_json(json{{"kind", "mystery"}}), Error);
}
