// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qot/certify.hpp"
#include "oracles/markov_scalar.hpp"

using namespace qot;

namespace {

BuiltExample qubit() { return build(ExampleSpec::matrix_dynamics_spec(2, {0.0, 1.0})); }

Density in_theta_state(const FixedStateGeometry& geo, Rng& rng, double frac) {
  RVec c(geo.tangent_dim());
  for (int i = 0; i < c.size(); ++i) c[i] = rng.normal();
  Element y = geo.from_coords(c);
  y = (1.0 / y.norm_tau()) * y;
  return Density::make(geo.xi().element() + frac * geo.ray_to_boundary(y) * y, 1e-9);
}

}  // namespace

TEST_CASE("relative entropy values and the scaling law") {
  auto m3 = AlgebraDescriptor::make({3}, {1.0}, "M3");
  Density unif = Density::make((1.0 / 3.0) * Element::identity(m3));
  CHECK(entropy(unif) == doctest::Approx(-std::log(3.0)));
  Element e11(m3);
  e11.block(0)(0, 0) = 1.0;
  CHECK(entropy(Density::make(e11)) == doctest::Approx(0.0));
  // Ent(lambda mu) = lambda Ent(mu) + ||mu|| lambda log lambda
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    Density rho = random_density(m3, rng);
    double lam = rng.uniform(0.2, 2.0);
    double lhs = entropy_element(lam * rho.element());
    double rhs = lam * entropy(rho) + 1.0 * lam * std::log(lam);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("fixed-state geometry decomposition") {
  auto ex = qubit();
  Rng rng(2);
  Density base = random_density(ex.algebra, rng);
  Density xi = ex.heat.fixed_part(base);
  FixedStateGeometry geo(ex.gradient, ex.heat, xi);
  // dephasing qubit: I = off-diagonal sa (dim 2), kernel extra = 1 (diagonals
  // minus the support direction)
  CHECK(geo.tangent_dim() == 2);
  CHECK(geo.kernel_dim() == 1);
  // tangent basis orthonormal, orthogonal to kernel and to supp
  for (int i = 0; i < geo.tangent_dim(); ++i) {
    CHECK(std::abs(geo.tangent_basis()[i].norm_tau() - 1.0) < 1e-10);
    CHECK(std::abs(std::real(inner(geo.tangent_basis()[i], geo.support()))) < 1e-10);
    for (const auto& k : geo.kernel_basis())
      CHECK(std::abs(std::real(inner(geo.tangent_basis()[i], k))) < 1e-10);
  }
  // a non-fixed state is rejected as xi
  CHECK_THROWS_AS(FixedStateGeometry(ex.gradient, ex.heat, random_density(ex.algebra, rng)),
                  Error);
}

TEST_CASE("metric operator: arithmetic mean at the trace state is Delta-like") {
  auto ex = qubit();
  Density unif = Density::make(0.5 * Element::identity(ex.algebra));
  FixedStateGeometry geo(ex.gradient, ex.heat, unif);
  auto arith = RepresentingFunction::arithmetic();
  MetricOperator metric(geo, unif, arith, 1.0);
  // M_{c 1} = c Id, so S = c Delta restricted; here c = 1/2 and Delta|I = Id
  RMat expect = 0.5 * geo.delta_tangent();
  CHECK((metric.S() - expect).cwiseAbs().maxCoeff() < 1e-10);
  // outside the relative interior is rejected
  Element e11(ex.algebra);
  e11.block(0)(0, 0) = 1.0;
  CHECK_THROWS_AS(MetricOperator(geo, Density::make(e11), arith, 1.0), Error);
}

TEST_CASE("g_mu(x,x) equals the quasi-entropy of the optimal field") {
  auto ex = qubit();
  Rng rng(3);
  Density xi = ex.heat.fixed_part(random_density(ex.algebra, rng));
  FixedStateGeometry geo(ex.gradient, ex.heat, xi);
  auto f = RepresentingFunction::logarithmic();
  for (int i = 0; i < 6; ++i) {
    Density mu = in_theta_state(geo, rng, 0.5);
    MetricOperator metric(geo, mu, f, 1.0);
    RVec x(geo.tangent_dim());
    for (int k = 0; k < x.size(); ++k) x[k] = rng.normal();
    Element w = metric.theta_field(x);
    double g = metric.metric(x, x);
    auto q = quasi_entropy_positive(ex.bimodule, mu.element(), mu.element(), w, f, 1.0);
    CHECK(q.converged);
    CHECK(g == doctest::Approx(q.value).epsilon(1e-6));
    // metric bound via spectral gaps
    double bound = HeatData(ex.gradient).spectral_gap().value() *
                   spectral_gap(mu).value() * x.squaredNorm();
    CHECK(g <= bound + 1e-8);
  }
}

TEST_CASE("Lambda forms: adjoint and derivative identities") {
  auto ex = qubit();
  Rng rng(4);
  Density xi = ex.heat.fixed_part(random_density(ex.algebra, rng));
  FixedStateGeometry geo(ex.gradient, ex.heat, xi);
  auto f = RepresentingFunction::logarithmic();
  for (int rep = 0; rep < 10; ++rep) {
    Density mu = in_theta_state(geo, rng, 0.4);
    LambdaContext ctx(geo, mu);
    Element x = geo.from_coords(RVec::Random(geo.tangent_dim()));
    // x = 0 -> 0
    CHECK(ctx.lambda(Element::zero(ex.algebra), random_element(ex.algebra, rng)).norm_tau() <
          1e-14);
    Element u = support_projection(xi) * random_element(ex.algebra, rng) * support_projection(xi);
    Element v = support_projection(xi) * random_element(ex.algebra, rng) * support_projection(xi);
    Complex lhs = inner(ctx.lambda(x, u), v);
    Complex rhs = inner(x, ctx.lambda_star(u, v));
    CHECK(std::abs(lhs - rhs) <= 1e-8 * (1.0 + std::abs(lhs)));
    // d_mu D_{mu,p}(x)(u) = -Lambda_mu(x,u) via central differences
    double eps = 5e-6;
    Element p = support_projection(xi);
    Superoperator dp = compressed_div_operator(ex.bimodule, (mu.element() + eps * x).symmetrized(),
                                               (mu.element() + eps * x).symmetrized(), p, f, 1.0);
    Superoperator dm = compressed_div_operator(ex.bimodule, (mu.element() - eps * x).symmetrized(),
                                               (mu.element() - eps * x).symmetrized(), p, f, 1.0);
    Element fd = (1.0 / (2.0 * eps)) * (dp.apply(u) - dm.apply(u));
    Element lam = ctx.lambda(x, u);
    CHECK((fd + lam).norm_tau() <= 1e-6 * (1.0 + lam.norm_tau()));
  }
}

TEST_CASE("entropy Hessian: zero direction, positivity, dissipation identity") {
  auto ex = qubit();
  Rng rng(5);
  Density xi = ex.heat.fixed_part(random_density(ex.algebra, rng));
  FixedStateGeometry geo(ex.gradient, ex.heat, xi);
  auto f = RepresentingFunction::logarithmic();
  for (int rep = 0; rep < 5; ++rep) {
    Density mu = in_theta_state(geo, rng, 0.5);
    MetricOperator metric(geo, mu, f, 1.0);
    CHECK(hessian_entropy(geo, metric, Element::zero(ex.algebra)) == doctest::Approx(0.0));
    Element x = geo.from_coords(RVec::Random(geo.tangent_dim()));
    CHECK(hessian_entropy(geo, metric, x) >= -1e-8);  // ric >= 0 for dynamical systems
  }
  // entropy dissipation: d/dt Ent(h_t mu) = -tau(Delta h_t mu log h_t mu)
  Density mu = in_theta_state(geo, rng, 0.5);
  double t0 = 0.4, dt = 1e-5;
  auto ent_at = [&](double t) {
    return entropy(Density::make(ex.heat.heat_apply(t, mu.element()).symmetrized(), 1e-9));
  };
  double fd = (ent_at(t0 + dt) - ent_at(t0 - dt)) / (2 * dt);
  Element mt = ex.heat.heat_apply(t0, mu.element()).symmetrized();
  Element p = support_projection(xi);
  Element one = Element::identity(ex.algebra);
  Element logm = p * func_calc((p * mt * p + (one - p)).symmetrized(),
                               [](double s) { return std::log(s); }) * p;
  double rhs = -std::real(trace(ex.heat.apply_delta(mt) * logm));
  CHECK(fd == doctest::Approx(rhs).epsilon(1e-5));
  // zero-mean derivative: tau(mu(t) d/dt log mu(t)) = 0 along the flow
  auto logm_at = [&](double t) {
    Element m = ex.heat.heat_apply(t, mu.element()).symmetrized();
    return Element(p * func_calc((p * m * p + (one - p)).symmetrized(),
                                 [](double s) { return std::log(s); }) * p);
  };
  Element dlog = (1.0 / (2 * dt)) * (logm_at(t0 + dt) - logm_at(t0 - dt));
  CHECK(std::abs(std::real(trace(mt * dlog))) < 1e-6);
}

TEST_CASE("chain rule: nabla log mu = D_mu nabla mu") {
  auto ex = qubit();
  Rng rng(6);
  auto f = RepresentingFunction::logarithmic();
  // strictly positive state: ambient chain rule
  Density mu = random_density(ex.algebra, rng);
  Element logmu = func_calc(mu.element(), [](double s) { return std::log(s); });
  Superoperator d = div_operator(ex.bimodule, mu.element(), mu.element(), f, 1.0);
  Element lhs = ex.gradient.apply(logmu);
  Element rhs = d.apply(ex.gradient.apply(mu.element()));
  CHECK((lhs - rhs).norm_tau() < 1e-9);
  // compressed version on a face
  Density xi = ex.heat.fixed_part(mu);
  FixedStateGeometry geo(ex.gradient, ex.heat, xi);
  Density nu = in_theta_state(geo, rng, 0.5);
  Element p = geo.support();
  Element one = Element::identity(ex.algebra);
  Element lognu =
      p * func_calc((p * nu.element() * p + (one - p)).symmetrized(),
                    [](double s) { return std::log(s); }) * p;
  Superoperator dc = compressed_div_operator(ex.bimodule, nu.element(), nu.element(), p, f, 1.0);
  CHECK((ex.gradient.apply(lognu) - dc.apply(ex.gradient.apply(nu.element()))).norm_tau() < 1e-9);
}

TEST_CASE("entropy dissipation equals the metric square of Delta mu") {
  auto ex = qubit();
  Rng rng(12);
  Density xi = ex.heat.fixed_part(random_density(ex.algebra, rng));
  FixedStateGeometry geo(ex.gradient, ex.heat, xi);
  auto f = RepresentingFunction::logarithmic();
  Density mu = in_theta_state(geo, rng, 0.5);
  double t0 = 0.3, dt = 1e-5;
  auto ent_at = [&](double t) {
    return entropy(Density::make(ex.heat.heat_apply(t, mu.element()).symmetrized(), 1e-9));
  };
  double fd = (ent_at(t0 + dt) - ent_at(t0 - dt)) / (2 * dt);
  Density mt = Density::make(ex.heat.heat_apply(t0, mu.element()).symmetrized(), 1e-9);
  MetricOperator metric(geo, mt, f, 1.0);
  RVec dmu = geo.coords(ex.heat.apply_delta(mt.element()));
  CHECK(metric.metric(dmu, dmu) == doctest::Approx(-fd).epsilon(1e-5));
}

TEST_CASE("L2 distance bound from spectral gaps") {
  auto ex = qubit();
  Rng rng(13);
  Density xi = ex.heat.fixed_part(random_density(ex.algebra, rng));
  FixedStateGeometry geo(ex.gradient, ex.heat, xi);
  auto f = RepresentingFunction::logarithmic();
  double sd = HeatData(ex.gradient).spectral_gap().value();
  double sx = spectral_gap(xi).value();
  TransportOptions topts;
  for (int i = 0; i < 3; ++i) {
    Density mu = in_theta_state(geo, rng, 0.5);
    Density eta = in_theta_state(geo, rng, 0.45);
    auto res = transport_distance(ex.gradient, ex.heat, f, 1.0, mu, eta, 8, topts);
    double hm = ex.heat.image_part(mu).norm_tau();
    Element hperp_mu = ex.heat.image_part(mu), hperp_eta = ex.heat.image_part(eta);
    for (double eps : {0.1, 0.3, 0.7, 1.0}) {
      double bound = 2.0 * std::sqrt(sd) * std::sqrt(sx) *
                     (std::sqrt(eps) * hm +
                      (1.0 / std::sqrt(eps)) *
                          ((1.0 - eps) * hperp_mu - hperp_eta).norm_tau());
      CHECK(res.distance <= bound + res.gap + 1e-8);
    }
  }
}

TEST_CASE("EVI and convexity at very negative lambda always pass") {
  auto ex = qubit();
  Rng rng(14);
  Density xi = ex.heat.fixed_part(random_density(ex.algebra, rng));
  FixedStateGeometry geo(ex.gradient, ex.heat, xi);
  auto pairs = sample_component_pairs(geo, 2, 0.5, rng);
  TransportOptions topts;
  auto evi = evi_check(ex.gradient, ex.heat, -10.0, pairs, {0.0, 0.3, 0.8}, 8, topts);
  CHECK(evi.pass);
  auto conv = geodesic_convexity_check(ex.gradient, ex.heat, -10.0, pairs, 8, topts);
  CHECK(conv.pass);
}

TEST_CASE("Bakry-Emery scan brackets the frontier") {
  Rng rng(7);
  auto ex = qubit();
  BeOptions opts;
  opts.n_states = 8;
  opts.n_test_elements = 4;
  CHECK(bakry_emery_check(ex.gradient, ex.heat, -10.0, opts, rng).pass);
  CHECK(bakry_emery_check(ex.gradient, ex.heat, 0.0, opts, rng).pass);
  auto pa = build(ExampleSpec::principal_automorphism_spec(1));
  CHECK(bakry_emery_check(pa.gradient, pa.heat, 4.0, opts, rng).pass);
  CHECK(!bakry_emery_check(pa.gradient, pa.heat, 4.5, opts, rng).pass);
}

TEST_CASE("hessian lower bound: commutator nonnegative, two-point chain oracle") {
  Rng rng(8);
  auto ex = qubit();
  Density unif = Density::make(0.5 * Element::identity(ex.algebra));
  FixedStateGeometry geo(ex.gradient, ex.heat, unif);
  HessianBoundOptions opts;
  opts.n_samples = 16;
  auto rep = hessian_lower_bound(geo, opts, rng);
  CHECK(rep.lambda_est >= -1e-8);  // ric >= 0 certified by the commutation identity
  // two-point uniform chain vs the scalar Rayleigh oracle
  RMat K(2, 2);
  K << 0.5, 0.5, 0.5, 0.5;
  RVec pi(2);
  pi << 0.5, 0.5;
  auto mk = build(ExampleSpec::markov_spec(K, pi));
  Density munif = Density::make(Element::identity(mk.algebra));
  FixedStateGeometry mgeo(mk.gradient, mk.heat, mk.heat.fixed_part(munif));
  HessianBoundOptions mopts;
  mopts.n_samples = 48;
  mopts.corner_fractions = {0.9, 0.99, 0.999};
  Rng mrng(9);
  auto mrep = hessian_lower_bound(mgeo, mopts, mrng);
  double oracle = 1e300;
  for (double p = 0.005; p < 0.999; p += 0.0025)
    oracle = std::min(oracle, markov_oracle::two_state_rayleigh(K, pi, p));
  CHECK(mrep.lambda_est == doctest::Approx(oracle).epsilon(0.01));
}

TEST_CASE("certification pipeline agrees with itself on the qubit") {
  Rng rng(10);
  auto ex = qubit();
  CertifyOptions opts;
  opts.n_fixed_states = 1;
  opts.hessian.n_samples = 10;
  opts.be.n_states = 5;
  opts.n_pairs = 2;
  opts.K = 8;
  opts.transport.optimizer.richardson_levels = 0;
  auto rep = certify_example(ex, std::nullopt, opts, rng);
  CHECK(rep.auto_lambda);
  CHECK(rep.hessian_lambda_est >= -1e-6);
  CHECK(rep.verdict);       // all four checks pass at the estimated frontier
  CHECK(rep.consistent);    // and they sit on the same side
  CHECK(rep.frontier_located);
  // a deliberately perturbed map breaks the agreement and is flagged
  Rng rng2(11);
  CMat noisy = ex.gradient.nabla();
  for (int i = 0; i < noisy.rows(); ++i)
    for (int j = 0; j < noisy.cols(); ++j)
      noisy(i, j) += 0.25 * Complex(rng2.normal(), rng2.normal());
  Provenance prov;
  prov.kind = Provenance::Kind::custom;
  BuiltExample bad = ex;
  bad.gradient = QuantumGradient::custom(ex.bimodule, noisy, prov);
  bad.heat = HeatData(bad.gradient);
  bool flagged = false;
  try {
    auto brep = certify_example(bad, std::nullopt, opts, rng2);
    flagged = !brep.consistent || !brep.verdict;
  } catch (const Error&) {
    flagged = true;  // broken structure may abort a check outright
  }
  CHECK(flagged);
}
