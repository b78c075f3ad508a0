// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qot/serialize.hpp"

using namespace qot;

TEST_CASE("algebra and element round trips") {
  auto a = AlgebraDescriptor::make({2, 3}, {1.0, 0.25}, "demo");
  json ja = algebra_to_json(a);
  auto b = algebra_from_json(ja);
  CHECK(b->same_as(*a));
  CHECK(b->label() == "demo");
  Rng rng(1);
  Element x = random_element(a, rng);
  Element y = element_from_json(b, element_to_json(x));
  CHECK((x - y).norm_tau() < 1e-14);
}

TEST_CASE("example specs round trip") {
  auto s1 = ExampleSpec::matrix_dynamics_spec(3, {1.0, 2.5, 4.0});
  auto r1 = example_spec_from_json(example_spec_to_json(s1));
  CHECK(r1.n == 3);
  CHECK(r1.nu == std::vector<double>{1.0, 2.5, 4.0});
  auto s2 = ExampleSpec::principal_automorphism_spec(2, 3, 2);
  auto r2 = example_spec_from_json(example_spec_to_json(s2));
  CHECK(r2.summands == 2);
  CHECK(r2.fermion_modes == 3);
  RMat K(2, 2);
  K << 0.5, 0.5, 0.5, 0.5;
  RVec pi(2);
  pi << 0.5, 0.5;
  auto s3 = ExampleSpec::markov_spec(K, pi);
  auto r3 = example_spec_from_json(example_spec_to_json(s3));
  CHECK((r3.kernel - K).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(example_spec_from_json(json{{"kind", "nope"}}), Error);
}

TEST_CASE("run config parsing, defaults and hashing") {
  json j = {
      {"schema", 1},
      {"example", {{"kind", "matrix_dynamics"}, {"n", 2}, {"nu", {0.0, 1.0}}}},
      {"mean", "log"},
      {"theta", 1.0},
      {"K", 12},
      {"seed", 42},
      {"optimizer", {{"richardson_levels", 2}, {"max_iter", 99}}},
      {"states", {{{"kind", "uniform"}, {"label", "u"}}}},
  };
  RunConfig c = run_config_from_json(j);
  CHECK(c.K == 12);
  CHECK(c.seed == 42);
  CHECK(c.optimizer.richardson_levels == 2);
  CHECK(c.optimizer.max_iter == 99);
  CHECK(c.states.size() == 1);
  CHECK(mean_from_config(c).kind() == RepresentingFunction::Kind::logarithmic);
  // deterministic hash
  CHECK(config_hash(run_config_to_json(c)) == config_hash(run_config_to_json(c)));
  json j2 = j;
  j2["seed"] = 43;
  CHECK(config_hash(j) != config_hash(j2));
  // invalid configs rejected
  json bad = j;
  bad["theta"] = 1.5;
  CHECK_THROWS_AS(run_config_from_json(bad), Error);
  bad = j;
  bad["schema"] = 99;
  CHECK_THROWS_AS(run_config_from_json(bad), Error);
}

TEST_CASE("state specs realize deterministically") {
  auto ex = build(ExampleSpec::matrix_dynamics_spec(2, {0.0, 1.0}));
  StateSpec s;
  s.kind = "random_component";
  s.seed = 7;
  s.frac = 0.4;
  Density d1 = realize_state(s, ex), d2 = realize_state(s, ex);
  CHECK((d1.element() - d2.element()).norm_tau() == 0.0);
  StateSpec u;
  u.kind = "uniform";
  CHECK((realize_state(u, ex).element() - 0.5 * Element::identity(ex.algebra)).norm_tau() <
        1e-14);
  StateSpec e;
  e.kind = "element";
  e.element = element_to_json(realize_state(u, ex).element());
  CHECK((realize_state(e, ex).element() - realize_state(u, ex).element()).norm_tau() < 1e-14);
}
