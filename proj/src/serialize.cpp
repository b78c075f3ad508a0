// SPDX-License-Identifier: Apache-2.0
#include "qot/serialize.hpp"

#include <cmath>

namespace qot {

json algebra_to_json(const AlgebraPtr& alg) {
  return json{{"schema", 1},
              {"blocks", alg->block_dims()},
              {"weights", alg->trace_weights()},
              {"label", alg->label()}};
}

AlgebraPtr algebra_from_json(const json& j) {
  return AlgebraDescriptor::make(j.at("blocks").get<std::vector<int>>(),
                                 j.at("weights").get<std::vector<double>>(),
                                 j.value("label", ""));
}

json element_to_json(const Element& x) {
  json blocks = json::array();
  for (int l = 0; l < x.num_blocks(); ++l) {
    json b = json::array();
    int n = static_cast<int>(x.block(l).rows());
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj)
        b.push_back({x.block(l)(i, jj).real(), x.block(l)(i, jj).imag()});
    blocks.push_back(b);
  }
  return json{{"blocks", blocks}};
}

Element element_from_json(const AlgebraPtr& alg, const json& j) {
  const json& blocks = j.contains("blocks") ? j.at("blocks") : j;
  require(static_cast<int>(blocks.size()) == alg->num_blocks(), ErrorCode::shape_mismatch,
          "element json has wrong number of blocks");
  Element x(alg);
  for (int l = 0; l < alg->num_blocks(); ++l) {
    int n = alg->block_dims()[l];
    const json& b = blocks[l];
    require(static_cast<int>(b.size()) == n * n, ErrorCode::shape_mismatch,
            "element block has wrong size");
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) {
        const json& e = b[i * n + jj];
        x.block(l)(i, jj) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
      }
  }
  return x;
}

json starhom_to_json(const StarHom& h) {
  if (h.kind() == "identity") return json{{"kind", "identity"}};
  if (h.kind() == "diagonal_embedding" || h.kind() == "first_coordinate" ||
      h.kind() == "second_coordinate")
    return json{{"kind", h.kind()}};
  json data = json::array();
  for (int i = 0; i < h.matrix().rows(); ++i)
    for (int jj = 0; jj < h.matrix().cols(); ++jj)
      data.push_back({h.matrix()(i, jj).real(), h.matrix()(i, jj).imag()});
  return json{{"kind", "matrix"}, {"rows", h.matrix().rows()}, {"cols", h.matrix().cols()},
              {"data", data}};
}

namespace {

json provenance_node_to_json(const Provenance& p);

json provenance_children_to_json(const Provenance& p) {
  json arr = json::array();
  for (const auto& c : p.children) arr.push_back(provenance_node_to_json(c));
  return arr;
}

json provenance_node_to_json(const Provenance& p) {
  switch (p.kind) {
    case Provenance::Kind::commutator:
      return json{{"kind", "commutator"}, {"D", element_to_json(p.generator)}};
    case Provenance::Kind::twisted:
      return json{{"kind", "twisted"}, {"D", element_to_json(p.generator)}};
    case Provenance::Kind::direct_sum:
      return json{{"kind", "direct_sum"}, {"children", provenance_children_to_json(p)}};
    case Provenance::Kind::markov:
      return json{{"kind", "markov"}};
    case Provenance::Kind::custom:
      return json{{"kind", "custom"}};
  }
  return json{{"kind", "?"}};
}

}  // namespace

json provenance_to_json(const QuantumGradient& g) {
  const Provenance& p = g.provenance();
  switch (p.kind) {
    case Provenance::Kind::commutator:
      return json{{"kind", "commutator"}, {"D", element_to_json(p.generator)}};
    case Provenance::Kind::twisted:
      return json{{"kind", "twisted"},
                  {"D", element_to_json(p.generator)},
                  {"phi", starhom_to_json(g.bimodule().phi)}};
    case Provenance::Kind::direct_sum: {
      return json{{"kind", "direct_sum"}, {"children", provenance_children_to_json(p)}};
    }
    case Provenance::Kind::markov: {
      json K = json::array(), pi = json::array();
      for (int i = 0; i < p.kernel_matrix.rows(); ++i) {
        json row = json::array();
        for (int jj = 0; jj < p.kernel_matrix.cols(); ++jj) row.push_back(p.kernel_matrix(i, jj));
        K.push_back(row);
      }
      for (int i = 0; i < p.steady_state.size(); ++i) pi.push_back(p.steady_state[i]);
      return json{{"kind", "markov"}, {"K", K}, {"pi", pi}};
    }
    case Provenance::Kind::custom:
      return json{{"kind", "custom"}};
  }
  return json{{"kind", "?"}};
}

json example_spec_to_json(const ExampleSpec& spec) {
  json j{{"kind", spec.kind_name()}};
  switch (spec.kind) {
    case ExampleSpec::Kind::markov: {
      json K = json::array(), pi = json::array();
      for (int i = 0; i < spec.kernel.rows(); ++i) {
        json row = json::array();
        for (int jj = 0; jj < spec.kernel.cols(); ++jj) row.push_back(spec.kernel(i, jj));
        K.push_back(row);
      }
      for (int i = 0; i < spec.steady_state.size(); ++i) pi.push_back(spec.steady_state[i]);
      j["K"] = K;
      j["pi"] = pi;
      break;
    }
    case ExampleSpec::Kind::matrix_dynamics:
      j["n"] = spec.n;
      if (!spec.nu.empty()) j["nu"] = spec.nu;
      break;
    case ExampleSpec::Kind::car_stage:
      j["stage"] = spec.stage;
      if (!spec.nu.empty()) j["nu"] = spec.nu;
      break;
    case ExampleSpec::Kind::principal_automorphism:
      j["summands"] = spec.summands;
      j["fermion_modes"] = spec.fermion_modes;
      j["aux_dim"] = spec.aux_dim;
      break;
  }
  return j;
}

ExampleSpec example_spec_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "markov") {
    auto Kj = j.at("K");
    int n = static_cast<int>(Kj.size());
    RMat K(n, n);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) K(i, jj) = Kj[i][jj].get<double>();
    auto pij = j.at("pi");
    RVec pi(n);
    for (int i = 0; i < n; ++i) pi[i] = pij[i].get<double>();
    return ExampleSpec::markov_spec(K, pi);
  }
  if (kind == "matrix_dynamics")
    return ExampleSpec::matrix_dynamics_spec(j.value("n", 2),
                                             j.value("nu", std::vector<double>{}));
  if (kind == "car_stage")
    return ExampleSpec::car_stage_spec(j.value("stage", 1), j.value("nu", std::vector<double>{}));
  if (kind == "principal_automorphism")
    return ExampleSpec::principal_automorphism_spec(j.value("summands", 1),
                                                    j.value("fermion_modes", 0),
                                                    j.value("aux_dim", 2));
  fail(ErrorCode::config, "unknown example kind: " + kind);
}

json chain_spec_to_json(const ChainSpec& c) {
  json j{{"kind", c.kind}, {"stages", c.stages}};
  if (c.kind == "corner") j["n0"] = c.n0;
  if (!c.nu.empty()) j["nu"] = c.nu;
  return j;
}

ChainSpec chain_spec_from_json(const json& j) {
  ChainSpec c;
  c.kind = j.value("kind", "car");
  c.stages = j.value("stages", 3);
  c.n0 = j.value("n0", 2);
  c.nu = j.value("nu", std::vector<double>{});
  require(c.kind == "car" || c.kind == "corner", ErrorCode::config,
          "chain kind must be car or corner");
  return c;
}

ChainDescriptor build_chain(const ChainSpec& c, const Tolerances& tol) {
  if (c.kind == "car") return ChainDescriptor::car_tower(c.stages, c.nu, tol);
  return ChainDescriptor::corner_tower(c.n0, c.stages, c.nu, tol);
}

json state_spec_to_json(const StateSpec& s) {
  json j{{"kind", s.kind}, {"label", s.label}};
  if (s.kind == "random" || s.kind == "random_component") {
    j["seed"] = s.seed;
    j["spread"] = s.spread;
  }
  if (s.kind == "random_component") j["frac"] = s.frac;
  if (s.kind == "element") j["element"] = s.element;
  return j;
}

StateSpec state_spec_from_json(const json& j) {
  StateSpec s;
  s.kind = j.value("kind", "uniform");
  s.seed = j.value("seed", static_cast<std::uint64_t>(0));
  s.spread = j.value("spread", 1.0);
  s.frac = j.value("frac", 0.5);
  s.label = j.value("label", s.kind);
  if (j.contains("element")) s.element = j.at("element");
  return s;
}

Density realize_state(const StateSpec& s, const BuiltExample& ex, const Tolerances& tol) {
  if (s.kind == "uniform") {
    return Density::make((1.0 / ex.algebra->total_trace()) * Element::identity(ex.algebra));
  }
  if (s.kind == "random") {
    Rng rng(s.seed);
    return random_density(ex.algebra, rng, s.spread);
  }
  if (s.kind == "random_component") {
    // same accessibility component as the uniform trace state
    Density unif = Density::make((1.0 / ex.algebra->total_trace()) * Element::identity(ex.algebra));
    Density xi = ex.heat.fixed_part(unif);
    FixedStateGeometry geo(ex.gradient, ex.heat, xi, tol);
    Rng rng(s.seed);
    RVec c(geo.tangent_dim());
    for (int i = 0; i < c.size(); ++i) c[i] = rng.normal(0.0, s.spread);
    Element y = geo.from_coords(c);
    double n = y.norm_tau();
    if (n == 0.0) return xi;
    y = (1.0 / n) * y;
    double tmax = geo.ray_to_boundary(y);
    return Density::make(xi.element() + s.frac * tmax * y, 1e-9);
  }
  if (s.kind == "element") {
    return Density::make(element_from_json(ex.algebra, s.element), tol.self_adjoint);
  }
  fail(ErrorCode::config, "unknown state kind: " + s.kind);
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.raw = j;
  c.schema = j.value("schema", 1);
  require(c.schema == 1, ErrorCode::config, "unsupported schema version");
  if (j.contains("example")) c.example = example_spec_from_json(j.at("example"));
  if (j.contains("chain")) c.chain = chain_spec_from_json(j.at("chain"));
  if (j.contains("mean")) {
    const json& m = j.at("mean");
    if (m.is_string()) {
      c.mean = m.get<std::string>();
    } else {
      c.mean = m.value("kind", "log");
      c.alpha = m.value("alpha", 0.5);
      if (c.mean == "custom") {
        c.custom_s = m.at("s").get<std::vector<double>>();
        c.custom_f = m.at("f").get<std::vector<double>>();
        c.custom_symmetric = m.value("symmetric", false);
      }
    }
  }
  c.theta = j.value("theta", 1.0);
  require(c.theta > 0.0 && c.theta <= 1.0, ErrorCode::config, "theta must lie in (0,1]");
  c.K = j.value("K", 16);
  require(c.K >= 2, ErrorCode::config, "K must be >= 2");
  c.seed = j.value("seed", static_cast<std::uint64_t>(0));
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    c.optimizer.max_iter = o.value("max_iter", c.optimizer.max_iter);
    c.optimizer.rel_decrease = o.value("rel_decrease", c.optimizer.rel_decrease);
    c.optimizer.richardson_levels = o.value("richardson_levels", c.optimizer.richardson_levels);
    c.optimizer.restarts = o.value("restarts", c.optimizer.restarts);
    c.optimizer.floor0 = o.value("floor", c.optimizer.floor0);
  }
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    c.tolerances.rank = t.value("rank", c.tolerances.rank);
    c.tolerances.self_adjoint = t.value("self_adjoint", c.tolerances.self_adjoint);
    c.tolerances.structure = t.value("structure", c.tolerances.structure);
    c.tolerances.fixed_part_mismatch =
        t.value("fixed_part_mismatch", c.tolerances.fixed_part_mismatch);
    c.tolerances.mass = t.value("mass", c.tolerances.mass);
  }
  if (j.contains("states"))
    for (const auto& s : j.at("states")) c.states.push_back(state_spec_from_json(s));
  if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
  if (j.contains("lambda") && !j.at("lambda").is_string()) c.lambda = j.at("lambda").get<double>();
  if (j.contains("certify")) {
    const json& ct = j.at("certify");
    c.certify.n_fixed_states = ct.value("n_fixed_states", c.certify.n_fixed_states);
    c.certify.n_pairs = ct.value("n_pairs", c.certify.n_pairs);
    c.certify.K = ct.value("K", c.certify.K);
    c.certify.frontier_delta = ct.value("frontier_delta", c.certify.frontier_delta);
    c.certify.hessian.n_samples = ct.value("hessian_samples", c.certify.hessian.n_samples);
    c.certify.be.n_states = ct.value("be_states", c.certify.be.n_states);
  }
  c.certify.transport.optimizer = c.optimizer;
  c.certify.transport.seed = c.seed;
  return c;
}

json run_config_to_json(const RunConfig& c) {
  json j{{"schema", 1},
         {"mean", c.mean},
         {"theta", c.theta},
         {"K", c.K},
         {"seed", c.seed}};
  if (c.example) j["example"] = example_spec_to_json(*c.example);
  if (c.chain) j["chain"] = chain_spec_to_json(*c.chain);
  if (c.lambda) j["lambda"] = *c.lambda;
  json st = json::array();
  for (const auto& s : c.states) st.push_back(state_spec_to_json(s));
  if (!st.empty()) j["states"] = st;
  j["t_grid"] = c.t_grid;
  return j;
}

RepresentingFunction mean_from_config(const RunConfig& c) {
  if (c.mean == "custom")
    return RepresentingFunction::custom_table(c.custom_s, c.custom_f, c.custom_symmetric);
  return RepresentingFunction::by_name(c.mean, c.alpha);
}

std::string config_hash(const json& j) {
  std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json tolerances_to_json(const Tolerances& t) {
  return json{{"self_adjoint", t.self_adjoint},
              {"rank", t.rank},
              {"degeneracy", t.degeneracy},
              {"strict_positivity", t.strict_positivity},
              {"structure", t.structure},
              {"mass", t.mass},
              {"fixed_part_mismatch", t.fixed_part_mismatch}};
}

json certification_to_json(const CertificationReport& rep) {
  return json{
      {"schema", 1},
      {"example", rep.example},
      {"lambda_tested", rep.lambda_tested},
      {"auto", rep.auto_lambda},
      {"checks",
       {{"hessian", {{"lambda_est", rep.hessian_lambda_est}, {"samples", rep.hessian_samples}}},
        {"be",
         {{"pass", rep.be.pass}, {"worst_margin", rep.be.worst_margin}, {"samples", rep.be.samples}}},
        {"evi",
         {{"pass", rep.evi.pass},
          {"worst_margin", rep.evi.worst_margin},
          {"checks", rep.evi.checks},
          {"infeasible_pairs", rep.evi.infeasible_pairs}}},
        {"convexity",
         {{"pass", rep.convexity.pass},
          {"worst_margin", rep.convexity.worst_margin},
          {"checks", rep.convexity.checks}}}}},
      {"be_above", {{"lambda", rep.be_above.lambda}, {"pass", rep.be_above.pass}}},
      {"frontier_located", rep.frontier_located},
      {"consistent", rep.consistent},
      {"verdict", rep.verdict ? "pass" : "fail"}};
}

json geodesic_to_json(const TransportResult& res, const RepresentingFunction& f, double theta) {
  json nodes = json::array();
  for (size_t k = 0; k < res.path.states.size(); ++k) {
    RVec ev = res.path.states[k].element().all_eigenvalues(1e-7);
    json spec = json::array();
    for (int i = 0; i < ev.size(); ++i) spec.push_back(ev[i]);
    nodes.push_back({{"t", res.path.grid[k]}, {"spectrum", spec}});
  }
  json edge_energies = json::array();
  if (res.path.edges() > 0) {
    const auto& bm = res.path.gradient->bimodule();
    for (int k = 0; k < res.path.edges(); ++k) {
      Element sigma = res.path.midpoint(k).symmetrized();
      QuasiEntropyResult q =
          quasi_entropy_positive(bm, sigma, sigma, res.path.fields[k], f, theta);
      edge_energies.push_back(0.5 * res.path.h(k) *
                              (q.infinite ? std::numeric_limits<double>::infinity() : q.value));
    }
  }
  json per_grid = json::array();
  for (const auto& [K, W] : res.per_grid) per_grid.push_back({{"K", K}, {"W", W}});
  return json{{"schema", 1},
              {"distance", res.infinite ? json("inf") : json(res.distance)},
              {"gap", res.gap},
              {"status", res.status == TransportStatus::converged    ? "converged"
                         : res.status == TransportStatus::infeasible ? "infeasible"
                                                                     : "max_iter"},
              {"iterations", res.iterations},
              {"per_grid", per_grid},
              {"nodes", nodes},
              {"edge_energies", edge_energies}};
}

json chain_report_to_json(const ChainConvergenceReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"stage", r.stage},
                    {"mass0", r.mass0},
                    {"mass1", r.mass1},
                    {"distance", r.infeasible ? json("inf") : json(r.distance)},
                    {"gap", r.gap},
                    {"K", r.K},
                    {"status", r.infeasible ? "infeasible" : "ok"}});
  return json{{"schema", 1},
              {"rows", rows},
              {"nondecreasing_within_gaps", rep.nondecreasing_within_gaps}};
}

}  // namespace qot
