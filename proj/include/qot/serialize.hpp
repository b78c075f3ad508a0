// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include "qot/certify.hpp"
#include "qot/chains.hpp"

namespace qot {

using nlohmann::json;

// { "blocks": [n_1, ...], "weights": [C_1, ...], "label": str }
json algebra_to_json(const AlgebraPtr& alg);
AlgebraPtr algebra_from_json(const json& j);

// per-block row-major arrays of [re, im] pairs
json element_to_json(const Element& x);
Element element_from_json(const AlgebraPtr& alg, const json& j);

// { "kind": "identity" } | { "kind": "diagonal_embedding", ... } | { "kind": "matrix", "data": ... }
json starhom_to_json(const StarHom& h);

// gradient provenance: { "kind": "commutator", "D": element } etc.
json provenance_to_json(const QuantumGradient& g);

json example_spec_to_json(const ExampleSpec& spec);
ExampleSpec example_spec_from_json(const json& j);

struct ChainSpec {
  std::string kind = "car";  // car | corner
  int stages = 3;
  int n0 = 2;  // corner towers
  std::vector<double> nu;
};
json chain_spec_to_json(const ChainSpec& c);
ChainSpec chain_spec_from_json(const json& j);
ChainDescriptor build_chain(const ChainSpec& c, const Tolerances& tol = default_tol());

// State generators for CLI tables.
struct StateSpec {
  std::string kind = "uniform";  // uniform | random | random_component | element
  std::uint64_t seed = 0;
  double spread = 1.0;
  double frac = 0.5;  // random_component: fraction of the ray to the boundary
  json element;       // explicit blocks
  std::string label;
};
json state_spec_to_json(const StateSpec& s);
StateSpec state_spec_from_json(const json& j);
Density realize_state(const StateSpec& s, const BuiltExample& ex,
                      const Tolerances& tol = default_tol());

struct RunConfig {
  int schema = 1;
  std::optional<ExampleSpec> example;
  std::optional<ChainSpec> chain;
  std::string mean = "log";
  double alpha = 0.5;
  std::vector<double> custom_s, custom_f;  // sampled table for mean = "custom"
  bool custom_symmetric = false;
  double theta = 1.0;
  int K = 16;
  std::uint64_t seed = 0;
  OptimizerOptions optimizer;
  Tolerances tolerances;
  std::vector<StateSpec> states;
  std::vector<double> t_grid = {0.1, 0.5, 1.0, 2.0};
  std::optional<double> lambda;  // certify: fixed lambda; absent = auto
  CertifyOptions certify;
  json raw;
};

RunConfig run_config_from_json(const json& j);
json run_config_to_json(const RunConfig& c);
RepresentingFunction mean_from_config(const RunConfig& c);

// FNV-1a hash of the canonical config dump, embedded into every output file.
std::string config_hash(const json& j);
json tolerances_to_json(const Tolerances& t);

json certification_to_json(const CertificationReport& rep);
json geodesic_to_json(const TransportResult& res, const RepresentingFunction& f, double theta);
json chain_report_to_json(const ChainConvergenceReport& rep);

}  // namespace qot
