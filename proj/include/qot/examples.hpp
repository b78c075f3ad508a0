// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "qot/geometry.hpp"

namespace qot {

struct ExampleSpec {
  enum class Kind { markov, matrix_dynamics, car_stage, principal_automorphism };
  Kind kind = Kind::matrix_dynamics;

  // markov
  RMat kernel;
  RVec steady_state;
  // matrix_dynamics: n x n with eigenvalues nu (defaults to the ladder 1..n)
  int n = 2;
  // car_stage: j tensor factors of M_2, trace 2^{-j} tr, energies nu
  int stage = 1;
  std::vector<double> nu;
  // principal_automorphism
  int summands = 1;       // N
  int fermion_modes = 1;  // >= N
  int aux_dim = 2;        // T = diag(1,-1,...) with T^2 = I

  static ExampleSpec markov_spec(RMat K, RVec pi);
  static ExampleSpec matrix_dynamics_spec(int n, std::vector<double> nu = {});
  static ExampleSpec car_stage_spec(int stage, std::vector<double> nu = {});
  static ExampleSpec principal_automorphism_spec(int N, int fermion_modes = 0, int aux_dim = 2);
  std::string kind_name() const;
};

struct BuiltExample {
  AlgebraPtr algebra;
  BimoduleStructure bimodule;
  QuantumGradient gradient;
  HeatData heat;
  std::string label;
  std::string kind;
  std::optional<double> expected_ricci;  // 0 for commutator kinds, 4 for principal automorphism
};

BuiltExample build(const ExampleSpec& spec, const Tolerances& tol = default_tol());

// Jordan-Wigner annihilator a(e_k) on 2^modes dimensions (1-based k).
CMat jw_annihilator(int modes, int k);

// Parameter documentation for the CLI's `example list`.
std::vector<std::pair<std::string, std::string>> example_catalog();

}  // namespace qot
