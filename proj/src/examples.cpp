// SPDX-License-Identifier: Apache-2.0
#include "qot/examples.hpp"

#include <cmath>

namespace qot {

ExampleSpec ExampleSpec::markov_spec(RMat K, RVec pi) {
  ExampleSpec s;
  s.kind = Kind::markov;
  s.kernel = std::move(K);
  s.steady_state = std::move(pi);
  return s;
}

ExampleSpec ExampleSpec::matrix_dynamics_spec(int n, std::vector<double> nu) {
  ExampleSpec s;
  s.kind = Kind::matrix_dynamics;
  s.n = n;
  s.nu = std::move(nu);
  return s;
}

ExampleSpec ExampleSpec::car_stage_spec(int stage, std::vector<double> nu) {
  ExampleSpec s;
  s.kind = Kind::car_stage;
  s.stage = stage;
  s.nu = std::move(nu);
  return s;
}

ExampleSpec ExampleSpec::principal_automorphism_spec(int N, int fermion_modes, int aux_dim) {
  ExampleSpec s;
  s.kind = Kind::principal_automorphism;
  s.summands = N;
  s.fermion_modes = fermion_modes > 0 ? fermion_modes : N;
  s.aux_dim = aux_dim;
  return s;
}

std::string ExampleSpec::kind_name() const {
  switch (kind) {
    case Kind::markov: return "markov";
    case Kind::matrix_dynamics: return "matrix_dynamics";
    case Kind::car_stage: return "car_stage";
    case Kind::principal_automorphism: return "principal_automorphism";
  }
  return "?";
}

CMat jw_annihilator(int modes, int k) {
  require(k >= 1 && k <= modes, ErrorCode::config, "mode index out of range");
  CMat sigma_minus(2, 2), z(2, 2), id2 = CMat::Identity(2, 2);
  sigma_minus << 0, 1, 0, 0;
  z << 1, 0, 0, -1;
  CMat out = CMat::Identity(1, 1);
  auto kron = [](const CMat& a, const CMat& b) {
    CMat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
  };
  for (int m = 1; m <= modes; ++m) {
    if (m < k)
      out = kron(out, z);
    else if (m == k)
      out = kron(out, sigma_minus);
    else
      out = kron(out, id2);
  }
  return out;
}

namespace {

CMat kron(const CMat& a, const CMat& b) {
  CMat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

std::vector<double> default_ladder(int n, const std::vector<double>& nu) {
  if (!nu.empty()) return nu;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = i + 1.0;  // integer ladder: spectral-gap criterion holds
  return v;
}

void check_car_relations(const std::vector<CMat>& a, const Tolerances& tol) {
  int modes = static_cast<int>(a.size());
  int d = static_cast<int>(a[0].rows());
  CMat id = CMat::Identity(d, d);
  for (int i = 0; i < modes; ++i)
    for (int j = 0; j < modes; ++j) {
      CMat anti = a[i].adjoint() * a[j] + a[j] * a[i].adjoint();
      CMat expect = (i == j) ? id : CMat::Zero(d, d);
      require((anti - expect).cwiseAbs().maxCoeff() <= tol.structure, ErrorCode::domain,
              "CAR relation a*(u) a(v) + a(v) a*(u) = <u,v> fails");
      CMat anti2 = a[i] * a[j] + a[j] * a[i];
      require(anti2.cwiseAbs().maxCoeff() <= tol.structure, ErrorCode::domain,
              "CAR relation a(u) a(v) + a(v) a(u) = 0 fails");
    }
}

BuiltExample build_matrix_dynamics(const ExampleSpec& spec, const Tolerances& tol) {
  require(spec.n >= 2, ErrorCode::config, "matrix_dynamics needs n >= 2");
  auto A = AlgebraDescriptor::make({spec.n}, {1.0}, "M" + std::to_string(spec.n));
  auto nu = default_ladder(spec.n, spec.nu);
  require(static_cast<int>(nu.size()) == spec.n, ErrorCode::config, "need n eigenvalues");
  Element D(A);
  for (int i = 0; i < spec.n; ++i) D.block(0)(i, i) = nu[i];
  BuiltExample ex;
  ex.algebra = A;
  ex.bimodule = BimoduleStructure::canonical(A);
  ex.gradient = QuantumGradient::from_commutator(ex.bimodule, D, tol);
  ex.heat = HeatData(ex.gradient, tol);
  ex.kind = "matrix_dynamics";
  ex.label = "matrix_dynamics(" + std::to_string(spec.n) + ")";
  ex.expected_ricci = 0.0;
  return ex;
}

BuiltExample build_car_stage(const ExampleSpec& spec, const Tolerances& tol) {
  require(spec.stage >= 1 && spec.stage <= 6, ErrorCode::config, "car_stage needs 1 <= j <= 6");
  int modes = spec.stage;
  int d = 1 << modes;
  auto A = AlgebraDescriptor::make({d}, {std::pow(2.0, -modes)},
                                   "CAR_" + std::to_string(modes));
  std::vector<CMat> a;
  for (int k = 1; k <= modes; ++k) a.push_back(jw_annihilator(modes, k));
  check_car_relations(a, tol);
  auto nu = default_ladder(modes, spec.nu);
  require(static_cast<int>(nu.size()) == modes, ErrorCode::config, "need one energy per mode");
  // number-operator generator: Ad(e^{itD}) realizes the Bogoliubov rotation
  // a(e_k) -> e^{-it nu_k} a(e_k) on the matrix model
  CMat Dm = CMat::Zero(d, d);
  for (int k = 0; k < modes; ++k) Dm += nu[k] * (a[k].adjoint() * a[k]);
  Element D(A, {Dm});
  BuiltExample ex;
  ex.algebra = A;
  ex.bimodule = BimoduleStructure::canonical(A);
  ex.gradient = QuantumGradient::from_commutator(ex.bimodule, D, tol);
  ex.heat = HeatData(ex.gradient, tol);
  ex.kind = "car_stage";
  ex.label = "car_stage(" + std::to_string(modes) + ")";
  ex.expected_ricci = 0.0;
  return ex;
}

BuiltExample build_principal_automorphism(const ExampleSpec& spec, const Tolerances& tol) {
  int N = spec.summands;
  int modes = std::max(spec.fermion_modes, N);
  int aux = spec.aux_dim;
  require(N >= 1 && modes >= N && aux >= 1, ErrorCode::config,
          "principal_automorphism needs N >= 1, fermion_modes >= N, aux_dim >= 1");
  int dcar = 1 << modes;
  int d = dcar * aux;
  auto A = AlgebraDescriptor::make({d}, {std::pow(2.0, -modes)},
                                   "CAR_" + std::to_string(modes) + "xM" + std::to_string(aux));
  std::vector<CMat> a;
  for (int k = 1; k <= modes; ++k) a.push_back(jw_annihilator(modes, k));
  check_car_relations(a, tol);
  // grading Gamma = Z^(x modes); principal automorphism = Ad(Gamma (x) I)
  CMat z(2, 2);
  z << 1, 0, 0, -1;
  CMat gamma_car = CMat::Identity(1, 1);
  for (int m = 0; m < modes; ++m) gamma_car = kron(gamma_car, z);
  CMat id_aux = CMat::Identity(aux, aux);
  Element grading(A, {kron(gamma_car, id_aux)});
  StarHom phi = StarHom::conjugation(A, grading);
  BimoduleStructure bm = BimoduleStructure::twisted(A, phi);

  CMat T = CMat::Zero(aux, aux);
  for (int i = 0; i < aux; ++i) T(i, i) = (i % 2 == 0) ? 1.0 : -1.0;

  std::vector<QuantumGradient> children;
  for (int nidx = 1; nidx <= N; ++nidx) {
    // Clifford generator rho(e_n) = a(e_n) + a*(e_n), tensored with T
    CMat rho = a[nidx - 1] + a[nidx - 1].adjoint();
    Element Dn(A, {kron(rho, T)});
    // D(n) D(m) + D(m) D(n) = 2 delta_nm
    children.push_back(QuantumGradient::from_twisted(bm, Dn, tol));
  }
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      Element anti = children[i].provenance().generator * children[j].provenance().generator +
                     children[j].provenance().generator * children[i].provenance().generator;
      Element expect = (i == j) ? 2.0 * Element::identity(A) : Element::zero(A);
      require((anti - expect).norm_op() <= tol.structure, ErrorCode::domain,
              "Clifford relation D(n)D(m) + D(m)D(n) = 2 delta fails");
    }

  BuiltExample ex;
  ex.algebra = A;
  ex.gradient = QuantumGradient::direct_sum(children, tol);
  ex.bimodule = ex.gradient.bimodule();
  ex.heat = HeatData(ex.gradient, tol);
  ex.kind = "principal_automorphism";
  ex.label = "principal_automorphism(N=" + std::to_string(N) + ",modes=" + std::to_string(modes) +
             ",aux=" + std::to_string(aux) + ")";
  ex.expected_ricci = 4.0;
  return ex;
}

BuiltExample build_markov(const ExampleSpec& spec, const Tolerances& tol) {
  MarkovModel m = from_markov(spec.kernel, spec.steady_state, tol);
  BuiltExample ex;
  ex.algebra = m.functions;
  ex.bimodule = m.bm;
  ex.gradient = m.gradient;
  ex.heat = HeatData(ex.gradient, tol);
  ex.kind = "markov";
  ex.label = "markov(" + std::to_string(spec.kernel.rows()) + ")";
  return ex;
}

}  // namespace

BuiltExample build(const ExampleSpec& spec, const Tolerances& tol) {
  switch (spec.kind) {
    case ExampleSpec::Kind::markov: return build_markov(spec, tol);
    case ExampleSpec::Kind::matrix_dynamics: return build_matrix_dynamics(spec, tol);
    case ExampleSpec::Kind::car_stage: return build_car_stage(spec, tol);
    case ExampleSpec::Kind::principal_automorphism: return build_principal_automorphism(spec, tol);
  }
  fail(ErrorCode::config, "unknown example kind");
}

std::vector<std::pair<std::string, std::string>> example_catalog() {
  return {
      {"markov", "kernel: row-stochastic reversible K with stationary pi > 0; builds the "
                 "discrete gradient F -> F(x) - F(y) on the edge set"},
      {"matrix_dynamics", "n: matrix size; nu: n real energies (default 1..n); nabla x = i[D,x] "
                          "with D = diag(nu) on (M_n, tr)"},
      {"car_stage", "stage: j tensor factors of M_2 with trace 2^-j tr; nu: mode energies "
                    "(default 1..j); Bogoliubov rotation generator"},
      {"principal_automorphism", "summands: N Clifford directions; fermion_modes >= N; aux_dim: "
                                 "auxiliary factor with T = diag(+-1); expected Ricci bound 4"},
  };
}

}  // namespace qot
