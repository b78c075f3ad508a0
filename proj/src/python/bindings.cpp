// SPDX-License-Identifier: Apache-2.0
#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qot/serialize.hpp"

namespace py = pybind11;
using namespace qot;

namespace {

using BlockList = std::vector<py::array_t<std::complex<double>>>;

Element element_from_blocks(const AlgebraPtr& alg, const BlockList& blocks) {
  require(static_cast<int>(blocks.size()) == alg->num_blocks(), ErrorCode::shape_mismatch,
          "wrong number of blocks");
  Element x(alg);
  for (int l = 0; l < alg->num_blocks(); ++l) {
    auto buf = blocks[l].unchecked<2>();
    int n = alg->block_dims()[l];
    require(buf.shape(0) == n && buf.shape(1) == n, ErrorCode::shape_mismatch,
            "block shape mismatch");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) x.block(l)(i, j) = buf(i, j);
  }
  return x;
}

BlockList blocks_from_element(const Element& x) {
  BlockList out;
  for (int l = 0; l < x.num_blocks(); ++l) {
    int n = static_cast<int>(x.block(l).rows());
    py::array_t<std::complex<double>> a({n, n});
    auto buf = a.mutable_unchecked<2>();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) buf(i, j) = x.block(l)(i, j);
    out.push_back(std::move(a));
  }
  return out;
}

// A built example plus its frequently used derived data.
struct PyExample {
  BuiltExample ex;

  explicit PyExample(const std::string& spec_json) {
    ex = build(example_spec_from_json(json::parse(spec_json)));
  }
  std::string label() const { return ex.label; }
  std::string kind() const { return ex.kind; }
  int dim() const { return ex.algebra->dim(); }
  std::vector<int> blocks() const { return ex.algebra->block_dims(); }
  std::vector<double> weights() const { return ex.algebra->trace_weights(); }
  py::object expected_ricci() const {
    if (ex.expected_ricci) return py::float_(*ex.expected_ricci);
    return py::none();
  }

  void validate(std::uint64_t seed) const {
    Rng rng(seed);
    ex.bimodule.validate(rng, default_tol());
    ex.gradient.validate(rng, default_tol());
  }

  BlockList random_density(std::uint64_t seed, double spread) const {
    Rng rng(seed);
    return blocks_from_element(qot::random_density(ex.algebra, rng, spread).element());
  }
  BlockList uniform_density() const {
    return blocks_from_element(
        (1.0 / ex.algebra->total_trace()) * Element::identity(ex.algebra));
  }
  BlockList component_state(std::uint64_t seed, double frac) const {
    StateSpec s;
    s.kind = "random_component";
    s.seed = seed;
    s.frac = frac;
    return blocks_from_element(realize_state(s, ex).element());
  }

  double trace_of(const BlockList& blocks) const {
    return std::real(trace(element_from_blocks(ex.algebra, blocks)));
  }
  double entropy_of(const BlockList& rho) const {
    return entropy(Density::make(element_from_blocks(ex.algebra, rho), 1e-8));
  }
  BlockList heat(double t, const BlockList& x) const {
    return blocks_from_element(ex.heat.heat_apply(t, element_from_blocks(ex.algebra, x)));
  }
  BlockList fixed_part(const BlockList& rho) const {
    return blocks_from_element(
        ex.heat.fixed_part(Density::make(element_from_blocks(ex.algebra, rho), 1e-8)).element());
  }
  py::object spectral_gap() const {
    auto g = ex.heat.spectral_gap();
    if (g) return py::float_(*g);
    return py::none();
  }

  py::dict commutation(int component) const {
    auto fit = commutation_lambda(ex.gradient, component);
    py::dict d;
    d["lambda"] = fit.lambda;
    d["residual"] = fit.residual;
    d["certified"] = fit.certified;
    return d;
  }

  double quasi_entropy_of(const BlockList& mu, const BlockList& eta, const BlockList& w,
                          const std::string& mean, double theta) const {
    auto f = RepresentingFunction::by_name(mean);
    auto q = quasi_entropy_positive(ex.bimodule, element_from_blocks(ex.algebra, mu),
                                    element_from_blocks(ex.algebra, eta),
                                    element_from_blocks(ex.gradient.target(), w), f, theta);
    return q.value_or_inf();
  }

  py::dict distance(const BlockList& rho0, const BlockList& rho1, int K, int refine_levels,
                    std::uint64_t seed) const {
    TransportOptions topts;
    topts.optimizer.richardson_levels = refine_levels;
    topts.seed = seed;
    auto f = RepresentingFunction::logarithmic();
    auto res = transport_distance(ex.gradient, ex.heat, f, 1.0,
                                  Density::make(element_from_blocks(ex.algebra, rho0), 1e-8),
                                  Density::make(element_from_blocks(ex.algebra, rho1), 1e-8), K,
                                  topts);
    py::dict d;
    d["distance"] = res.value_or_inf();
    d["gap"] = res.gap;
    d["status"] = res.status == TransportStatus::converged    ? "converged"
                  : res.status == TransportStatus::infeasible ? "infeasible"
                                                              : "max_iter";
    d["iterations"] = res.iterations;
    py::list per_grid;
    for (auto& [k, w] : res.per_grid) per_grid.append(py::make_tuple(k, w));
    d["per_grid"] = per_grid;
    return d;
  }

  double hessian_bound(std::uint64_t seed, int n_samples) const {
    Rng rng(seed);
    Density unif = Density::make((1.0 / ex.algebra->total_trace()) * Element::identity(ex.algebra));
    FixedStateGeometry geo(ex.gradient, ex.heat, ex.heat.fixed_part(unif));
    HessianBoundOptions opts;
    opts.n_samples = n_samples;
    return hessian_lower_bound(geo, opts, rng).lambda_est;
  }

  py::dict bakry_emery(double lambda, std::uint64_t seed, int n_states) const {
    Rng rng(seed);
    BeOptions opts;
    opts.n_states = n_states;
    auto rep = bakry_emery_check(ex.gradient, ex.heat, lambda, opts, rng);
    py::dict d;
    d["lambda"] = rep.lambda;
    d["pass"] = rep.pass;
    d["worst_margin"] = rep.worst_margin;
    d["samples"] = rep.samples;
    return d;
  }
};

}  // namespace

PYBIND11_MODULE(_qot, m) {
  m.doc() = "quantum optimal transport laboratory (C++ core)";

  py::register_exception<Error>(m, "QotError");

  m.def("example_catalog", &example_catalog, "example kinds with parameter docs");

  py::class_<PyExample>(m, "Example")
      .def(py::init<const std::string&>(), py::arg("spec_json"),
           "build an example from a json spec, e.g. {\"kind\": \"matrix_dynamics\", \"n\": 2}")
      .def_property_readonly("label", &PyExample::label)
      .def_property_readonly("kind", &PyExample::kind)
      .def_property_readonly("dim", &PyExample::dim)
      .def_property_readonly("blocks", &PyExample::blocks)
      .def_property_readonly("weights", &PyExample::weights)
      .def_property_readonly("expected_ricci", &PyExample::expected_ricci)
      .def("validate", &PyExample::validate, py::arg("seed") = 0)
      .def("random_density", &PyExample::random_density, py::arg("seed") = 0,
           py::arg("spread") = 1.0)
      .def("uniform_density", &PyExample::uniform_density)
      .def("component_state", &PyExample::component_state, py::arg("seed") = 0,
           py::arg("frac") = 0.5)
      .def("trace", &PyExample::trace_of, py::arg("x"))
      .def("entropy", &PyExample::entropy_of, py::arg("rho"))
      .def("heat", &PyExample::heat, py::arg("t"), py::arg("x"))
      .def("fixed_part", &PyExample::fixed_part, py::arg("rho"))
      .def("spectral_gap", &PyExample::spectral_gap)
      .def("commutation_lambda", &PyExample::commutation, py::arg("component") = 0)
      .def("quasi_entropy", &PyExample::quasi_entropy_of, py::arg("mu"), py::arg("eta"),
           py::arg("w"), py::arg("mean") = "log", py::arg("theta") = 1.0)
      .def("distance", &PyExample::distance, py::arg("rho0"), py::arg("rho1"), py::arg("K") = 8,
           py::arg("refine_levels") = 1, py::arg("seed") = 0)
      .def("hessian_lower_bound", &PyExample::hessian_bound, py::arg("seed") = 0,
           py::arg("n_samples") = 16)
      .def("bakry_emery", &PyExample::bakry_emery, py::arg("lambda"), py::arg("seed") = 0,
           py::arg("n_states") = 8);
}
