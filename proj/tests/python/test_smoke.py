# SPDX-License-Identifier: Apache-2.0
"""Smoke tests for the python bindings."""

import math

import pytest

qotlab = pytest.importorskip("qotlab")


def test_catalog_lists_all_kinds():
    kinds = {k for k, _ in qotlab.example_catalog()}
    assert kinds == {"markov", "matrix_dynamics", "car_stage", "principal_automorphism"}


def test_qubit_example_basics():
    ex = qotlab.make_example("matrix_dynamics", n=2, nu=[0.0, 1.0])
    ex.validate(seed=1)
    assert ex.dim == 4
    assert ex.blocks == [2]
    u = ex.uniform_density()
    assert math.isclose(ex.trace(u), 1.0, abs_tol=1e-12)
    assert math.isclose(ex.entropy(u), -math.log(2.0), rel_tol=1e-12)
    # heat flow damps the off-diagonal part toward the fixed state
    rho = ex.random_density(seed=3)
    fp = ex.fixed_part(rho)
    flowed = ex.heat(50.0, rho)
    assert abs(flowed[0][0, 1] - fp[0][0, 1]) < 1e-9


def test_commutation_certificate():
    ex = qotlab.make_example("principal_automorphism", summands=1)
    assert ex.expected_ricci == 4.0
    fit = ex.commutation_lambda(0)
    assert fit["certified"]
    assert abs(fit["lambda"] - 4.0) < 1e-12
    assert fit["residual"] < 1e-10


def test_distance_and_symmetry():
    ex = qotlab.make_example("matrix_dynamics", n=2, nu=[0.0, 1.0])
    a = ex.component_state(seed=1, frac=0.5)
    b = ex.component_state(seed=2, frac=0.55)
    d1 = ex.distance(a, b, K=8, refine_levels=1)
    d2 = ex.distance(b, a, K=8, refine_levels=1)
    assert d1["status"] == "converged"
    assert abs(d1["distance"] - d2["distance"]) <= 2 * (d1["gap"] + d2["gap"]) + 1e-9
    # different accessibility components are infeasible
    r1 = ex.random_density(seed=5)
    r2 = ex.random_density(seed=6)
    inf = ex.distance(r1, r2, K=8)
    assert inf["status"] == "infeasible"
    assert inf["distance"] == float("inf")


def test_markov_quasi_entropy_scalar_formula():
    ex = qotlab.make_example(
        "markov", K=[[0.5, 0.5], [0.5, 0.5]], pi=[0.5, 0.5]
    )
    ex.validate(seed=2)
    # gap of the two-point Laplacian (eigenvalues {0, 2})
    assert math.isclose(ex.spectral_gap(), 0.5, rel_tol=1e-12)


def test_hessian_bound_and_bakry_emery_agree():
    ex = qotlab.make_example("principal_automorphism", summands=1)
    est = ex.hessian_lower_bound(seed=4, n_samples=8)
    assert 3.8 <= est <= 4.2
    assert ex.bakry_emery(4.0, seed=5, n_states=6)["pass"]
    assert not ex.bakry_emery(4.5, seed=5, n_states=6)["pass"]
