# SPDX-License-Identifier: Apache-2.0
"""Quantum optimal transport laboratory: python bindings over the C++ core.

The heavy lifting (block algebras, superoperators, transport solves,
certification checks) lives in the compiled ``_qot`` module; this package
adds a couple of convenience wrappers.
"""

import json as _json

from ._qot import Example, QotError, example_catalog

__all__ = ["Example", "QotError", "example_catalog", "make_example"]
__version__ = "0.1.0"


def make_example(kind, **params):
    """Build an example from keyword parameters.

    >>> ex = make_example("matrix_dynamics", n=2, nu=[0.0, 1.0])
    >>> ex.dim
    4
    """
    spec = {"kind": kind}
    spec.update(params)
    return Example(_json.dumps(spec))
