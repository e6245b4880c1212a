import numpy as np
import pytest

from igahelm import (
    TensorSpace,
    assemble,
    build_lift,
    combine,
    error_norms,
    eval_basis_many,
    solve,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def eval_spline_1d(kv, coeffs, t):
    """Reference pointwise evaluation of a 1D spline from its 3 active terms."""
    first, values, _ = eval_basis_many(kv, np.atleast_1d(np.asarray(t, float)))
    coeffs = np.asarray(coeffs)
    out = np.einsum("ka,ka->k", values, coeffs[first[:, None] + np.arange(3)])
    return out if np.ndim(t) else float(out[0])


def solve_pipeline(net, case, order=3, error_order=5):
    """Lift, assemble, solve and measure errors on the net's own space."""
    space = net.space()
    lift = build_lift(space, net, case.g)
    system = assemble(space, net, case, lift, order=order)
    report = solve(system)
    field = combine(space, lift, report.alpha)
    err = error_norms(field, case, net, quad_order=error_order)
    return field, err, report
