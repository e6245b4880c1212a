"""Dirichlet lift: a spline whose boundary rows interpolate g at the images
of the Greville abscissas.

The lift coefficients delta are zero on the interior grid; each boundary row
or column solves a banded collocation system (bandwidth 2), one factorization
per direction with two right-hand sides.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InterpolationError
from .splines import eval_basis_many, greville_collocation

#: collocation residual bound; exceeding it means the (provably nonsingular)
#: interpolation failed, which is treated as an internal invariant violation
RESIDUAL_TOL = 1e-10

#: the corner coefficients are obtained twice (once per direction) and must agree
CORNER_TOL = 1e-9


@dataclass(frozen=True)
class LiftCoefficients:
    """Coefficient grid of the boundary lift; interior entries are zero."""

    delta: np.ndarray


def build_lift(space, net, g):
    """Interpolate g at the Greville images on the four boundary curves.

    The xi-direction systems (south and north rows) determine the corner
    coefficients; the eta-direction systems are solved in full and checked
    for corner consistency before their interior entries are written.

    Args:
        space: tensor spline space (shares knot vectors with ``net``)
        net: domain map, evaluated to place the interpolation points
        g: boundary data, a vectorized callable of (x, y)

    Returns:
        LiftCoefficients over the (n, m) grid.
    """
    if space.kv_xi != net.kv_xi or space.kv_eta != net.kv_eta:
        raise ValueError("space and control net must share knot vectors")
    gx = space.kv_xi.greville()
    gy = space.kv_eta.greville()
    n, m = space.n, space.m

    south = net.eval_grid(gx, np.array([0.0]))[:, 0, :]
    north = net.eval_grid(gx, np.array([1.0]))[:, 0, :]
    west = net.eval_grid(np.array([0.0]), gy)[0, :, :]
    east = net.eval_grid(np.array([1.0]), gy)[0, :, :]

    rhs_xi = np.column_stack([g(south[:, 0], south[:, 1]), g(north[:, 0], north[:, 1])])
    sol_xi = scipy.linalg.solve_banded((2, 2), greville_collocation(space.kv_xi), rhs_xi)

    rhs_eta = np.column_stack([g(west[:, 0], west[:, 1]), g(east[:, 0], east[:, 1])])
    sol_eta = scipy.linalg.solve_banded((2, 2), greville_collocation(space.kv_eta), rhs_eta)

    _check_residual(space.kv_xi, sol_xi, rhs_xi, "xi")
    _check_residual(space.kv_eta, sol_eta, rhs_eta, "eta")

    corners = [
        (sol_xi[0, 0], sol_eta[0, 0], "south-west"),
        (sol_xi[-1, 0], sol_eta[0, 1], "south-east"),
        (sol_xi[0, 1], sol_eta[-1, 0], "north-west"),
        (sol_xi[-1, 1], sol_eta[-1, 1], "north-east"),
    ]
    for from_xi, from_eta, label in corners:
        if abs(from_xi - from_eta) > CORNER_TOL:
            raise InterpolationError(
                f"{label} corner coefficient disagrees between directions: "
                f"{from_xi!r} vs {from_eta!r}"
            )

    delta = np.zeros((n, m))
    delta[:, 0] = sol_xi[:, 0]
    delta[:, -1] = sol_xi[:, 1]
    delta[0, 1:-1] = sol_eta[1:-1, 0]
    delta[-1, 1:-1] = sol_eta[1:-1, 1]
    delta.setflags(write=False)
    return LiftCoefficients(delta=delta)


def _check_residual(kv, sol, rhs, label):
    # re-evaluate the interpolant at the Greville sites, independent of the
    # band storage used by the solve
    first, values, _ = eval_basis_many(kv, kv.greville())
    prod = np.einsum("ka,kaj->kj", values, sol[first[:, None] + np.arange(3)])
    resid = np.abs(prod - rhs).max()
    if resid > RESIDUAL_TOL:
        raise InterpolationError(
            f"{label} collocation residual {resid:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )


def eval_lift(space, coeffs, xi, eta):
    """Lift value and parametric gradient at one parameter point."""
    value, dxi, deta = space.evaluate(coeffs.delta, xi, eta)
    return value, (dxi, deta)
