"""Benchmark problem definitions for -lap(u) - k^2(x,y) u = f with Dirichlet
data g, plus a generic manufactured-solution wrapper.

All coefficient callables are vectorized over numpy arrays. Cases whose data
has a point singularity clamp the distance to the singular point at R_FLOOR,
so forcing and exact-gradient evaluation always return finite values; Gauss
nodes never coincide with the (knot-located) singular pre-images, so the
clamp is a safety net only.
"""

import math
from dataclasses import dataclass, field

import numpy as np

#: distances to singular points are clamped below this when evaluating
#: forcing terms and exact gradients
R_FLOOR = 1e-12


@dataclass(frozen=True)
class ProblemCase:
    """Coefficients, data and (optional) exact solution of one benchmark.

    ``g`` is the Dirichlet boundary value; for manufactured cases it is the
    exact solution object itself. ``singular_params`` lists the parametric
    pre-images of gradient singularities.
    """

    name: str
    k_squared: callable
    forcing: callable
    g: callable
    exact_u: callable = None
    exact_grad: callable = None
    singular_params: tuple = field(default_factory=tuple)


def _zero(x, y):
    return np.zeros(np.broadcast(x, y).shape)


def poisson_oscillatory():
    """Poisson problem with exact solution sin(pi x) sin(pi y)."""

    def exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def forcing(x, y):
        return 2.0 * np.pi**2 * np.sin(np.pi * x) * np.sin(np.pi * y)

    def grad(x, y):
        return (
            np.pi * np.cos(np.pi * x) * np.sin(np.pi * y),
            np.pi * np.sin(np.pi * x) * np.cos(np.pi * y),
        )

    return ProblemCase(
        name="poisson_oscillatory",
        k_squared=_zero,
        forcing=forcing,
        g=exact,
        exact_u=exact,
        exact_grad=grad,
    )


def poisson_exp_cones(alpha, beta, gamma, anchors, net):
    """Poisson problem whose solution is a sum of three exponential cones.

    u = sum_s exp(c_s * r_s) with r_s the distance to the image of the s-th
    parametric anchor under the domain map. The gradient is discontinuous at
    the three cone tips. The forcing uses the closed form
    lap(exp(c r)) = exp(c r) (c^2 + c / r).

    Args:
        alpha, beta, gamma: cone slopes c_s
        anchors: three parametric points in (0, 1)^2
        net: domain map used to place the cone tips
    """
    anchors = tuple((float(a), float(b)) for a, b in anchors)
    if len(anchors) != 3:
        raise ValueError("poisson_exp_cones needs exactly three anchors")
    for a, b in anchors:
        if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
            raise ValueError(f"anchor ({a}, {b}) outside (0, 1)^2")
    slopes = (float(alpha), float(beta), float(gamma))
    centers = [net.eval_map(a, b) for (a, b) in anchors]

    def exact(x, y):
        total = 0.0
        for c, (x0, y0) in zip(slopes, centers):
            total = total + np.exp(c * np.hypot(x - x0, y - y0))
        return total

    def forcing(x, y):
        total = 0.0
        for c, (x0, y0) in zip(slopes, centers):
            r = np.maximum(np.hypot(x - x0, y - y0), R_FLOOR)
            total = total - np.exp(c * r) * (c * c + c / r)
        return total

    def grad(x, y):
        gx = 0.0
        gy = 0.0
        for c, (x0, y0) in zip(slopes, centers):
            r = np.maximum(np.hypot(x - x0, y - y0), R_FLOOR)
            s = c * np.exp(c * r) / r
            gx = gx + s * (x - x0)
            gy = gy + s * (y - y0)
        return gx, gy

    return ProblemCase(
        name="poisson_exp_cones",
        k_squared=_zero,
        forcing=forcing,
        g=exact,
        exact_u=exact,
        exact_grad=grad,
        singular_params=anchors,
    )


def helmholtz_variable_frequency(M, anchor, net):
    """Helmholtz problem with variable frequency and exact solution sin(1/(a+r)).

    With a = 1/(M pi) and r the distance to the image of ``anchor``, the
    exact solution u = sin(1/(a + r)) has M zeros along any ray from the
    singular point (counting the zero at r = 0) and a discontinuous gradient
    there. The triple

        coefficient 1/(a+r)^4,  f = (a-r) cos(1/(a+r)) / ((a+r)^3 r),
        u = sin(1/(a+r))

    satisfies -lap(u) - coeff*u = f identically (verified against a finite
    difference Laplacian in the tests).
    """
    if M < 1:
        raise ValueError("oscillation count M must be >= 1")
    ax, ay = float(anchor[0]), float(anchor[1])
    if not (0.0 < ax < 1.0 and 0.0 < ay < 1.0):
        raise ValueError(f"anchor ({ax}, {ay}) outside (0, 1)^2")
    a = 1.0 / (M * math.pi)
    x0, y0 = net.eval_map(ax, ay)

    def phase(x, y):
        return 1.0 / (a + np.hypot(x - x0, y - y0))

    def exact(x, y):
        return np.sin(phase(x, y))

    def k_squared(x, y):
        return phase(x, y) ** 4

    def forcing(x, y):
        r = np.maximum(np.hypot(x - x0, y - y0), R_FLOOR)
        return (a - r) * np.cos(1.0 / (a + r)) / ((a + r) ** 3 * r)

    def grad(x, y):
        r = np.maximum(np.hypot(x - x0, y - y0), R_FLOOR)
        s = -np.cos(1.0 / (a + r)) / ((a + r) ** 2 * r)
        return s * (x - x0), s * (y - y0)

    return ProblemCase(
        name=f"helmholtz_variable_frequency_M{M}",
        k_squared=k_squared,
        forcing=forcing,
        g=exact,
        exact_u=exact,
        exact_grad=grad,
        singular_params=((ax, ay),),
    )


def manufactured_case(name, exact_u, exact_grad, exact_laplacian, k_squared=None):
    """Problem with a chosen exact solution; the forcing is derived from it.

    f = -lap(u) - k^2 u, so the discretization error of the solve is directly
    measurable against ``exact_u``.
    """
    k2 = k_squared if k_squared is not None else _zero

    def forcing(x, y):
        return -exact_laplacian(x, y) - k2(x, y) * exact_u(x, y)

    return ProblemCase(
        name=name,
        k_squared=k2,
        forcing=forcing,
        g=exact_u,
        exact_u=exact_u,
        exact_grad=exact_grad,
    )


def eval_forcing_guarded(case, x, y):
    """Forcing evaluation that is finite even at singular points.

    The clamp is built into each case's forcing callable, so this is an
    alias kept for interface clarity; for singularity-free cases it is
    identical to the raw forcing everywhere.
    """
    return case.forcing(x, y)
