"""Sparse direct solve of the assembled system."""

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .errors import SolverError

#: relative residual bound on the returned coefficients
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class SolveReport:
    """Solution coefficients with solve diagnostics."""

    alpha: np.ndarray
    residual_norm: float
    method: str
    factor_time: float
    solve_time: float


def solve(system):
    """Solve the assembled system by sparse LU with partial pivoting.

    The Helmholtz block can be indefinite, so a pivoted direct factorization
    is the default (and only) method. Boundary coefficients solve to zero
    through their identity rows and are pinned to exact zero afterwards.

    Raises:
        SolverError: factorization breakdown or residual above 1e-9.
    """
    A = system.matrix.tocsc()
    rhs = system.rhs
    t0 = time.perf_counter()
    try:
        lu = scipy.sparse.linalg.splu(A)
    except RuntimeError as exc:
        raise SolverError(f"sparse LU factorization failed: {exc}")
    t1 = time.perf_counter()
    alpha = lu.solve(rhs)
    t2 = time.perf_counter()
    alpha[system.boundary_idx] = 0.0

    residual = np.linalg.norm(system.matrix @ alpha - rhs)
    residual /= max(1.0, np.linalg.norm(rhs))
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise SolverError(
            f"solve residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}",
            residual=residual,
        )
    return SolveReport(
        alpha=alpha,
        residual_norm=float(residual),
        method="sparse_lu",
        factor_time=t1 - t0,
        solve_time=t2 - t1,
    )
