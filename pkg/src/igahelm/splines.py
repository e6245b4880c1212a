"""Univariate quadratic B-spline machinery and tensor-product spaces.

Everything here is fixed at degree 2 over clamped knot vectors on [0, 1]:
three basis functions are active on any knot span, nine on any tensor
element. All values are immutable after construction and safe to share.
"""

from collections import namedtuple

import numpy as np
import scipy.linalg

from .errors import RefinementError

DEGREE = 2

#: the three active basis values/derivatives at a parameter, with the
#: index of the first active basis function
BasisEval = namedtuple("BasisEval", ["first_index", "values", "derivs"])


class KnotVector:
    """Clamped quadratic knot vector on [0, 1].

    Args:
        knots: nondecreasing sequence in [0, 1]. The values 0 and 1 must
            each appear exactly three times (clamped ends); interior knots
            may appear at most twice (a double knot drops continuity to C0).

    The basis has ``n = len(knots) - 3`` functions, ``n >= 3``.
    """

    degree = DEGREE

    def __init__(self, knots):
        kv = np.array(knots, dtype=float)
        if kv.ndim != 1 or kv.size < 6:
            raise ValueError("knot vector needs at least 6 knots")
        if np.any(np.diff(kv) < 0):
            raise ValueError("knots must be nondecreasing")
        if not (kv[0] == 0.0 and kv[2] == 0.0) or kv[3] <= 0.0:
            raise ValueError("0 must be a knot of multiplicity exactly 3")
        if not (kv[-1] == 1.0 and kv[-3] == 1.0) or kv[-4] >= 1.0:
            raise ValueError("1 must be a knot of multiplicity exactly 3")
        interior = kv[3:-3]
        if interior.size:
            vals, counts = np.unique(interior, return_counts=True)
            if np.any(counts > 2):
                bad = vals[counts > 2][0]
                raise ValueError(f"interior knot {bad!r} has multiplicity > 2")
        kv.setflags(write=False)
        self.knots = kv

    @property
    def n(self):
        """Number of basis functions."""
        return self.knots.size - 3

    def __len__(self):
        return self.knots.size

    def __eq__(self, other):
        return isinstance(other, KnotVector) and np.array_equal(self.knots, other.knots)

    def __hash__(self):
        return hash(self.knots.tobytes())

    def __repr__(self):
        return f"KnotVector({self.knots.tolist()})"

    def multiplicity(self, value):
        """Multiplicity of ``value`` in the knot sequence (exact comparison)."""
        return int(np.count_nonzero(self.knots == value))

    def find_span(self, t):
        """Index s of the half-open span [knots[s], knots[s+1]) containing t.

        At t = 1 the last nonzero-width span is returned, so the closed
        right end evaluates the final basis function to 1.
        """
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"parameter {t!r} outside [0, 1]")
        if t >= 1.0:
            return self.knots.size - 4
        return int(np.searchsorted(self.knots, t, side="right")) - 1

    def greville(self):
        """Greville abscissas, the averages of two successive interior knots."""
        kv = self.knots
        return 0.5 * (kv[1:-2] + kv[2:-1])

    def elements(self):
        """All nonzero-width spans as (span_index, a, b), in order."""
        kv = self.knots
        out = []
        for s in range(2, kv.size - 3):
            if kv[s] < kv[s + 1]:
                out.append((s, float(kv[s]), float(kv[s + 1])))
        return out


def _spans(kv, ts):
    """Vectorized find_span over an array of parameters."""
    t = np.asarray(ts, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("parameters outside [0, 1]")
    k = np.searchsorted(kv.knots, t, side="right") - 1
    return np.where(t >= 1.0, kv.knots.size - 4, k)


def eval_basis_many(kv, ts):
    """Active quadratic basis values and first derivatives at many parameters.

    Args:
        kv: a :class:`KnotVector`
        ts: array of parameters in [0, 1]

    Returns:
        (first, values, derivs): ``first`` has the index of the first of the
        three active basis functions per parameter; ``values`` and ``derivs``
        have shape ``ts.shape + (3,)``.
    """
    t = np.asarray(ts, dtype=float)
    k = _spans(kv, t)
    kn = kv.knots
    # Cox-de Boor, degree 1 first: the two active hat functions on span k.
    w = kn[k + 1] - kn[k]
    L0 = (kn[k + 1] - t) / w
    L1 = (t - kn[k]) / w
    # combine to degree 2; the denominators are positive on nonzero spans
    d0 = kn[k + 1] - kn[k - 1]
    d1 = kn[k + 2] - kn[k]
    v0 = (kn[k + 1] - t) / d0 * L0
    v1 = (t - kn[k - 1]) / d0 * L0 + (kn[k + 2] - t) / d1 * L1
    v2 = (t - kn[k]) / d1 * L1
    g0 = -2.0 * L0 / d0
    g2 = 2.0 * L1 / d1
    g1 = -(g0 + g2)
    values = np.stack([v0, v1, v2], axis=-1)
    derivs = np.stack([g0, g1, g2], axis=-1)
    return k - 2, values, derivs


def eval_basis(kv, t):
    """The three active basis values and derivatives at a single parameter."""
    first, values, derivs = eval_basis_many(kv, np.array([float(t)]))
    return BasisEval(int(first[0]), values[0], derivs[0])


def greville_collocation(kv):
    """Collocation matrix [B_i(g_k)] at the Greville abscissas, in banded form.

    Returns the (5, n) diagonal-ordered band storage accepted by
    ``scipy.linalg.solve_banded`` with (l, u) = (2, 2). The matrix is
    nonsingular (each g_k lies in the support of B_k).
    """
    g = kv.greville()
    first, values, _ = eval_basis_many(kv, g)
    n = kv.n
    ab = np.zeros((5, n))
    rows = np.arange(n)
    for a in range(3):
        cols = first + a
        ab[2 + rows - cols, cols] += values[:, a]
    return ab


def greville_interpolate(kv, values):
    """Spline coefficients interpolating ``values`` at the Greville abscissas.

    ``values`` may be 1D of length n or 2D (n, k) for several right-hand
    sides sharing the factorization.
    """
    ab = greville_collocation(kv)
    return scipy.linalg.solve_banded((2, 2), ab, np.asarray(values, dtype=float))


def _insert_once(knots, coeffs, t_new):
    """One Boehm insertion of t_new; coefficients transported along axis 0."""
    k = int(np.searchsorted(knots, t_new, side="right")) - 1
    c = coeffs
    out = np.empty((c.shape[0] + 1,) + c.shape[1:], dtype=float)
    out[: k - 1] = c[: k - 1]
    for i in (k - 1, k):
        a = (t_new - knots[i]) / (knots[i + 2] - knots[i])
        out[i] = (1.0 - a) * c[i - 1] + a * c[i]
    out[k + 1 :] = c[k:]
    return np.insert(knots, k + 1, t_new), out


def insert_knot(kv, coeffs, t_new, target_multiplicity=1, axis=0):
    """Insert t_new until it has the given multiplicity, transporting coefficients.

    The represented spline is unchanged pointwise. ``coeffs`` may be any array
    whose ``axis`` dimension equals ``kv.n`` (rows or columns of a tensor grid).

    Args:
        kv: knot vector to refine
        coeffs: coefficient array, transported along ``axis``
        t_new: knot value, strictly inside (0, 1)
        target_multiplicity: multiplicity of t_new after insertion (1 or 2)
        axis: coefficient axis tied to ``kv``

    Returns:
        (new KnotVector, new coefficient array)
    """
    if not 0.0 < t_new < 1.0:
        raise ValueError(f"new knot {t_new!r} must lie strictly inside (0, 1)")
    if target_multiplicity > 2:
        raise RefinementError(
            f"interior multiplicity {target_multiplicity} exceeds the cap of 2"
        )
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[axis] != kv.n:
        raise ValueError(
            f"coefficient axis {axis} has length {coeffs.shape[axis]}, expected {kv.n}"
        )
    have = kv.multiplicity(t_new)
    knots = kv.knots
    c = np.moveaxis(coeffs, axis, 0)
    for _ in range(target_multiplicity - have):
        knots, c = _insert_once(knots, c, t_new)
    return KnotVector(knots), np.moveaxis(c, 0, axis).copy()


class TensorSpace:
    """Tensor product of two quadratic spline spaces.

    Coefficient grids are (n, m) arrays indexed [i, j]; the vectorized
    index is p = n*j + i (the i direction runs fastest).
    """

    def __init__(self, kv_xi, kv_eta):
        self.kv_xi = kv_xi
        self.kv_eta = kv_eta
        self._boundary = None

    @property
    def n(self):
        return self.kv_xi.n

    @property
    def m(self):
        return self.kv_eta.n

    @property
    def dimension(self):
        return self.n * self.m

    def __eq__(self, other):
        return (
            isinstance(other, TensorSpace)
            and self.kv_xi == other.kv_xi
            and self.kv_eta == other.kv_eta
        )

    def __repr__(self):
        return f"TensorSpace(n={self.n}, m={self.m})"

    def index(self, i, j):
        """Vectorized index of basis (i, j)."""
        return self.n * j + i

    def boundary_mask(self):
        """Boolean mask over 0..N-1, True where the basis is nonzero on the boundary."""
        if self._boundary is None:
            mask = np.zeros((self.n, self.m), dtype=bool)
            mask[0, :] = mask[-1, :] = True
            mask[:, 0] = mask[:, -1] = True
            self._boundary = mask.ravel(order="F")
            self._boundary.setflags(write=False)
        return self._boundary

    def boundary_indices(self):
        return np.flatnonzero(self.boundary_mask())

    def interior_indices(self):
        return np.flatnonzero(~self.boundary_mask())

    def vectorize(self, grid):
        """Flatten an (n, m) coefficient grid to the p = n*j + i ordering."""
        grid = np.asarray(grid)
        if grid.shape != (self.n, self.m):
            raise ValueError(f"expected grid of shape {(self.n, self.m)}")
        return grid.ravel(order="F")

    def unvectorize(self, vec):
        """Inverse of :meth:`vectorize`."""
        vec = np.asarray(vec)
        if vec.shape != (self.dimension,):
            raise ValueError(f"expected vector of length {self.dimension}")
        return vec.reshape((self.n, self.m), order="F")

    def evaluate(self, coeffs, xi, eta):
        """Value and parametric gradient of a coefficient grid at (xi, eta).

        Only the 3x3 active block of ``coeffs`` is touched.

        Returns:
            (value, d/dxi, d/deta)
        """
        fx, vx, dx = eval_basis(self.kv_xi, xi)
        fy, vy, dy = eval_basis(self.kv_eta, eta)
        block = np.asarray(coeffs)[fx : fx + 3, fy : fy + 3]
        return (
            float(vx @ block @ vy),
            float(dx @ block @ vy),
            float(vx @ block @ dy),
        )


def uniform_knots(n):
    """Clamped uniform knot vector with n basis functions (n - 2 elements)."""
    if n < 3:
        raise ValueError("need at least 3 basis functions")
    interior = np.linspace(0.0, 1.0, n - 1)
    return KnotVector(np.concatenate(([0.0, 0.0], interior, [1.0, 1.0])))
