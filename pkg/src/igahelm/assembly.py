"""Element-loop assembly of the global Galerkin system.

The bilinear form is pulled back to the parameter square: with the map
tangents J = [t_xi | t_eta] and M = (J^t J)^{-1},

    A[p_i, p_j] += sum_q w_q [ grad(psi_i)^t M grad(psi_j)
                               - k^2 psi_i psi_j ] |det J|
    b[p_i]     += sum_q w_q [ (f + k^2 u_g) psi_i
                               - grad(u_g)^t M grad(psi_i) ] |det J|

with all gradients parametric and u_g the discrete lift. Rows of basis
functions supported on the boundary are replaced by identity rows with zero
right-hand side, which pins their coefficients to zero.

Local systems are 9x9 (three active basis functions per direction). The
element loop runs one eta-row of elements at a time, fully vectorized over
the xi direction; the final scatter order is fixed, so assembled bits do not
depend on the thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse

from .errors import SingularGeometryError
from .geometry import DET_FLOOR
from .splines import eval_basis_many

_OFF = np.arange(3)


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Legendre rule on a rectangle [a, b] x [c, d]."""

    order: int
    nodes: np.ndarray  # (order**2, 2)
    weights: np.ndarray  # (order**2,)


def gauss_rule(order, a, b, c, d):
    """Tensor Gauss-Legendre rule of the given order per direction.

    An order-q rule integrates 1D polynomials of degree <= 2q - 1 exactly.
    """
    if not 2 <= order <= 10:
        raise ValueError(f"quadrature order {order} unsupported (need 2..10)")
    ref, w = np.polynomial.legendre.leggauss(order)
    xs = 0.5 * (a + b) + 0.5 * (b - a) * ref
    ys = 0.5 * (c + d) + 0.5 * (d - c) * ref
    wx = 0.5 * (b - a) * w
    wy = 0.5 * (d - c) * w
    nodes = np.stack(
        [np.repeat(xs, order), np.tile(ys, order)], axis=-1
    )
    weights = (wx[:, None] * wy[None, :]).ravel()
    return QuadratureRule(order=order, nodes=nodes, weights=weights)


class ElementTables:
    """Per-direction element quadrature tables: nodes, weights, basis data.

    Arrays are indexed by (element, node): ``val``/``der`` add a trailing
    axis of 3 for the active basis functions, ``first`` holds the index of
    the first active function per element.
    """

    def __init__(self, kv, order):
        if not 2 <= order <= 10:
            raise ValueError(f"quadrature order {order} unsupported (need 2..10)")
        ref, w = np.polynomial.legendre.leggauss(order)
        elems = kv.elements()
        E = len(elems)
        self.count = E
        self.order = order
        self.first = np.empty(E, dtype=int)
        self.nodes = np.empty((E, order))
        self.weights = np.empty((E, order))
        self.bounds = np.empty((E, 2))
        for e, (span, a, b) in enumerate(elems):
            half = 0.5 * (b - a)
            self.first[e] = span - 2
            self.nodes[e] = 0.5 * (a + b) + half * ref
            self.weights[e] = half * w
            self.bounds[e] = (a, b)
        first, val, der = eval_basis_many(kv, self.nodes.ravel())
        # Gauss nodes are strictly interior, so the active block per node is
        # the element's own; anything else would misalign the tables
        assert np.array_equal(first.reshape(E, order), self.first[:, None].repeat(order, 1))
        self.val = val.reshape(E, order, 3)
        self.der = der.reshape(E, order, 3)

    def restrict(self, k):
        """A view of the tables for the single element k."""
        sub = object.__new__(ElementTables)
        sub.count = 1
        sub.order = self.order
        sub.first = self.first[k : k + 1]
        sub.nodes = self.nodes[k : k + 1]
        sub.weights = self.weights[k : k + 1]
        sub.bounds = self.bounds[k : k + 1]
        sub.val = self.val[k : k + 1]
        sub.der = self.der[k : k + 1]
        return sub


def _row_system(tx, ty, l, points, delta, case, n):
    """Local systems for every xi-element in eta-row l.

    Returns (A, b, pidx): A is (E, 9, 9), b is (E, 9) and pidx the global
    indices of the nine active basis functions, ordered with the eta offset
    fastest.
    """
    Vx, Dx, wx, fx = tx.val, tx.der, tx.weights, tx.first
    vy, dy, wy = ty.val[l], ty.der[l], ty.weights[l]
    fy = int(ty.first[l])
    E, qx, _ = Vx.shape
    qy = vy.shape[0]

    ix = (fx[:, None] + _OFF)[:, :, None]
    iy = np.broadcast_to(fy + _OFF, (E, 3))[:, None, :]
    Pb = points[ix, iy]  # (E, 3, 3, 2)
    Db = delta[ix, iy]  # (E, 3, 3)

    psi = np.einsum("kqa,rb->kqrab", Vx, vy)
    gxi = np.einsum("kqa,rb->kqrab", Dx, vy)
    geta = np.einsum("kqa,rb->kqrab", Vx, dy)

    XY = np.einsum("kqrab,kabc->kqrc", psi, Pb, optimize=True)
    t_xi = np.einsum("kqrab,kabc->kqrc", gxi, Pb, optimize=True)
    t_eta = np.einsum("kqrab,kabc->kqrc", geta, Pb, optimize=True)
    det = t_xi[..., 0] * t_eta[..., 1] - t_eta[..., 0] * t_xi[..., 1]

    absdet = np.abs(det)
    if absdet.min() < DET_FLOOR:
        k, q, r = np.unravel_index(int(np.argmin(absdet)), det.shape)
        raise SingularGeometryError(tx.nodes[k, q], ty.nodes[l, r], det[k, q, r])

    inv_det2 = 1.0 / (det * det)
    m11 = t_xi[..., 0] ** 2 + t_xi[..., 1] ** 2
    m12 = t_xi[..., 0] * t_eta[..., 0] + t_xi[..., 1] * t_eta[..., 1]
    m22 = t_eta[..., 0] ** 2 + t_eta[..., 1] ** 2

    psi9 = psi.reshape(E, qx, qy, 9)
    G = np.stack([gxi.reshape(E, qx, qy, 9), geta.reshape(E, qx, qy, 9)], axis=-1)
    GM = np.empty_like(G)
    GM[..., 0] = (G[..., 0] * m22[..., None] - G[..., 1] * m12[..., None]) * inv_det2[..., None]
    GM[..., 1] = (G[..., 1] * m11[..., None] - G[..., 0] * m12[..., None]) * inv_det2[..., None]

    wdet = wx[:, :, None] * wy[None, None, :] * absdet
    x, y = XY[..., 0], XY[..., 1]
    k2 = np.broadcast_to(case.k_squared(x, y), det.shape)
    f = np.broadcast_to(case.forcing(x, y), det.shape)

    A = np.einsum("kqria,kqr,kqrja->kij", GM, wdet, G, optimize=True)
    A -= np.einsum("kqri,kqr,kqrj->kij", psi9, wdet * k2, psi9, optimize=True)

    ug = np.einsum("kqrab,kab->kqr", psi, Db, optimize=True)
    ug_xi = np.einsum("kqrab,kab->kqr", gxi, Db, optimize=True)
    ug_eta = np.einsum("kqrab,kab->kqr", geta, Db, optimize=True)
    gM_x = (ug_xi * m22 - ug_eta * m12) * inv_det2
    gM_y = (ug_eta * m11 - ug_xi * m12) * inv_det2

    b = np.einsum("kqr,kqri->ki", wdet * (f + k2 * ug), psi9, optimize=True)
    b -= np.einsum("kqr,kqri->ki", wdet * gM_x, G[..., 0], optimize=True)
    b -= np.einsum("kqr,kqri->ki", wdet * gM_y, G[..., 1], optimize=True)

    # global index p = n*j + i, eta offset fastest within the local block
    pidx = (n * (fy + _OFF)[None, None, :] + fx[:, None, None] + _OFF[None, :, None])
    return A, b, pidx.reshape(E, 9)


def element_system(space, net, case, lift, element, order=3):
    """Local 9x9 system and load vector of one element.

    Args:
        element: pair (k, l) of element positions (0-based, counting only
            nonzero-width spans) in the xi and eta direction
        order: Gauss points per direction

    Returns:
        (A_local, b_local, p): the 9x9 matrix, the 9-vector and the global
        indices of the nine active basis functions.
    """
    k, l = element
    tx = ElementTables(space.kv_xi, order).restrict(k)
    ty = ElementTables(space.kv_eta, order)
    A, b, pidx = _row_system(tx, ty, l, net.points, lift.delta, case, space.n)
    return A[0], b[0], pidx[0]


@dataclass(frozen=True)
class AssembledSystem:
    """Global sparse system with boundary rows replaced by identity rows."""

    matrix: scipy.sparse.csr_matrix
    rhs: np.ndarray
    interior_idx: np.ndarray
    boundary_idx: np.ndarray


def assemble(space, net, case, lift, order=3, threads=1):
    """Assemble the global system by looping over all nonzero elements.

    Boundary-supported rows are skipped during the scatter and written as
    identity rows with zero right-hand side afterwards. Results are
    bit-identical for any ``threads`` value: rows are reduced in a fixed
    order after the (optionally parallel) per-row computation.
    """
    if space.kv_xi != net.kv_xi or space.kv_eta != net.kv_eta:
        raise ValueError("space and control net must share knot vectors")
    n, m = space.n, space.m
    if lift.delta.shape != (n, m):
        raise ValueError("lift shape does not match the space")
    N = space.dimension
    tx = ElementTables(space.kv_xi, order)
    ty = ElementTables(space.kv_eta, order)
    interior = ~space.boundary_mask()

    def one_row(l):
        A, b, pidx = _row_system(tx, ty, l, net.points, lift.delta, case, n)
        E = pidx.shape[0]
        rows = np.broadcast_to(pidx[:, :, None], (E, 9, 9)).ravel()
        cols = np.broadcast_to(pidx[:, None, :], (E, 9, 9)).ravel()
        vals = A.ravel()
        keep = interior[rows]
        bidx = pidx.ravel()
        bkeep = interior[bidx]
        return rows[keep], cols[keep], vals[keep], bidx[bkeep], b.ravel()[bkeep]

    n_rows = ty.count
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_row, range(n_rows)))
    else:
        results = [one_row(l) for l in range(n_rows)]

    rows = np.concatenate([r[0] for r in results])
    cols = np.concatenate([r[1] for r in results])
    vals = np.concatenate([r[2] for r in results])

    boundary_idx = space.boundary_indices()
    rows = np.concatenate([rows, boundary_idx])
    cols = np.concatenate([cols, boundary_idx])
    vals = np.concatenate([vals, np.ones(boundary_idx.size)])

    matrix = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()
    matrix.sum_duplicates()
    matrix.sort_indices()

    rhs = np.zeros(N)
    for r in results:
        np.add.at(rhs, r[3], r[4])

    return AssembledSystem(
        matrix=matrix,
        rhs=rhs,
        interior_idx=space.interior_indices(),
        boundary_idx=boundary_idx,
    )


def save_matrix_market(system, path):
    """Dump the assembled matrix in Matrix Market coordinate format."""
    scipy.io.mmwrite(str(path), system.matrix.tocoo())
