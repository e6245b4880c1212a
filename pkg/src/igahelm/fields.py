"""Solution fields: recombination with the lift, point evaluation, error
norms over the parameter square, and sampled-grid export.

The L2 and H1 errors integrate over the parameter square (no Jacobian
factor); the H1 norm adds the mismatch of the parametric derivatives of the
composed solutions, where the exact side uses the chain rule
d/dxi u(F) = grad(u)(F) . t_xi.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .assembly import ElementTables
from .errors import SingularGeometryError
from .geometry import DET_FLOOR
from .splines import TensorSpace, eval_basis_many

_OFF = np.arange(3)


@dataclass(frozen=True)
class SolutionField:
    """Spline coefficients beta = delta + gamma of the full solution."""

    space: TensorSpace
    beta: np.ndarray


@dataclass(frozen=True)
class ErrorReport:
    """L2 and H1 errors with the discretization they were measured on."""

    l2: float
    h1: float
    dof: tuple
    quadrature_order: int


def combine(space, lift, alpha):
    """Full solution field: beta = delta + gamma, with gamma the reshaped
    coefficient vector (inverse of the p = n*j + i vectorization)."""
    delta = lift.delta
    if delta.shape != (space.n, space.m):
        raise ValueError("lift shape does not match the space")
    alpha = np.asarray(alpha)
    if alpha.shape != (space.dimension,):
        raise ValueError(f"expected coefficient vector of length {space.dimension}")
    beta = delta + space.unvectorize(alpha)
    beta.setflags(write=False)
    return SolutionField(space=space, beta=beta)


def eval_solution(field, net, xi, eta):
    """Value, parametric gradient and physical gradient of u_h at a point.

    The physical gradient is J^{-t} times the parametric one; a singular
    Jacobian raises.
    """
    value, dxi, deta = field.space.evaluate(field.beta, xi, eta)
    jac = net.jacobian(xi, eta)  # raises SingularGeometryError when |det| < floor
    J = jac.J
    gx = (J[1, 1] * dxi - J[1, 0] * deta) / jac.det
    gy = (J[0, 0] * deta - J[0, 1] * dxi) / jac.det
    return value, (dxi, deta), (gx, gy)


def error_norms(field, case, net, quad_order=5):
    """L2 and H1 errors of the field against the case's exact solution.

    Element-wise Gauss integration over the parameter square at
    ``quad_order`` points per direction.
    """
    if case.exact_u is None or case.exact_grad is None:
        raise ValueError(
            f"case {case.name!r} carries no exact solution; error norms unsupported"
        )
    space = field.space
    tx = ElementTables(space.kv_xi, quad_order)
    ty = ElementTables(space.kv_eta, quad_order)
    pts = net.points
    beta = field.beta

    acc = np.zeros(3)  # value, d/dxi, d/deta mismatch integrals
    for l in range(ty.count):
        vy, dy, wy = ty.val[l], ty.der[l], ty.weights[l]
        fy = int(ty.first[l])
        ix = (tx.first[:, None] + _OFF)[:, :, None]
        iy = np.broadcast_to(fy + _OFF, (tx.count, 3))[:, None, :]
        Pb = pts[ix, iy]
        Bb = beta[ix, iy]

        psi = np.einsum("kqa,rb->kqrab", tx.val, vy)
        gxi = np.einsum("kqa,rb->kqrab", tx.der, vy)
        geta = np.einsum("kqa,rb->kqrab", tx.val, dy)

        XY = np.einsum("kqrab,kabc->kqrc", psi, Pb, optimize=True)
        t_xi = np.einsum("kqrab,kabc->kqrc", gxi, Pb, optimize=True)
        t_eta = np.einsum("kqrab,kabc->kqrc", geta, Pb, optimize=True)

        uh = np.einsum("kqrab,kab->kqr", psi, Bb, optimize=True)
        uh_xi = np.einsum("kqrab,kab->kqr", gxi, Bb, optimize=True)
        uh_eta = np.einsum("kqrab,kab->kqr", geta, Bb, optimize=True)

        x, y = XY[..., 0], XY[..., 1]
        u = case.exact_u(x, y)
        ux, uy = case.exact_grad(x, y)
        u_xi = ux * t_xi[..., 0] + uy * t_xi[..., 1]
        u_eta = ux * t_eta[..., 0] + uy * t_eta[..., 1]

        w = tx.weights[:, :, None] * wy[None, None, :]
        acc[0] += float(np.sum(w * (u - uh) ** 2))
        acc[1] += float(np.sum(w * (u_xi - uh_xi) ** 2))
        acc[2] += float(np.sum(w * (u_eta - uh_eta) ** 2))

    l2 = float(np.sqrt(acc[0]))
    h1 = float(np.sqrt(acc.sum()))
    return ErrorReport(
        l2=l2, h1=h1, dof=(space.n, space.m), quadrature_order=quad_order
    )


def export_grid(field, case, net, resolution, path, fmt="csv"):
    """Write a structured parametric sample grid of the solution.

    Columns: xi, eta, x, y, u_h, (u_exact, error when available), and the
    physical gradient of u_h.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if fmt not in ("csv", "vtk"):
        raise ValueError(f"unknown export format {fmt!r}")
    xs = np.linspace(0.0, 1.0, resolution)
    ys = np.linspace(0.0, 1.0, resolution)

    XY, t_xi, t_eta, det = net.jacobian_grid(xs, ys)
    if np.abs(det).min() < DET_FLOOR:
        i, j = np.unravel_index(int(np.argmin(np.abs(det))), det.shape)
        raise SingularGeometryError(xs[i], ys[j], det[i, j])

    space = field.space
    fx, vx, dx = eval_basis_many(space.kv_xi, xs)
    fy, vy, dy = eval_basis_many(space.kv_eta, ys)
    ixx = (fx[:, None] + _OFF)[:, None, :, None]
    iyy = (fy[:, None] + _OFF)[None, :, None, :]
    Bb = field.beta[ixx, iyy]
    uh = np.einsum("xa,yb,xyab->xy", vx, vy, Bb, optimize=True)
    uh_xi = np.einsum("xa,yb,xyab->xy", dx, vy, Bb, optimize=True)
    uh_eta = np.einsum("xa,yb,xyab->xy", vx, dy, Bb, optimize=True)
    # physical gradient via J^{-t}
    gx = (t_eta[..., 1] * uh_xi - t_xi[..., 1] * uh_eta) / det
    gy = (t_xi[..., 0] * uh_eta - t_eta[..., 0] * uh_xi) / det

    x, y = XY[..., 0], XY[..., 1]
    have_exact = case is not None and case.exact_u is not None
    if have_exact:
        u = np.broadcast_to(case.exact_u(x, y), uh.shape)
        err = u - uh

    if fmt == "csv":
        header = ["xi", "eta", "x", "y", "u_h"]
        if have_exact:
            header += ["u_exact", "error"]
        header += ["du_dx", "du_dy"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for j in range(resolution):
                for i in range(resolution):
                    row = [xs[i], ys[j], x[i, j], y[i, j], uh[i, j]]
                    if have_exact:
                        row += [u[i, j], err[i, j]]
                    row += [gx[i, j], gy[i, j]]
                    writer.writerow([f"{v:.17g}" for v in row])
        return

    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("igahelm solution field\n")
        fh.write("ASCII\nDATASET STRUCTURED_GRID\n")
        fh.write(f"DIMENSIONS {resolution} {resolution} 1\n")
        fh.write(f"POINTS {resolution * resolution} double\n")
        for j in range(resolution):
            for i in range(resolution):
                fh.write(f"{x[i, j]:.17g} {y[i, j]:.17g} 0\n")
        fh.write(f"POINT_DATA {resolution * resolution}\n")
        _vtk_scalars(fh, "u_h", uh, resolution)
        if have_exact:
            _vtk_scalars(fh, "u_exact", u, resolution)
            _vtk_scalars(fh, "error", err, resolution)
        fh.write("VECTORS grad_u_h double\n")
        for j in range(resolution):
            for i in range(resolution):
                fh.write(f"{gx[i, j]:.17g} {gy[i, j]:.17g} 0\n")


def _vtk_scalars(fh, name, values, resolution):
    fh.write(f"SCALARS {name} double\nLOOKUP_TABLE default\n")
    for j in range(resolution):
        for i in range(resolution):
            fh.write(f"{values[i, j]:.17g}\n")
