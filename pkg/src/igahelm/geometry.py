"""Biquadratic planar parametrizations: control nets, Jacobians, built-in
domains and control-net file I/O.

A :class:`ControlNet` realizes the map F(xi, eta) = sum_ij P_ij B_i(xi) B_j(eta)
from the unit parameter square onto a physical domain. The map must be
injective with positive Jacobian determinant; that assumption is checked by
sampling, never certified.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, NetFormatError, SingularGeometryError
from .splines import (
    KnotVector,
    TensorSpace,
    eval_basis,
    eval_basis_many,
    greville_interpolate,
    insert_knot,
    uniform_knots,
)

#: below this |det JF| the geometry is treated as singular
DET_FLOOR = 1e-12

BUILTIN_DOMAINS = ("unit_square", "stretched_annulus_patch", "puzzle_like")

NET_FORMAT_TAG = "iganet v1"


@dataclass(frozen=True)
class JacobianData:
    """Jacobian of the parametrization at one parameter point.

    J = [[x_xi, x_eta], [y_xi, y_eta]], det = det(J), and metric_inv is
    (J^t J)^{-1}, the pullback metric used in the weak form.
    """

    J: np.ndarray
    det: float
    metric_inv: np.ndarray


class ControlNet:
    """Immutable biquadratic control net over a pair of knot vectors."""

    def __init__(self, kv_xi, kv_eta, points):
        points = np.array(points, dtype=float)
        if points.shape != (kv_xi.n, kv_eta.n, 2):
            raise ValueError(
                f"control grid shape {points.shape} does not match "
                f"basis counts ({kv_xi.n}, {kv_eta.n}, 2)"
            )
        if not np.all(np.isfinite(points)):
            raise ValueError("control point coordinates must be finite")
        points.setflags(write=False)
        self.kv_xi = kv_xi
        self.kv_eta = kv_eta
        self.points = points

    @property
    def n(self):
        return self.kv_xi.n

    @property
    def m(self):
        return self.kv_eta.n

    def space(self):
        """The tensor spline space sharing this net's knot vectors."""
        return TensorSpace(self.kv_xi, self.kv_eta)

    def __repr__(self):
        return f"ControlNet({self.n}x{self.m})"

    def eval_map(self, xi, eta):
        """Physical image (x, y) of a parameter point."""
        fx, vx, _ = eval_basis(self.kv_xi, xi)
        fy, vy, _ = eval_basis(self.kv_eta, eta)
        block = self.points[fx : fx + 3, fy : fy + 3]
        return vx @ np.einsum("abc,b->ac", block, vy)

    def eval_grid(self, xs, ys):
        """Map values on the tensor grid xs x ys, shape (len(xs), len(ys), 2)."""
        fx, vx, _ = eval_basis_many(self.kv_xi, xs)
        fy, vy, _ = eval_basis_many(self.kv_eta, ys)
        blocks = self._blocks(fx, fy)
        return np.einsum("xa,yb,xyabc->xyc", vx, vy, blocks)

    def jacobian_grid(self, xs, ys):
        """Map, tangents and determinant on a tensor grid.

        Returns (xy, t_xi, t_eta, det) with shapes (X, Y, 2) x3 and (X, Y).
        No singularity check is applied.
        """
        fx, vx, dx = eval_basis_many(self.kv_xi, xs)
        fy, vy, dy = eval_basis_many(self.kv_eta, ys)
        blocks = self._blocks(fx, fy)
        xy = np.einsum("xa,yb,xyabc->xyc", vx, vy, blocks)
        t_xi = np.einsum("xa,yb,xyabc->xyc", dx, vy, blocks)
        t_eta = np.einsum("xa,yb,xyabc->xyc", vx, dy, blocks)
        det = t_xi[..., 0] * t_eta[..., 1] - t_eta[..., 0] * t_xi[..., 1]
        return xy, t_xi, t_eta, det

    def _blocks(self, fx, fy):
        off = np.arange(3)
        ix = (fx[:, None] + off)[:, None, :, None]
        iy = (fy[:, None] + off)[None, :, None, :]
        return self.points[ix, iy]

    def jacobian(self, xi, eta):
        """Jacobian data at one point; raises on |det| < DET_FLOOR."""
        fx, vx, dx = eval_basis(self.kv_xi, xi)
        fy, vy, dy = eval_basis(self.kv_eta, eta)
        block = self.points[fx : fx + 3, fy : fy + 3]
        t_xi = np.einsum("a,abc,b->c", dx, block, vy)
        t_eta = np.einsum("a,abc,b->c", vx, block, dy)
        J = np.column_stack([t_xi, t_eta])
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if abs(det) < DET_FLOOR:
            raise SingularGeometryError(xi, eta, det)
        m11 = t_xi @ t_xi
        m12 = t_xi @ t_eta
        m22 = t_eta @ t_eta
        metric_inv = np.array([[m22, -m12], [-m12, m11]]) / det**2
        return JacobianData(J=J, det=float(det), metric_inv=metric_inv)


@dataclass(frozen=True)
class InjectivityReport:
    """Sampled-injectivity check result. Failure is a state, not an exception."""

    passed: bool
    min_det: float
    location: tuple
    samples: int


def validate_injectivity(net, samples_per_element=3):
    """Evaluate det JF on a Gauss grid per element and report the minimum.

    The net passes when every sampled determinant is positive.
    """
    if samples_per_element < 2:
        raise ValueError("need at least 2 samples per element")
    nodes, _ = np.polynomial.legendre.leggauss(samples_per_element)
    xs = _element_nodes(net.kv_xi, nodes)
    ys = _element_nodes(net.kv_eta, nodes)
    _, _, _, det = net.jacobian_grid(xs, ys)
    flat = int(np.argmin(det))
    i, j = np.unravel_index(flat, det.shape)
    min_det = float(det[i, j])
    return InjectivityReport(
        passed=bool(min_det > 0.0),
        min_det=min_det,
        location=(float(xs[i]), float(ys[j])),
        samples=det.size,
    )


def _element_nodes(kv, ref_nodes):
    """Gauss nodes of every nonzero element, concatenated."""
    out = []
    for _, a, b in kv.elements():
        out.append(0.5 * (a + b) + 0.5 * (b - a) * ref_nodes)
    return np.concatenate(out)


def refine_geometry(net, new_knots_xi, new_knots_eta):
    """Insert knots in either direction, transporting control points.

    The represented map is unchanged. Repeated values in the lists raise
    the multiplicity accordingly (capped at 2).
    """
    kvx, kvy, pts = net.kv_xi, net.kv_eta, net.points
    for t in new_knots_xi:
        kvx, pts = insert_knot(kvx, pts, t, kvx.multiplicity(t) + 1, axis=0)
    for t in new_knots_eta:
        kvy, pts = insert_knot(kvy, pts, t, kvy.multiplicity(t) + 1, axis=1)
    return ControlNet(kvx, kvy, pts)


def builtin_domain(name, n, m):
    """Construct one of the built-in validated domains.

    unit_square: identity map (control points on the 2D Greville grid).
    stretched_annulus_patch: quarter annulus, radii 1..2; the Jacobian
        determinant varies by a factor of about 2 across the domain.
    puzzle_like: square with sinusoidally perturbed boundary curves,
        interior filled by transfinite (Coons) interpolation.

    Args:
        name: one of BUILTIN_DOMAINS
        n, m: basis counts per direction (n, m >= 4; puzzle_like needs >= 10
            to represent its boundary wiggles)
    """
    if name not in BUILTIN_DOMAINS:
        raise ValueError(f"unknown builtin domain {name!r}; know {BUILTIN_DOMAINS}")
    if n < 4 or m < 4:
        raise ConstructionError("built-in domains need n, m >= 4")
    kvx = uniform_knots(n)
    kvy = uniform_knots(m)
    gx = kvx.greville()
    gy = kvy.greville()

    if name == "unit_square":
        points = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1)
        return ControlNet(kvx, kvy, points)

    if name == "stretched_annulus_patch":
        theta = 0.5 * math.pi * (1.0 - gx)
        radius = 1.0 + gy
        x = radius[None, :] * np.cos(theta)[:, None]
        y = radius[None, :] * np.sin(theta)[:, None]
        net = ControlNet(kvx, kvy, np.stack([x, y], axis=-1))
    else:
        net = _puzzle_net(kvx, kvy, gx, gy)

    report = validate_injectivity(net, 3)
    if not report.passed:
        raise ConstructionError(
            f"{name}({n}, {m}) failed the injectivity check: "
            f"min det = {report.min_det:.3e} at {report.location}"
        )
    return net


def _puzzle_net(kvx, kvy, gx, gy):
    """Coons net whose boundary curves interpolate wiggled square edges."""
    if kvx.n < 10 or kvy.n < 10:
        raise ConstructionError(
            "puzzle_like needs n, m >= 10 to represent its boundary wiggles"
        )
    amp = 0.06

    def south(u):
        return amp * (np.sin(3 * np.pi * u) + 0.4 * np.sin(5 * np.pi * u))

    def north(u):
        return amp * (np.sin(2 * np.pi * u) - 0.5 * np.sin(4 * np.pi * u))

    def west(v):
        return amp * (np.sin(2 * np.pi * v) + 0.3 * np.sin(5 * np.pi * v))

    def east(v):
        return amp * (np.sin(3 * np.pi * v) - 0.4 * np.sin(4 * np.pi * v))

    n, m = kvx.n, kvy.n
    # boundary control points interpolate the wiggled edges at Greville sites
    cs = greville_interpolate(kvx, np.column_stack([gx, south(gx)]))
    cn = greville_interpolate(kvx, np.column_stack([gx, 1.0 + north(gx)]))
    cw = greville_interpolate(kvy, np.column_stack([west(gy), gy]))
    ce = greville_interpolate(kvy, np.column_stack([1.0 + east(gy), gy]))

    # discrete Coons patch on the control grid
    u = gx[:, None, None]
    v = gy[None, :, None]
    pts = (
        (1 - v) * cs[:, None, :]
        + v * cn[:, None, :]
        + (1 - u) * cw[None, :, :]
        + u * ce[None, :, :]
        - (1 - u) * (1 - v) * cs[0]
        - u * (1 - v) * cs[-1]
        - (1 - u) * v * cn[0]
        - u * v * cn[-1]
    )
    assert pts.shape == (n, m, 2)
    return ControlNet(kvx, kvy, pts)


def save_net(net, path):
    """Write a control net in the versioned text format.

    Line 1: "iganet v1"; line 2: "n m"; lines 3-4: the two knot sequences;
    then n*m lines "x y" in row-major order with the i index fastest.
    Numbers carry 17 significant digits and round-trip exactly.
    """
    lines = [NET_FORMAT_TAG, f"{net.n} {net.m}"]
    lines.append(" ".join(f"{t:.17g}" for t in net.kv_xi.knots))
    lines.append(" ".join(f"{t:.17g}" for t in net.kv_eta.knots))
    for j in range(net.m):
        for i in range(net.n):
            x, y = net.points[i, j]
            lines.append(f"{x:.17g} {y:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_net(path):
    """Read a control net written by :func:`save_net`.

    Raises NetFormatError with a line diagnostic on malformed input,
    dimension mismatches, invalid knot vectors, or negative orientation.
    """
    with open(path) as fh:
        raw = fh.read().splitlines()
    lines = [ln.strip() for ln in raw if ln.strip()]
    if not lines or lines[0] != NET_FORMAT_TAG:
        raise NetFormatError(f"{path}: line 1 must be '{NET_FORMAT_TAG}'")
    try:
        n, m = (int(tok) for tok in lines[1].split())
    except (ValueError, IndexError):
        raise NetFormatError(f"{path}: line 2 must hold the two basis counts 'n m'")
    if len(lines) != 4 + n * m:
        raise NetFormatError(
            f"{path}: expected {4 + n * m} content lines for a {n}x{m} net, "
            f"found {len(lines)}"
        )
    kvs = []
    for lineno, count in ((2, n), (3, m)):
        try:
            knots = np.array([float(tok) for tok in lines[lineno].split()])
        except ValueError:
            raise NetFormatError(f"{path}: line {lineno + 1}: unparsable knot value")
        if knots.size != count + 3:
            raise NetFormatError(
                f"{path}: line {lineno + 1}: {knots.size} knots do not give "
                f"{count} basis functions"
            )
        try:
            kvs.append(KnotVector(knots))
        except ValueError as exc:
            raise NetFormatError(f"{path}: line {lineno + 1}: {exc}")
    points = np.empty((n, m, 2))
    for idx in range(n * m):
        lineno = 4 + idx
        toks = lines[lineno].split()
        if len(toks) != 2:
            raise NetFormatError(f"{path}: line {lineno + 1}: expected 'x y'")
        try:
            xy = [float(toks[0]), float(toks[1])]
        except ValueError:
            raise NetFormatError(f"{path}: line {lineno + 1}: unparsable coordinate")
        points[idx % n, idx // n] = xy
    try:
        net = ControlNet(kvs[0], kvs[1], points)
    except ValueError as exc:
        raise NetFormatError(f"{path}: {exc}")
    _check_orientation(net, path)
    return net


def _check_orientation(net, path):
    """Reject nets with nonpositive sampled det JF (never flip silently)."""
    res_x = min(2 * len(net.kv_xi.elements()) + 1, 65)
    res_y = min(2 * len(net.kv_eta.elements()) + 1, 65)
    xs = np.linspace(0.0, 1.0, res_x)
    ys = np.linspace(0.0, 1.0, res_y)
    _, _, _, det = net.jacobian_grid(xs, ys)
    if det.min() <= 0.0:
        raise NetFormatError(
            f"{path}: net has nonpositive Jacobian determinant "
            f"(min sampled det = {det.min():.3e}); negative orientation is rejected"
        )
