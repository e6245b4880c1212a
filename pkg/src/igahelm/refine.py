"""Knot-refinement plans and their application to geometry and space.

A plan lists (value, target multiplicity) insertions per direction. Applying
a plan transports the geometry exactly (the map is unchanged); the boundary
lift must be rebuilt against the refined space, since its interpolation
sites move with the Greville abscissas.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import RefinementError
from .splines import TensorSpace, insert_knot


@dataclass(frozen=True)
class RefinementPlan:
    """Sorted, per-direction knot insertions with target multiplicities."""

    xi_insertions: tuple = field(default_factory=tuple)
    eta_insertions: tuple = field(default_factory=tuple)
    description: str = ""

    def __post_init__(self):
        for name, items in (("xi", self.xi_insertions), ("eta", self.eta_insertions)):
            seen = set()
            for value, mult in items:
                if not 0.0 < value < 1.0:
                    raise RefinementError(f"{name} insertion {value!r} outside (0, 1)")
                if not 1 <= mult <= 2:
                    raise RefinementError(
                        f"{name} insertion {value!r} has multiplicity {mult}, cap is 2"
                    )
                if value in seen:
                    raise RefinementError(f"duplicate {name} insertion {value!r}")
                seen.add(value)
        object.__setattr__(self, "xi_insertions", tuple(sorted(self.xi_insertions)))
        object.__setattr__(self, "eta_insertions", tuple(sorted(self.eta_insertions)))


def uniform_midpoint_plan(space):
    """One new knot at the midpoint of every nonzero element, both directions."""

    def mids(kv):
        return tuple((0.5 * (a + b), 1) for _, a, b in kv.elements())

    return RefinementPlan(
        xi_insertions=mids(space.kv_xi),
        eta_insertions=mids(space.kv_eta),
        description="uniform midpoint refinement",
    )


def cluster_plan(space, center, knots_per_interval):
    """Equally spaced knots clustered around a parametric center.

    Per direction, the knot interval containing the center coordinate and its
    two nonzero neighbors each receive ``knots_per_interval`` equally spaced
    interior knots. When the coordinate coincides with an existing knot, the
    two adjacent intervals are targeted instead.
    """
    if knots_per_interval < 1:
        raise ValueError("knots_per_interval must be positive")
    cx, cy = float(center[0]), float(center[1])
    if not (0.0 < cx < 1.0 and 0.0 < cy < 1.0):
        raise ValueError(f"cluster center ({cx}, {cy}) outside (0, 1)^2")

    def one_direction(kv, c):
        elems = kv.elements()
        if kv.multiplicity(c) > 0:
            targets = [e for e in elems if e[1] == c or e[2] == c]
        else:
            hit = next(i for i, (_, a, b) in enumerate(elems) if a < c < b)
            lo = max(hit - 1, 0)
            hi = min(hit + 2, len(elems))
            targets = elems[lo:hi]
        out = []
        for _, a, b in targets:
            inner = np.linspace(a, b, knots_per_interval + 2)[1:-1]
            out.extend((float(t), 1) for t in inner)
        return tuple(out)

    return RefinementPlan(
        xi_insertions=one_direction(space.kv_xi, cx),
        eta_insertions=one_direction(space.kv_eta, cy),
        description=(
            f"cluster of {knots_per_interval} knots per interval around "
            f"({cx}, {cy})"
        ),
    )


def double_knot_plan(params_xi, params_eta):
    """Raise each listed parameter to knot multiplicity 2 (C0 lines)."""
    return RefinementPlan(
        xi_insertions=tuple((float(v), 2) for v in params_xi),
        eta_insertions=tuple((float(v), 2) for v in params_eta),
        description="double knots",
    )


def merge_plans(*plans, description=None):
    """Union of several plans, keeping the largest multiplicity per value."""

    def merged(key):
        acc = {}
        for plan in plans:
            for value, mult in getattr(plan, key):
                acc[value] = max(acc.get(value, 0), mult)
        return tuple(sorted(acc.items()))

    if description is None:
        description = " + ".join(p.description for p in plans if p.description)
    return RefinementPlan(
        xi_insertions=merged("xi_insertions"),
        eta_insertions=merged("eta_insertions"),
        description=description,
    )


def apply_plan(plan, net):
    """Refine the space and transport the geometry through a plan.

    Returns (space, net) over the enlarged knot vectors; the map is
    unchanged up to round-off. Rebuild any boundary lift afterwards.
    """
    kvx, kvy, pts = net.kv_xi, net.kv_eta, net.points
    for value, mult in plan.xi_insertions:
        if kvx.multiplicity(value) > mult:
            raise RefinementError(
                f"xi knot {value!r} already has multiplicity above {mult}"
            )
        kvx, pts = insert_knot(kvx, pts, value, mult, axis=0)
    for value, mult in plan.eta_insertions:
        if kvy.multiplicity(value) > mult:
            raise RefinementError(
                f"eta knot {value!r} already has multiplicity above {mult}"
            )
        kvy, pts = insert_knot(kvy, pts, value, mult, axis=1)
    from .geometry import ControlNet

    refined = ControlNet(kvx, kvy, pts)
    return TensorSpace(kvx, kvy), refined
