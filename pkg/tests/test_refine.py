import numpy as np
import pytest

from igahelm import (
    RefinementError,
    RefinementPlan,
    apply_plan,
    builtin_domain,
    cluster_plan,
    double_knot_plan,
    merge_plans,
    uniform_midpoint_plan,
    uniform_knots,
)
from igahelm.splines import KnotVector, TensorSpace


class TestPlans:
    def test_uniform_midpoints(self):
        space = TensorSpace(KnotVector([0, 0, 0, 0.5, 1, 1, 1]), uniform_knots(4))
        plan = uniform_midpoint_plan(space)
        assert [v for v, _ in plan.xi_insertions] == [0.25, 0.75]
        assert all(m == 1 for _, m in plan.xi_insertions)

    def test_two_applications_quarter_width(self):
        net = builtin_domain("unit_square", 4, 4)
        space = net.space()
        w0 = max(b - a for _, a, b in space.kv_xi.elements())
        for _ in range(2):
            space, net = apply_plan(uniform_midpoint_plan(space), net)
        w2 = max(b - a for _, a, b in space.kv_xi.elements())
        assert np.isclose(w2, w0 / 4)

    def test_cluster_center_on_knot_targets_two_intervals(self):
        # uniform 10-interval vector, center 0.5 sits on a knot
        space = TensorSpace(uniform_knots(12), uniform_knots(12))
        plan = cluster_plan(space, (0.5, 0.5), 9)
        values = [v for v, _ in plan.xi_insertions]
        assert len(values) == 18
        assert all(0.4 < v < 0.6 for v in values)
        assert not any(np.isclose(values, 0.5))

    def test_cluster_center_interior_targets_three_intervals(self):
        space = TensorSpace(uniform_knots(12), uniform_knots(12))
        plan = cluster_plan(space, (0.45, 0.45), 9)  # inside (0.4, 0.5)
        values = np.array([v for v, _ in plan.xi_insertions])
        assert values.size == 27  # 9 per interval, three intervals
        assert values.min() > 0.3 and values.max() < 0.7
        for a, b in [(0.3, 0.4), (0.4, 0.5), (0.5, 0.6)]:
            assert np.count_nonzero((values > a) & (values < b)) == 9

    def test_cluster_band_supports_basis(self):
        net = builtin_domain("unit_square", 12, 12)
        space = net.space()
        plan = cluster_plan(space, (0.5, 0.5), 9)
        space2, _ = apply_plan(plan, net)
        kv = space2.kv_xi
        band = (0.4, 0.6)
        inside = [
            k
            for k in range(kv.n)
            if kv.knots[k] >= band[0] and kv.knots[k + 3] <= band[1]
        ]
        assert len(inside) >= 9

    def test_double_knot_plan_counts(self):
        net = builtin_domain("unit_square", 10, 10)  # knots at i/8
        space = net.space()
        plan = double_knot_plan([0.25, 0.5, 0.75], [0.25, 0.5, 0.75])
        space2, _ = apply_plan(plan, net)
        assert space2.n == space.n + 3
        assert space2.m == space.m + 3
        for v in (0.25, 0.5, 0.75):
            assert space2.kv_xi.multiplicity(v) == 2

    def test_doubling_fresh_value_inserts_twice(self):
        net = builtin_domain("unit_square", 10, 10)
        plan = double_knot_plan([0.3], [])
        space2, _ = apply_plan(plan, net)
        assert space2.kv_xi.multiplicity(0.3) == 2
        assert space2.n == 12

    def test_plan_validation(self):
        with pytest.raises(RefinementError):
            RefinementPlan(xi_insertions=((0.0, 1),))
        with pytest.raises(RefinementError):
            RefinementPlan(xi_insertions=((0.5, 3),))
        with pytest.raises(RefinementError):
            RefinementPlan(xi_insertions=((0.5, 1), (0.5, 2)))

    def test_merge_keeps_max_multiplicity(self):
        p1 = RefinementPlan(xi_insertions=((0.5, 1), (0.2, 1)))
        p2 = RefinementPlan(xi_insertions=((0.5, 2),))
        merged = merge_plans(p1, p2)
        assert dict(merged.xi_insertions) == {0.2: 1, 0.5: 2}


class TestApplyPlan:
    def test_empty_plan_identity(self):
        net = builtin_domain("puzzle_like", 10, 10)
        space, net2 = apply_plan(RefinementPlan(), net)
        assert space.kv_xi == net.kv_xi
        assert np.array_equal(net2.points, net.points)

    def test_geometry_invariance(self, rng):
        net = builtin_domain("puzzle_like", 12, 12)
        plan = merge_plans(
            cluster_plan(net.space(), (0.5, 0.5), 9),
            double_knot_plan([0.5], [0.5]),
        )
        space2, net2 = apply_plan(plan, net)
        for xi, eta in rng.uniform(0, 1, size=(200, 2)):
            d = np.abs(net.eval_map(xi, eta) - net2.eval_map(xi, eta)).max()
            assert d < 1e-12

    def test_local_insertion_recipe_dof_accounting(self):
        # 6 knots in (0, 0.1), 6 in (0.9, 1), 7 in (0.4, 0.6): 34 -> 53 dof
        net = builtin_domain("puzzle_like", 34, 34)
        middle = list(np.linspace(0.4, 0.6, 9)[1:-1])
        middle[3] = 0.51  # 0.5 is already a knot of the uniform base vector
        ins = (
            list(np.linspace(0, 0.1, 8)[1:-1])
            + list(np.linspace(0.9, 1.0, 8)[1:-1])
            + middle
        )
        assert len(ins) == 19
        plan = RefinementPlan(
            xi_insertions=tuple((v, 1) for v in ins),
            eta_insertions=tuple((v, 1) for v in ins),
        )
        space2, _ = apply_plan(plan, net)
        assert space2.n == 53
        assert space2.m == 53

    def test_dimension_accounting_generic(self, rng):
        net = builtin_domain("unit_square", 7, 7)
        values = rng.uniform(0.05, 0.95, 5)
        plan = RefinementPlan(xi_insertions=tuple((float(v), 1) for v in values))
        space2, _ = apply_plan(plan, net)
        assert space2.n == 7 + 5
        assert space2.m == 7

    def test_solution_c0_at_doubled_line(self, rng):
        # a generic coefficient field in the doubled space has a kink across
        # the doubled parameter line
        net = builtin_domain("unit_square", 8, 8)
        space2, net2 = apply_plan(double_knot_plan([0.5], []), net)
        beta = rng.normal(size=(space2.n, space2.m))
        h = 1e-7
        eta = 0.37
        vm = space2.evaluate(beta, 0.5 - h, eta)[0]
        v0 = space2.evaluate(beta, 0.5, eta)[0]
        vp = space2.evaluate(beta, 0.5 + h, eta)[0]
        left, right = (v0 - vm) / h, (vp - v0) / h
        assert abs(left - right) > 1e-3
        # but the field is still continuous there
        assert abs(vp - vm) < 1e-5

    def test_never_decreases_dimension(self):
        net = builtin_domain("unit_square", 6, 6)
        space = net.space()
        for plan in [
            uniform_midpoint_plan(space),
            cluster_plan(space, (0.3, 0.7), 3),
            double_knot_plan([0.5], [0.25]),
        ]:
            space2, _ = apply_plan(plan, net)
            assert space2.dimension >= space.dimension
