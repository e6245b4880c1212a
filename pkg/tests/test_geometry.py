import numpy as np
import pytest

from igahelm import (
    ConstructionError,
    ControlNet,
    NetFormatError,
    SingularGeometryError,
    builtin_domain,
    load_net,
    refine_geometry,
    save_net,
    uniform_knots,
    validate_injectivity,
)


def random_net(rng, n=6, m=7, wiggle=0.08):
    """A mildly perturbed Greville-grid net (injective for small wiggle)."""
    kvx, kvy = uniform_knots(n), uniform_knots(m)
    gx, gy = kvx.greville(), kvy.greville()
    pts = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1)
    pts = pts + rng.uniform(-wiggle, wiggle, size=pts.shape) / max(n, m)
    return ControlNet(kvx, kvy, pts)


class TestEvalMap:
    def test_identity_at_greville_grid(self):
        net = builtin_domain("unit_square", 6, 8)
        for xi, eta in [(0.3, 0.7), (0.0, 0.0), (1.0, 0.5), (0.125, 0.99)]:
            assert np.abs(net.eval_map(xi, eta) - (xi, eta)).max() < 1e-14

    def test_corner_interpolation(self, rng):
        net = random_net(rng)
        assert np.allclose(net.eval_map(0, 0), net.points[0, 0], atol=1e-15)
        assert np.allclose(net.eval_map(1, 1), net.points[-1, -1], atol=1e-15)

    def test_matches_full_double_sum(self, rng):
        from igahelm import eval_basis_many

        net = random_net(rng)
        for xi, eta in rng.uniform(0, 1, size=(30, 2)):
            fx, vx, _ = eval_basis_many(net.kv_xi, np.array([xi]))
            fy, vy, _ = eval_basis_many(net.kv_eta, np.array([eta]))
            full = np.zeros(2)
            for i in range(net.n):
                for j in range(net.m):
                    bi = vx[0][i - fx[0]] if fx[0] <= i <= fx[0] + 2 else 0.0
                    bj = vy[0][j - fy[0]] if fy[0] <= j <= fy[0] + 2 else 0.0
                    full += net.points[i, j] * bi * bj
            assert np.abs(net.eval_map(xi, eta) - full).max() < 1e-13

    def test_out_of_square_rejected(self):
        net = builtin_domain("unit_square", 5, 5)
        with pytest.raises(ValueError):
            net.eval_map(1.2, 0.5)

    def test_boundary_depends_only_on_boundary_rows(self, rng):
        # tampering with interior control points leaves the four boundary
        # curves untouched
        net = random_net(rng)
        pts = np.array(net.points)
        pts[1:-1, 1:-1] += 0.5
        tampered = ControlNet(net.kv_xi, net.kv_eta, pts)
        ts = rng.uniform(0, 1, 25)
        for t in ts:
            for a, b in [(t, 0.0), (t, 1.0), (0.0, t), (1.0, t)]:
                assert np.allclose(net.eval_map(a, b), tampered.eval_map(a, b), atol=1e-15)


class TestJacobian:
    def test_identity_map(self):
        net = builtin_domain("unit_square", 5, 5)
        jd = net.jacobian(0.37, 0.62)
        assert np.allclose(jd.J, np.eye(2), atol=1e-13)
        assert np.isclose(jd.det, 1.0)
        assert np.allclose(jd.metric_inv, np.eye(2), atol=1e-12)

    def test_affine_map(self):
        kv = uniform_knots(6)
        g = kv.greville()
        pts = np.stack(np.meshgrid(2 * g, 3 * g, indexing="ij"), axis=-1)
        net = ControlNet(kv, kv, pts)
        for xi, eta in [(0.1, 0.9), (0.5, 0.5), (0.77, 0.13)]:
            jd = net.jacobian(xi, eta)
            assert np.isclose(jd.det, 6.0, atol=1e-12)

    def test_det_consistency(self, rng):
        net = random_net(rng)
        for xi, eta in rng.uniform(0, 1, size=(20, 2)):
            jd = net.jacobian(xi, eta)
            J = jd.J
            assert np.isclose(jd.det, J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0], rtol=1e-14)
            assert np.allclose(jd.metric_inv @ (J.T @ J), np.eye(2), atol=1e-10)

    def test_matches_finite_differences(self, rng):
        net = random_net(rng)
        h = 1e-6
        for xi, eta in rng.uniform(2 * h, 1 - 2 * h, size=(50, 2)):
            jd = net.jacobian(xi, eta)
            col_xi = (net.eval_map(xi + h, eta) - net.eval_map(xi - h, eta)) / (2 * h)
            col_eta = (net.eval_map(xi, eta + h) - net.eval_map(xi, eta - h)) / (2 * h)
            assert np.abs(jd.J[:, 0] - col_xi).max() < 1e-6
            assert np.abs(jd.J[:, 1] - col_eta).max() < 1e-6

    def test_singular_geometry_raises(self):
        # collapse every control point onto a line: det = 0 everywhere
        kv = uniform_knots(5)
        g = kv.greville()
        pts = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1)
        pts[..., 1] = pts[..., 0]
        net = ControlNet(kv, kv, pts)
        with pytest.raises(SingularGeometryError):
            net.jacobian(0.4, 0.6)


class TestInjectivity:
    def test_identity_passes(self):
        rep = validate_injectivity(builtin_domain("unit_square", 6, 6), 3)
        assert rep.passed
        assert np.isclose(rep.min_det, 1.0)

    def test_affine_min_det(self):
        kv = uniform_knots(6)
        g = kv.greville()
        pts = np.stack(np.meshgrid(2 * g, 3 * g, indexing="ij"), axis=-1)
        rep = validate_injectivity(ControlNet(kv, kv, pts), 4)
        assert rep.passed
        assert np.isclose(rep.min_det, 6.0)

    def test_fold_detected_without_raising(self):
        net = builtin_domain("unit_square", 6, 6)
        pts = np.array(net.points)
        pts[[2, 3], [2, 3]] = pts[[3, 2], [3, 2]]  # swap two interior points
        rep = validate_injectivity(ControlNet(net.kv_xi, net.kv_eta, pts), 4)
        assert not rep.passed
        assert rep.min_det < 0

    def test_sample_count_validated(self):
        with pytest.raises(ValueError):
            validate_injectivity(builtin_domain("unit_square", 5, 5), 1)


class TestRefineGeometry:
    def test_map_invariance(self, rng):
        net = random_net(rng)
        refined = refine_geometry(net, [0.21, 0.48, 0.48], [0.7])
        assert refined.kv_xi.multiplicity(0.48) == 2
        for xi, eta in rng.uniform(0, 1, size=(200, 2)):
            assert np.abs(net.eval_map(xi, eta) - refined.eval_map(xi, eta)).max() < 1e-12

    def test_empty_insertions_identity(self, rng):
        net = random_net(rng)
        refined = refine_geometry(net, [], [])
        assert refined.kv_xi == net.kv_xi
        assert np.array_equal(refined.points, net.points)

    def test_double_insertion_keeps_map_smooth(self, rng):
        # the map stays unchanged even though the basis is only C0 at 0.45
        net = random_net(rng)
        refined = refine_geometry(net, [0.45, 0.45], [])
        assert refined.kv_xi.multiplicity(0.45) == 2
        h = 1e-7
        for eta in rng.uniform(0, 1, 10):
            left = (refined.eval_map(0.45, eta) - refined.eval_map(0.45 - h, eta)) / h
            right = (refined.eval_map(0.45 + h, eta) - refined.eval_map(0.45, eta)) / h
            assert np.abs(left - right).max() < 1e-5


class TestBuiltinDomains:
    def test_unit_square_exact(self, rng):
        net = builtin_domain("unit_square", 7, 9)
        for xi, eta in rng.uniform(0, 1, size=(100, 2)):
            assert np.abs(net.eval_map(xi, eta) - (xi, eta)).max() < 1e-14

    def test_puzzle_large_control_net_injective(self):
        rep = validate_injectivity(builtin_domain("puzzle_like", 34, 34), 3)
        assert rep.passed

    def test_annulus_det_varies(self):
        net = builtin_domain("stretched_annulus_patch", 8, 8)
        xs = np.linspace(0, 1, 9)
        _, _, _, det = net.jacobian_grid(xs, xs)
        assert det.min() > 0
        assert (det.max() - det.min()) / det.max() > 0.10

    def test_size_floor(self):
        with pytest.raises(ConstructionError):
            builtin_domain("unit_square", 3, 5)
        with pytest.raises(ConstructionError):
            builtin_domain("puzzle_like", 8, 8)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            builtin_domain("klein_bottle", 8, 8)


class TestNetIO:
    def test_round_trip(self, tmp_path):
        net = builtin_domain("puzzle_like", 10, 10)
        path = tmp_path / "net.txt"
        save_net(net, path)
        back = load_net(path)
        assert np.array_equal(back.kv_xi.knots, net.kv_xi.knots)
        assert np.array_equal(back.kv_eta.knots, net.kv_eta.knots)
        assert np.abs(back.points - net.points).max() < 1e-15

    def test_nonmonotone_knots_rejected(self, tmp_path):
        net = builtin_domain("unit_square", 5, 5)
        path = tmp_path / "net.txt"
        save_net(net, path)
        lines = path.read_text().splitlines()
        toks = lines[2].split()
        toks[3], toks[4] = toks[4], toks[3]
        lines[2] = " ".join(["0.9"] + toks[1:])
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(NetFormatError):
            load_net(path)

    def test_point_count_mismatch(self, tmp_path):
        net = builtin_domain("unit_square", 5, 5)
        path = tmp_path / "net.txt"
        save_net(net, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-2]) + "\n")
        with pytest.raises(NetFormatError):
            load_net(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "net.txt"
        path.write_text("iganet v9\n4 4\n")
        with pytest.raises(NetFormatError):
            load_net(path)

    def test_unparsable_coordinate(self, tmp_path):
        net = builtin_domain("unit_square", 5, 5)
        path = tmp_path / "net.txt"
        save_net(net, path)
        lines = path.read_text().splitlines()
        lines[7] = "0.25 spam"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(NetFormatError):
            load_net(path)

    def test_negative_orientation_rejected(self, tmp_path):
        net = builtin_domain("unit_square", 5, 5)
        flipped = ControlNet(net.kv_xi, net.kv_eta, net.points[::-1])
        path = tmp_path / "net.txt"
        save_net(flipped, path)
        with pytest.raises(NetFormatError):
            load_net(path)


class TestLinearPrecision:
    def test_affine_reproduction(self, rng):
        # control points on the Greville image of an affine map reproduce it
        A = np.array([[1.3, 0.4], [-0.2, 0.9]])
        b = np.array([0.5, -1.0])
        kvx, kvy = uniform_knots(7), uniform_knots(6)
        gx, gy = kvx.greville(), kvy.greville()
        grid = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1)
        pts = grid @ A.T + b
        net = ControlNet(kvx, kvy, pts)
        for xi, eta in rng.uniform(0, 1, size=(100, 2)):
            expect = A @ np.array([xi, eta]) + b
            assert np.abs(net.eval_map(xi, eta) - expect).max() < 1e-13
