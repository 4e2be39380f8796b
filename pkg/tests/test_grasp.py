import math

import numpy as np
import pytest

from pats import cloud as cloud_mod
from pats import grasp
from pats.grasp import GraspError


def sweep_min_extent(points2d, step_deg=0.1):
    """Brute-force minimal extent: project onto every direction in a fine sweep."""
    angles = np.deg2rad(np.arange(0.0, 180.0, step_deg))
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=0)
    proj = points2d @ dirs
    widths = proj.max(axis=0) - proj.min(axis=0)
    i = int(np.argmin(widths))
    return float(widths[i]), float(angles[i])


def grid_cloud(fn, width=40, height=40):
    """Cloud whose pixel (x, y) maps to fn(x, y) -> (X, Y, Z) or None."""
    pts = np.full((height, width, 3), np.nan)
    for y in range(height):
        for x in range(width):
            p = fn(x, y)
            if p is not None:
                pts[y, x] = p
    return cloud_mod.make_cloud(pts)


def rot_about(axis, theta):
    axis = np.asarray(axis, float)
    axis = axis / np.linalg.norm(axis)
    ux, uy, uz = axis
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [
            [c + ux * ux * (1 - c), ux * uy * (1 - c) - uz * s, ux * uz * (1 - c) + uy * s],
            [uy * ux * (1 - c) + uz * s, c + uy * uy * (1 - c), uy * uz * (1 - c) - ux * s],
            [uz * ux * (1 - c) - uy * s, uz * uy * (1 - c) + ux * s, c + uz * uz * (1 - c)],
        ]
    )


class TestFilterCloud:
    def test_clean_plane_unchanged(self):
        c = grid_cloud(lambda x, y: (x * 0.01, y * 0.01, 0.8), 12, 12)
        out = grasp.filter_cloud(c)
        assert np.array_equal(out.valid(), c.valid())

    def test_far_outlier_removed(self):
        def fn(x, y):
            if (x, y) == (5, 5):
                return (0.05, 0.05, 1.8)  # 1 m off the plane
            return (x * 0.01, y * 0.01, 0.8)

        c = grid_cloud(fn, 12, 12)
        out = grasp.filter_cloud(c)
        assert not out.valid()[5, 5]
        assert out.valid().sum() == c.valid().sum() - 1

    def test_all_invalid_unchanged(self):
        c = cloud_mod.make_cloud(np.full((6, 6, 3), np.nan))
        out = grasp.filter_cloud(c)
        assert not out.valid().any()


class TestSurfaceNormal:
    def test_horizontal_plane(self):
        c = grid_cloud(lambda x, y: (x * 0.002, y * 0.002, 0.8))
        mask = np.ones((40, 40), bool)
        n, _, inl = grasp.surface_normal(c, mask, (20, 20))
        assert abs(n[2]) == pytest.approx(1.0, abs=1e-9)
        # oriented toward the sensor at the origin: away from +z surface
        assert n[2] < 0
        assert len(inl) >= grasp.MIN_NEIGHBORHOOD

    def test_vertical_wall(self):
        c = grid_cloud(lambda x, y: (x * 0.002, 0.5, 0.3 + y * 0.002))
        mask = np.ones((40, 40), bool)
        n, _, _ = grasp.surface_normal(c, mask, (20, 20))
        assert abs(n[1]) == pytest.approx(1.0, abs=1e-9)
        assert n[1] < 0  # toward the origin

    def test_noisy_plane_within_two_degrees(self, rng):
        def fn(x, y):
            return (x * 0.002, y * 0.002, 0.8 + rng.normal(0, 0.001))

        c = grid_cloud(fn)
        n, _, _ = grasp.surface_normal(c, np.ones((40, 40), bool), (20, 20))
        angle = math.degrees(math.acos(min(1.0, abs(float(n[2])))))
        assert angle <= 2.0

    def test_too_few_points(self):
        c = grid_cloud(lambda x, y: (x * 0.05, y * 0.05, 0.8), 6, 6)  # 5 cm spacing
        with pytest.raises(GraspError):
            grasp.surface_normal(c, np.ones((6, 6), bool), (3, 3))

    def test_invalid_click(self):
        pts = np.full((6, 6, 3), np.nan)
        c = cloud_mod.make_cloud(pts)
        with pytest.raises(GraspError):
            grasp.surface_normal(c, np.ones((6, 6), bool), (2, 2))


class TestClassifyGrasp:
    def test_parallel_is_top(self):
        assert grasp.classify_grasp([0, 0, -1]) == "top"
        assert grasp.classify_grasp([0, 0, 1]) == "top"

    def test_perpendicular_is_side(self):
        assert grasp.classify_grasp([1, 0, 0]) == "side"

    def test_threshold_boundary(self):
        n24 = [math.sin(math.radians(24)), 0, -math.cos(math.radians(24))]
        n26 = [math.sin(math.radians(26)), 0, -math.cos(math.radians(26))]
        assert grasp.classify_grasp(n24) == "top"
        assert grasp.classify_grasp(n26) == "side"

    def test_configurable_threshold(self):
        n30 = [math.sin(math.radians(30)), 0, -math.cos(math.radians(30))]
        assert grasp.classify_grasp(n30, threshold_deg=35) == "top"


class TestSideGrasp:
    def test_two_points_width_and_center(self):
        inl = np.array([[0.0, 0.5, 0.3], [0.06, 0.5, 0.3]])
        width, center, jaw = grasp.side_grasp_params(inl, normal=np.array([0.0, -1.0, 0.0]))
        assert width == pytest.approx(0.06, abs=1e-12)
        assert np.allclose(center, [0.03, 0.5, 0.3])
        assert abs(jaw[2]) < 1e-12  # horizontal

    def test_symmetric_face_center_on_axis(self):
        xs, zs = np.meshgrid(np.linspace(-0.04, 0.04, 9), np.linspace(0.2, 0.3, 7))
        inl = np.stack([xs.ravel(), np.full(xs.size, 0.5), zs.ravel()], axis=1)
        width, center, _ = grasp.side_grasp_params(inl, normal=np.array([0.0, -1.0, 0.0]))
        assert width == pytest.approx(0.08, abs=1e-9)
        assert center[0] == pytest.approx(0.0, abs=1e-9)

    def test_matches_projection_oracle(self, rng):
        for _ in range(30):
            pts = rng.normal(size=(40, 2)) * 0.05
            inl = np.stack([pts[:, 0], np.full(40, 0.5), pts[:, 1]], axis=1)
            width, _, jaw = grasp.side_grasp_params(inl, normal=np.array([0.0, -1.0, 0.0]))
            proj = inl @ jaw
            assert width == pytest.approx(float(proj.max() - proj.min()), abs=1e-12)

    def test_vertical_line_degenerate(self):
        inl = np.array([[0.0, 0.5, z] for z in np.linspace(0.1, 0.4, 8)])
        with pytest.raises(GraspError):
            grasp.side_grasp_params(inl, normal=np.array([0.0, -1.0, 0.0]))


class TestTopGrasp:
    def test_axis_aligned_square(self):
        xs, ys = np.meshgrid(np.linspace(0, 0.05, 6), np.linspace(0, 0.05, 6))
        inl = np.stack([xs.ravel(), ys.ravel(), np.full(xs.size, 0.4)], axis=1)
        turn, width, center = grasp.top_grasp_params(inl)
        assert width == pytest.approx(0.05, abs=1e-9)
        assert turn == pytest.approx(0.0, abs=1e-9)  # tie resolves to the smaller angle
        assert np.allclose(center[:2], [0.025, 0.025], atol=1e-9)

    def test_rotated_rectangle(self):
        xs, ys = np.meshgrid(np.linspace(-0.06, 0.06, 25), np.linspace(-0.03, 0.03, 13))
        flat = np.stack([xs.ravel(), ys.ravel()], axis=1)
        theta = math.radians(30)
        rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        flat = flat @ rot.T
        inl = np.stack([flat[:, 0], flat[:, 1], np.full(len(flat), 0.4)], axis=1)
        turn, width, _ = grasp.top_grasp_params(inl)
        assert width == pytest.approx(0.06, abs=1e-6)
        # jaws close across the short side. The horizontal basis has
        # ey = gravity x ex = (0, -1, 0), so a +30 deg world-xy rotation is
        # -30 deg in frame: (90 - 30) mod 180.
        assert math.degrees(turn) == pytest.approx(60.0, abs=0.2)

    def test_circle_width(self):
        angles = np.linspace(0, 2 * math.pi, 100, endpoint=False)
        inl = np.stack(
            [0.04 * np.cos(angles), 0.04 * np.sin(angles), np.full(100, 0.4)], axis=1
        )
        _, width, center = grasp.top_grasp_params(inl)
        assert width == pytest.approx(0.08, abs=1e-3)
        assert np.allclose(center[:2], 0.0, atol=1e-3)

    def test_calipers_match_sweep_on_random_hulls(self, rng):
        for _ in range(50):
            pts = rng.normal(size=(int(rng.integers(4, 40)), 2)) * 0.08
            hull = grasp.convex_hull_2d(pts)
            if len(hull) < 3:
                continue
            width, angle = grasp.min_extent_calipers(hull)
            w_ref, _ = sweep_min_extent(pts)
            assert width <= w_ref + 1e-12
            assert width == pytest.approx(w_ref, abs=1e-3)

    def test_rotation_equivariance(self, rng):
        gravity = grasp.DEFAULT_GRAVITY
        pts = rng.normal(size=(30, 2)) * 0.05
        inl = np.stack([pts[:, 0], pts[:, 1], np.full(30, 0.4)], axis=1)
        turn0, width0, _ = grasp.top_grasp_params(inl, gravity)
        for theta_deg in (17.0, 45.0, 133.0):
            theta = math.radians(theta_deg)
            rot = rot_about(gravity, theta)
            turned = inl @ rot.T
            turn1, width1, _ = grasp.top_grasp_params(turned, gravity)
            delta = math.degrees((turn1 - turn0 - theta) % math.pi)
            delta = min(delta, 180.0 - delta)
            assert delta == pytest.approx(0.0, abs=0.5)
            assert abs(width1 - width0) < 1e-3

    def test_collinear_fallback(self):
        inl = np.array([[x, 0.0, 0.4] for x in np.linspace(0, 0.1, 7)])
        turn, width, center = grasp.top_grasp_params(inl)
        assert width == pytest.approx(0.0, abs=1e-9)
        assert math.degrees(turn) == pytest.approx(90.0, abs=1e-6)
        assert np.allclose(center[:2], [0.05, 0.0], atol=1e-9)


class TestPlaceHeight:
    def test_grasp_at_lowest_point(self):
        c = grid_cloud(lambda x, y: (x * 0.01, y * 0.01, 0.5), 10, 10)
        mask = np.ones((10, 10), bool)
        # gravity -z: lowest along gravity means smallest z
        h = grasp.place_height(mask, c, np.array([0.05, 0.05, 0.5]))
        assert h == pytest.approx(0.0, abs=1e-12)

    def test_cylinder_grasped_at_top(self):
        # vertical cylinder: z spans 0.30 .. 0.50 (0.20 m tall)
        def fn(x, y):
            ang = 2 * math.pi * x / 40
            return (0.03 * math.cos(ang), 0.03 * math.sin(ang), 0.30 + 0.20 * y / 39)

        c = grid_cloud(fn)
        mask = np.ones((40, 40), bool)
        top_point = np.array([0.03, 0.0, 0.50])
        h = grasp.place_height(mask, c, top_point)
        assert h == pytest.approx(0.20, abs=1e-3)

    def test_single_point(self):
        pts = np.full((4, 4, 3), np.nan)
        pts[2, 2] = (0.0, 0.0, 0.4)
        c = cloud_mod.make_cloud(pts)
        mask = np.zeros((4, 4), bool)
        mask[2, 2] = True
        assert grasp.place_height(mask, c, pts[2, 2]) == 0.0

    def test_never_negative(self, rng):
        pts = rng.normal(size=(6, 6, 3)) * 0.1
        c = cloud_mod.make_cloud(pts)
        mask = np.ones((6, 6), bool)
        highest = pts.reshape(-1, 3)[np.argmin(pts.reshape(-1, 3) @ grasp.DEFAULT_GRAVITY)]
        assert grasp.place_height(mask, c, highest + np.array([0, 0, -1.0])) == 0.0


class TestBuildGraspSpec:
    def _box_cloud(self):
        # a 6 cm box sitting 0.1 m below the camera: top face plus front face
        def fn(x, y):
            if y < 20:  # top face, camera looks straight down
                return (x * 0.002, y * 0.002, 0.40)
            return (x * 0.002, 0.04, 0.40 + (y - 20) * 0.002)

        return grid_cloud(fn, 30, 40)

    def test_top_face_click(self):
        c = self._box_cloud()
        mask = np.zeros((40, 30), bool)
        mask[:20] = True
        spec = grasp.build_grasp_spec(mask, (15, 10), c)
        assert spec.grasp_type == "top"
        assert spec.approach_dir[2] == pytest.approx(1.0, abs=1e-6)  # straight down onto +z face
        assert spec.approach_length == 0.12
        # the jaws close across the face's short side (0.038 x 0.058 face)
        assert spec.object_width == pytest.approx(0.038, abs=2e-3)

    def test_front_face_click(self):
        c = self._box_cloud()
        mask = np.zeros((40, 30), bool)
        mask[20:] = True
        spec = grasp.build_grasp_spec(mask, (15, 30), c)
        assert spec.grasp_type == "side"
        assert abs(spec.approach_dir[1]) == pytest.approx(1.0, abs=1e-6)
        assert spec.object_width == pytest.approx(0.058, abs=2e-3)
        assert spec.place_height >= 0

    def test_invalid_depth_click(self):
        pts = np.full((10, 10, 3), np.nan)
        pts[:5] = np.mgrid[0:5, 0:10].transpose(1, 2, 0)[..., [1, 0, 0]] * 0.01
        pts[:5, :, 2] = 0.4
        c = cloud_mod.make_cloud(pts)
        mask = np.ones((10, 10), bool)
        with pytest.raises(GraspError):
            grasp.build_grasp_spec(mask, (5, 7), c)

    def test_json_record(self):
        c = self._box_cloud()
        mask = np.zeros((40, 30), bool)
        mask[:20] = True
        spec = grasp.build_grasp_spec(mask, (15, 10), c)
        import json

        decoded = json.loads(spec.to_json())
        assert decoded["grasp_type"] == "top"
        assert decoded["approach_length"] == 0.12


class TestCloudFile:
    def test_round_trip(self, rng, tmp_path):
        pts = rng.normal(size=(7, 9, 3)).astype(np.float32).astype(np.float64)
        pts[2, 3] = np.nan
        c = cloud_mod.make_cloud(pts)
        path = tmp_path / "scene.pcraw"
        cloud_mod.save_cloud(c, path)
        loaded = cloud_mod.load_cloud(path)
        assert loaded.width == 9 and loaded.height == 7
        assert np.allclose(loaded.points, pts, equal_nan=True)

    def test_magic_check(self, tmp_path):
        p = tmp_path / "bad.pcraw"
        p.write_bytes(b"XXXX" + b"\x00" * 20)
        with pytest.raises(ValueError):
            cloud_mod.load_cloud(p)
