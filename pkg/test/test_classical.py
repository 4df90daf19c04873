import numpy as np
import pytest

from pyqkt.classical import (
    CHAOTIC_SEED,
    FIXED_POINTS,
    ClassicalPoint,
    find_fixed_point,
    lyapunov_estimate,
    orbit,
    orbit_array,
    project,
    project_many,
    sensitivity,
    step,
)
from pyqkt.errors import InsufficientDataError, InvalidPointError

ALPHA = 3.0


class TestClassicalPoint:
    def test_off_sphere_rejected(self):
        with pytest.raises(InvalidPointError):
            ClassicalPoint(1.0, 1.0, 0.0)

    def test_seven_digit_coordinates_accepted(self):
        p = ClassicalPoint.on_sphere(0.6294126, 0.4557187, 0.6294126)
        assert np.linalg.norm(p.as_array()) == pytest.approx(1.0, abs=1e-15)

    def test_on_sphere_tolerance(self):
        with pytest.raises(InvalidPointError):
            ClassicalPoint.on_sphere(0.6, 0.5, 0.6)

    def test_chaotic_seed(self):
        assert CHAOTIC_SEED.x == pytest.approx(0.1, abs=1e-6)
        assert CHAOTIC_SEED.y == pytest.approx(0.95, abs=1e-6)


class TestMap:
    @pytest.mark.parametrize("fixed", FIXED_POINTS)
    def test_fixed_points_are_fixed(self, fixed):
        image = step(fixed, ALPHA).as_array()
        np.testing.assert_allclose(image, fixed.as_array(), atol=1e-5)

    def test_find_fixed_point(self):
        guess = ClassicalPoint.on_sphere(*(np.array([0.6, 0.5, 0.6]) / np.sqrt(0.97)))
        found = find_fixed_point(guess, ALPHA)
        np.testing.assert_allclose(found.as_array(), FIXED_POINTS[0].as_array(), atol=1e-6)

    @pytest.mark.parametrize("fixed", FIXED_POINTS)
    def test_refined_fixed_point_is_exact(self, fixed):
        found = find_fixed_point(fixed, ALPHA)
        image = step(found, ALPHA).as_array()
        assert np.max(np.abs(image - found.as_array())) < 1e-10
        np.testing.assert_allclose(found.as_array(), fixed.as_array(), atol=1e-6)

    def test_pole_is_fixed(self):
        assert step(ClassicalPoint(0.0, 1.0, 0.0), ALPHA) == ClassicalPoint(0.0, 1.0, 0.0)

    def test_norm_preserved(self):
        p = step(CHAOTIC_SEED, ALPHA)
        assert np.linalg.norm(p.as_array()) == pytest.approx(1.0, abs=1e-12)

    def test_orbit_length(self):
        assert orbit_array(CHAOTIC_SEED, ALPHA, 1).shape == (2, 3)
        assert len(orbit(CHAOTIC_SEED, ALPHA, 5)) == 6

    def test_empty_orbit_rejected(self):
        with pytest.raises(InsufficientDataError):
            orbit_array(CHAOTIC_SEED, ALPHA, 0)

    def test_fixed_point_orbit(self):
        points = orbit_array(FIXED_POINTS[0], ALPHA, 100)
        np.testing.assert_allclose(points, np.broadcast_to(points[0], points.shape), atol=1e-4)

    def test_long_orbit_stays_on_sphere(self):
        points = orbit_array(CHAOTIC_SEED, ALPHA, 10_000)
        assert np.max(np.abs(np.linalg.norm(points, axis=1) - 1.0)) < 1e-8

    def test_chaotic_orbit_spreads(self):
        points = orbit_array(CHAOTIC_SEED, ALPHA, 10_000)
        assert points[:, 2].std() > 0.3


class TestProjection:
    def test_equator(self):
        px, pz = project(ClassicalPoint(1.0, 0.0, 0.0))
        assert px == pytest.approx(np.sqrt(2))
        assert pz == 0.0

    def test_poles(self):
        assert project(ClassicalPoint(0.0, 1.0, 0.0)) == (0.0, 0.0)
        assert project(ClassicalPoint(0.0, -1.0, 0.0)) == (0.0, 0.0)

    def test_fixed_point(self):
        p = FIXED_POINTS[0]
        scale = np.sqrt(2 / (1 + p.y))
        assert project(p) == pytest.approx((p.x * scale, p.z * scale))

    def test_many_matches_single(self):
        points = orbit_array(CHAOTIC_SEED, ALPHA, 50)
        px, pz = project_many(points)
        for k in (0, 17, 50):
            single = project(ClassicalPoint(*points[k]))
            assert (px[k], pz[k]) == pytest.approx(single)

    def test_disc_radius(self):
        px, pz = project_many(orbit_array(CHAOTIC_SEED, ALPHA, 2000))
        assert np.max(np.hypot(px, pz)) <= np.sqrt(2) + 1e-12


class TestSensitivity:
    def test_chaotic_lyapunov_positive(self):
        assert lyapunov_estimate(CHAOTIC_SEED, ALPHA, 2000) > 0.1

    def test_fixed_point_lyapunov_vanishes(self):
        assert abs(lyapunov_estimate(FIXED_POINTS[0], ALPHA, 2000)) < 0.02

    def test_fixed_point_bounded(self):
        series = sensitivity(FIXED_POINTS[0], ALPHA, 200)
        assert not series.truncated
        assert series.xi.size == 201
        assert series.xi.max() < 100

    def test_initial_value(self):
        series = sensitivity(CHAOTIC_SEED, ALPHA, 20)
        assert series.xi[0] == 1.0
        assert series.steps[0] == 0

    def test_insensitive_to_initial_distance(self):
        a = sensitivity(CHAOTIC_SEED, ALPHA, 10, d0=1e-9)
        b = sensitivity(CHAOTIC_SEED, ALPHA, 10, d0=5e-10)
        np.testing.assert_allclose(a.xi, b.xi, rtol=1e-2)

    def test_chaotic_truncation(self):
        series = sensitivity(CHAOTIC_SEED, ALPHA, 200)
        assert series.truncated
        assert series.xi.size < 201
        assert series.lyapunov > 0

    def test_zero_steps_rejected(self):
        with pytest.raises(InsufficientDataError):
            sensitivity(CHAOTIC_SEED, ALPHA, 0)
