import numpy as np
import pytest

from pyqkt.classical import FIXED_POINTS, ClassicalPoint
from pyqkt.coherent import (
    Basis,
    QuantumState,
    SphericalPoint,
    angles_to_cartesian,
    cartesian_to_angles,
    coherent_state,
    coherent_state_at,
    embed_oo,
    expectation_direction,
    footprint_outline,
    footprint_radius,
    project_oo,
)
from pyqkt.errors import DimensionMismatchError, EmptyProjectionError, InvalidPointError
from pyqkt.kicked_top import parity_basis


class TestSphericalPoint:
    def test_ranges(self):
        with pytest.raises(InvalidPointError):
            SphericalPoint(-0.1, 0.0)
        with pytest.raises(InvalidPointError):
            SphericalPoint(1.0, 4.0)

    def test_north_pole(self):
        p = cartesian_to_angles(0.0, 0.0, 1.0)
        assert (p.theta, p.phi) == (0.0, 0.0)

    def test_equator(self):
        p = cartesian_to_angles(1.0, 0.0, 0.0)
        assert p.theta == pytest.approx(np.pi / 2)
        assert p.phi == 0.0

    def test_fixed_point(self):
        p = cartesian_to_angles(0.6294126, 0.4557187, 0.6294126)
        assert p.theta == pytest.approx(np.arccos(0.6294126), abs=1e-7)
        assert p.phi == pytest.approx(np.arctan2(0.4557187, 0.6294126), abs=1e-12)

    def test_off_sphere(self):
        with pytest.raises(InvalidPointError):
            cartesian_to_angles(1.0, 1.0, 0.0)

    def test_inverse(self):
        back = angles_to_cartesian(SphericalPoint(1.1, -0.4))
        again = cartesian_to_angles(back.x, back.y, back.z)
        assert again.theta == pytest.approx(1.1)
        assert again.phi == pytest.approx(-0.4)


class TestCoherentState:
    def test_north_pole_is_top_state(self):
        state = coherent_state(6, SphericalPoint(0.0, 0.0))
        expected = np.zeros(13)
        expected[0] = 1.0
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)

    @pytest.mark.parametrize("J", [1, 20, 480])
    def test_normalised(self, J):
        state = coherent_state(J, SphericalPoint(1.3, 2.2))
        assert state.norm == pytest.approx(1.0, abs=1e-12)
        assert state.basis is Basis.FULL

    def test_expectation_direction(self):
        theta, phi = 1.1, 0.7
        direction = expectation_direction(coherent_state(20, SphericalPoint(theta, phi)))
        expected = (
            np.sin(theta) * np.cos(phi),
            np.sin(theta) * np.sin(phi),
            np.cos(theta),
        )
        np.testing.assert_allclose(direction, expected, atol=1e-10)

    def test_state_at_classical_point(self):
        direction = expectation_direction(coherent_state_at(30, FIXED_POINTS[0]))
        np.testing.assert_allclose(direction, FIXED_POINTS[0].as_array(), atol=1e-9)

    def test_dimension_checked(self):
        with pytest.raises(DimensionMismatchError):
            QuantumState(Basis.OO, 8, np.ones(5) / np.sqrt(5))


class TestProjection:
    def test_oo_vector_is_kept(self):
        decomp = parity_basis(8)
        full = QuantumState(Basis.FULL, 8, decomp.columns("oo")[:, 1].copy())
        state = project_oo(full, decomp)
        expected = np.zeros(4)
        expected[1] = 1.0
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-12)
        assert state.weight == pytest.approx(1.0)

    def test_wrong_parity_is_empty(self):
        J = 8
        amplitudes = np.zeros(2 * J + 1, dtype=complex)
        amplitudes[J] = 1.0
        with pytest.raises(EmptyProjectionError) as info:
            project_oo(QuantumState(Basis.FULL, J, amplitudes), parity_basis(J))
        assert info.value.weight < 1e-10

    def test_fixed_point_weight(self):
        J = 240
        state = project_oo(coherent_state_at(J, FIXED_POINTS[0]), parity_basis(J))
        assert 0.15 < state.weight < 0.35
        assert state.norm == pytest.approx(1.0, abs=1e-12)

    def test_without_renormalisation(self):
        J = 40
        state = project_oo(
            coherent_state_at(J, FIXED_POINTS[0]), parity_basis(J), renormalize=False
        )
        assert state.norm**2 == pytest.approx(state.weight, rel=1e-12)

    def test_embed_round_trip(self):
        J = 20
        decomp = parity_basis(J)
        once = project_oo(coherent_state_at(J, FIXED_POINTS[1]), decomp)
        twice = project_oo(embed_oo(once, decomp), decomp)
        np.testing.assert_allclose(twice.amplitudes, once.amplitudes, atol=1e-12)

    def test_basis_checked(self):
        decomp = parity_basis(8)
        oo_state = project_oo(coherent_state_at(8, FIXED_POINTS[0]), decomp)
        with pytest.raises(DimensionMismatchError):
            project_oo(oo_state, decomp)


class TestFootprint:
    def test_large_spin_limit(self):
        assert footprint_radius(480) == pytest.approx(2 / np.sqrt(480), rel=1e-3)

    def test_radius_decreases_with_spin(self):
        assert footprint_radius(120) > footprint_radius(480)

    def test_outline_overlap_is_one_over_e(self):
        J = 20
        center = FIXED_POINTS[0]
        outline = footprint_outline(J, center, n=8)
        assert len(outline) == 8
        a = coherent_state_at(J, center).amplitudes
        for p in outline:
            b = coherent_state_at(J, p).amplitudes
            assert abs(np.vdot(a, b)) == pytest.approx(np.exp(-1.0), rel=1e-9)

    def test_outline_on_sphere(self):
        for p in footprint_outline(120, ClassicalPoint(0.0, 0.0, 1.0), n=16):
            assert np.linalg.norm(p.as_array()) == pytest.approx(1.0, abs=1e-12)
