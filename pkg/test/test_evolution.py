import numpy as np
import pytest

from pyqkt.classical import CHAOTIC_SEED, FIXED_POINTS
from pyqkt.coherent import Basis, QuantumState, coherent_state_at, project_oo
from pyqkt.errors import DimensionMismatchError, InsufficientDataError, NumericalError
from pyqkt.evolution import (
    OverlapSeries,
    evolve,
    fidelity_batch,
    fidelity_series,
    overlap,
    plateau,
    saturation_report,
    settled_plateau,
    short_time_exponent,
)
from pyqkt.kicked_top import KickedTopSpec, build_qkt, oo_floquet, parity_basis
from pyqkt.nonextensive import DecayKind, classify_decay


def oo_state(J, point, renormalize=True):
    return project_oo(coherent_state_at(J, point), parity_basis(J), renormalize)


def random_state(rng, J):
    v = rng.normal(size=2 * J + 1) + 1j * rng.normal(size=2 * J + 1)
    return QuantumState(Basis.FULL, J, v / np.linalg.norm(v))


class TestOverlapSeries:
    def test_must_start_at_one(self):
        with pytest.raises(NumericalError):
            OverlapSeries.from_values([0.9, 0.5])

    def test_values_bounded(self):
        with pytest.raises(NumericalError):
            OverlapSeries.from_values([1.0, 1.5])

    def test_shapes_checked(self):
        with pytest.raises(DimensionMismatchError):
            OverlapSeries(np.arange(3), np.ones(2))


class TestEvolve:
    def test_zero_steps(self):
        U = oo_floquet(20, 3.0)
        state = oo_state(20, FIXED_POINTS[0])
        np.testing.assert_array_equal(evolve(U, state, 0).amplitudes, state.amplitudes)

    def test_norm_preserved(self):
        U = oo_floquet(40, 3.0)
        state = evolve(U, oo_state(40, CHAOTIC_SEED), 1000)
        assert state.norm == pytest.approx(1.0, abs=1e-10)

    def test_semigroup(self):
        U = oo_floquet(30, 3.0)
        state = oo_state(30, CHAOTIC_SEED)
        direct = evolve(U, state, 25)
        split = evolve(U, evolve(U, state, 10), 15)
        np.testing.assert_allclose(direct.amplitudes, split.amplitudes, atol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            evolve(oo_floquet(20, 3.0), oo_state(30, CHAOTIC_SEED), 1)


class TestOverlap:
    def test_self_overlap(self):
        state = oo_state(20, CHAOTIC_SEED)
        assert overlap(state, state) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        a = QuantumState(Basis.FULL, 1, np.array([1, 0, 0], dtype=complex))
        b = QuantumState(Basis.FULL, 1, np.array([0, 1, 0], dtype=complex))
        assert overlap(a, b) == 0.0

    def test_invariant_under_joint_evolution(self):
        rng = np.random.default_rng(7)
        J = 8
        U = build_qkt(KickedTopSpec(J))
        for _ in range(100):
            a, b = random_state(rng, J), random_state(rng, J)
            evolved = overlap(evolve(U, a, 5), evolve(U, b, 5))
            assert evolved == pytest.approx(overlap(a, b), abs=1e-10)

    def test_basis_mismatch(self):
        full = coherent_state_at(8, CHAOTIC_SEED)
        with pytest.raises(DimensionMismatchError):
            overlap(full, project_oo(full, parity_basis(8)))


class TestFidelity:
    def test_zero_perturbation_is_one(self):
        series = fidelity_series(KickedTopSpec(40, 3.0, 0.0), oo_state(40, CHAOTIC_SEED), 1000)
        assert len(series) == 1001
        np.testing.assert_allclose(series.values, 1.0, atol=1e-12)

    def test_metadata(self):
        spec = KickedTopSpec(20, 3.0, 0.01)
        series = fidelity_series(spec, oo_state(20, CHAOTIC_SEED), 10, (0.1, 0.2, 0.3))
        assert series.meta.J == 20 and series.meta.N == 10
        assert series.meta.delta == 0.01
        assert series.meta.point == (0.1, 0.2, 0.3)

    def test_batch_matches_single(self):
        spec = KickedTopSpec(30, 3.0, 0.02)
        states = [oo_state(30, p) for p in (CHAOTIC_SEED, FIXED_POINTS[0], FIXED_POINTS[1])]
        batch = fidelity_batch(spec, states, 200)
        for state, series in zip(states, batch):
            single = fidelity_series(spec, state, 200)
            np.testing.assert_allclose(series.values, single.values, atol=1e-12)

    def test_matches_explicit_evolution_in_both_orders(self):
        J, alpha, delta = 20, 3.0, 0.03
        state = oo_state(J, CHAOTIC_SEED)
        series = fidelity_series(KickedTopSpec(J, alpha, delta), state, 40)
        U, V = oo_floquet(J, alpha), oo_floquet(J, alpha + delta)
        for n in (1, 17, 40):
            a, b = evolve(U, state, n), evolve(V, state, n)
            assert overlap(a, b) == pytest.approx(series.values[n], abs=1e-12)
            assert overlap(b, a) == pytest.approx(series.values[n], abs=1e-12)

    def test_unrenormalised_state(self):
        spec = KickedTopSpec(20, 3.0, 0.05)
        state = oo_state(20, FIXED_POINTS[0], renormalize=False)
        series = fidelity_series(spec, state, 50)
        assert series.values[0] == pytest.approx(1.0, abs=1e-12)
        assert series.meta.weight == pytest.approx(state.weight)

    def test_rejects_full_basis_state(self):
        with pytest.raises(DimensionMismatchError):
            fidelity_series(KickedTopSpec(8), coherent_state_at(8, CHAOTIC_SEED), 5)

    def test_fixed_point_stays_close_to_one(self):
        series = fidelity_series(
            KickedTopSpec(480, 3.0, 0.005), oo_state(480, FIXED_POINTS[0]), 300
        )
        assert series.values.min() > 0.8

    @pytest.mark.slow
    @pytest.mark.parametrize("fixed", FIXED_POINTS)
    def test_fixed_point_state_is_regular(self, fixed):
        series = fidelity_series(KickedTopSpec(480, 3.0, 0.005), oo_state(480, fixed), 3000)
        assert series.values[:301].min() > 0.8
        assert classify_decay(series).kind is DecayKind.REGULAR

    @pytest.mark.slow
    def test_chaotic_state_decay(self):
        series = fidelity_series(KickedTopSpec(480, 3.0, 0.005), oo_state(480, CHAOTIC_SEED), 3000)
        assert short_time_exponent(series) == pytest.approx(2.0, abs=0.2)
        assert classify_decay(series).kind is DecayKind.EXPONENTIAL
        report = saturation_report(series, 240)
        assert report.plateau < 0.05


class TestPlateau:
    def test_constant_tail(self):
        series = OverlapSeries.from_values([1.0] + [0.25] * 99)
        assert plateau(series, 0.2) == pytest.approx(0.25)

    def test_unperturbed(self):
        series = OverlapSeries.from_values(np.ones(50))
        assert plateau(series) == 1.0

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            plateau(OverlapSeries.from_values([1.0, 0.5, 0.4]))

    def test_settled_noisy_tail(self):
        rng = np.random.default_rng(3)
        values = np.concatenate(([1.0, 0.5], 0.02 + 0.01 * rng.random(498)))
        assert settled_plateau(OverlapSeries.from_values(values)) == pytest.approx(0.025, abs=0.002)

    def test_still_decaying_tail(self):
        t = np.arange(1001, dtype=float)
        series = OverlapSeries.from_values(1.0 / (1.0 + t / 100.0))
        assert settled_plateau(series) is None

    def test_saturation_report(self):
        series = OverlapSeries.from_values([1.0] + [0.011] * 99)
        report = saturation_report(series, 100)
        assert report.inverse_n == 0.01
        assert report.inverse_sqrt_n == 0.1
        assert report.nearest == "1/N"

    def test_short_time_exponent(self):
        t = np.arange(50)
        series = OverlapSeries.from_values(1.0 - 1e-4 * t**2)
        assert short_time_exponent(series) == pytest.approx(2.0, abs=1e-6)
