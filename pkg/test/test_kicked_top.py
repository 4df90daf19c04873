import numpy as np
import pytest

from pyqkt.errors import ConfigError, UnsupportedSpinError
from pyqkt.kicked_top import (
    KickedTopSpec,
    Regime,
    block_residual,
    build_qkt,
    critical_perturbation,
    oo_block,
    oo_floquet,
    parity_basis,
    perturbation_operator_oo,
    perturbation_stats,
)

# δ_c de référence (3 chiffres significatifs)
REFERENCE_DELTA_C = {
    120: 5.39e-3,
    150: 3.86e-3,
    180: 2.94e-3,
    210: 2.33e-3,
    240: 1.91e-3,
    280: 1.51e-3,
    360: 1.04e-3,
    480: 6.74e-4,
}


class TestKickedTopSpec:
    def test_defaults(self):
        spec = KickedTopSpec(240)
        assert spec.alpha == 3.0 and spec.delta == 0.0
        assert spec.n_oo == 120

    def test_odd_spin_rejected(self):
        with pytest.raises(UnsupportedSpinError):
            KickedTopSpec(7)

    def test_negative_delta_rejected(self):
        with pytest.raises(ConfigError):
            KickedTopSpec(8, 3.0, -0.1)

    def test_infinite_alpha_rejected(self):
        with pytest.raises(ConfigError):
            KickedTopSpec(8, np.inf)

    def test_perturbed(self):
        spec = KickedTopSpec(8, 3.0, 0.25).perturbed()
        assert spec.alpha == 3.25 and spec.delta == 0.0


class TestFloquet:
    @pytest.mark.parametrize("J", [8, 120, 480])
    def test_unitary(self, J):
        assert build_qkt(KickedTopSpec(J)).unitarity_residual() < 1e-10

    def test_dimension(self):
        assert build_qkt(KickedTopSpec(240)).dim == 481

    def test_zero_perturbation_is_identical(self):
        spec = KickedTopSpec(40, 3.0, 0.0)
        np.testing.assert_array_equal(
            build_qkt(spec.perturbed()).entries, build_qkt(spec).entries
        )


class TestParityBasis:
    def test_block_dims(self):
        assert parity_basis(4).block_dims == (3, 2, 4)
        assert sum(parity_basis(40).block_dims) == 81

    def test_oo_first_column(self):
        J = 4
        column = parity_basis(J).columns("oo")[:, 0]
        expected = np.zeros(2 * J + 1)
        expected[J - 1] = 1 / np.sqrt(2)
        expected[J + 1] = -1 / np.sqrt(2)
        np.testing.assert_allclose(column, expected)

    def test_orthonormal(self):
        T = parity_basis(30).T.entries
        np.testing.assert_allclose(T.conj().T @ T, np.eye(61), atol=1e-12)

    def test_odd_spin_rejected(self):
        with pytest.raises(UnsupportedSpinError):
            parity_basis(5)

    def test_read_only(self):
        with pytest.raises(ValueError):
            parity_basis(6).T.entries[0, 0] = 2.0

    @pytest.mark.parametrize("J", [8, 120, 240, 480])
    def test_block_diagonal(self, J):
        U = build_qkt(KickedTopSpec(J))
        assert block_residual(U, parity_basis(J)) < 1e-10

    def test_oo_block(self):
        block = oo_block(build_qkt(KickedTopSpec(8)), parity_basis(8))
        assert block.dim == 4
        assert block.unitarity_residual() < 1e-10

    def test_oo_floquet_cached(self):
        assert oo_floquet(12, 3.0) is oo_floquet(12, 3.0)
        assert oo_floquet(12, 3.0).dim == 6

    def test_perturbation_operator_hermitian(self):
        V = perturbation_operator_oo(parity_basis(10))
        assert V.shape == (5, 5)
        np.testing.assert_allclose(V, V.conj().T, atol=1e-14)
        # |2m-1> et |1-2m> portent m² / 2J
        np.testing.assert_allclose(np.diag(V).real, [(2 * k - 1) ** 2 / 20 for k in range(1, 6)])


class TestPerturbationStats:
    @pytest.mark.parametrize("J", sorted(REFERENCE_DELTA_C))
    def test_critical_perturbation_matches_table(self, J):
        value = critical_perturbation(J // 2)
        assert float(f"{value:.3g}") == pytest.approx(REFERENCE_DELTA_C[J])

    def test_zero_delta_is_weak(self):
        stats = perturbation_stats(KickedTopSpec(20, 3.0, 0.0))
        assert stats.sigma == 0.0
        assert stats.regime is Regime.WEAK

    def test_exact_formulas(self):
        stats = perturbation_stats(KickedTopSpec(40, 3.0, 1e-3))
        assert stats.N == 20
        assert stats.level_spacing == 2 * np.pi / 20
        assert stats.delta_c == np.sqrt(2 * np.pi / 20**3)

    def test_regimes(self):
        weak = perturbation_stats(KickedTopSpec(40, 3.0, 1e-6))
        strong = perturbation_stats(KickedTopSpec(40, 3.0, 50.0))
        assert weak.regime is Regime.WEAK
        assert strong.regime is Regime.FGR
        assert strong.sigma > strong.level_spacing
