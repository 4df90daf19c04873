"""
pyqkt - exemple d'utilisation

Toupie pulsée à J = 120 : recouvrement d'un état au point fixe et d'un état
dans la mer chaotique, puis balayage du bord et ajustement q-exponentiel de
l'état trouvé (décalage publié en repli).
"""
import pyqkt
from pyqkt import console
from pyqkt.edge import edge_state_point, scan_edge
from pyqkt.errors import EdgeNotFoundError
from pyqkt.evolution import fidelity_batch
from pyqkt.kicked_top import critical_perturbation

J = 120
ALPHA = 3.0


def oo_state(point):
    return pyqkt.project_oo(pyqkt.coherent_state_at(J, point), pyqkt.parity_basis(J))


def overlap_decay():
    spec = pyqkt.KickedTopSpec(J, ALPHA, 0.01)
    stats = pyqkt.perturbation_stats(spec)
    console.info(f"J={J}: N={stats.N}, delta_c={stats.delta_c:.3e}, regime={stats.regime.value}")

    states = {"fixed point": pyqkt.FIXED_POINTS[0], "chaotic": pyqkt.CHAOTIC_SEED}
    series = fidelity_batch(spec, [oo_state(p) for p in states.values()], 1000)
    for name, s in zip(states, series):
        decay = pyqkt.classify_decay(s)
        console.info(f"{name}: O(1000)={s.values[-1]:.4f}, decay {decay.label()}")


def edge_point():
    try:
        return scan_edge(J, ALPHA, 0.01, workers=4).edge_point
    except EdgeNotFoundError as exc:
        console.warning(f"{exc}; falling back to the published offset")
        return edge_state_point(J)


def edge_state_fit():
    point = edge_point()
    delta = 0.5 * critical_perturbation(J // 2)
    spec = pyqkt.KickedTopSpec(J, ALPHA, delta)
    series = pyqkt.fidelity_series(spec, oo_state(point), 3000)
    decay = pyqkt.classify_decay(series)
    if decay.qexp is None:
        console.warning(f"edge state at z={point.z:.3f}: no q-exponential fit ({decay.label()})")
        return
    console.success(
        f"edge state at z={point.z:.3f}, delta={delta:.2e}: "
        f"q_rel={decay.qexp.q_rel:.2f}, tau={decay.qexp.tau:.0f}"
    )


def main():
    pyqkt.configure_console(verbose=False)
    console.info(f"pyqkt {pyqkt.__version__}")
    overlap_decay()
    edge_state_fit()


if __name__ == "__main__":
    main()
