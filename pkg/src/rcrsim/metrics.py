"""Occupation probabilities, concurrences, ideal gates, gate fidelity."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .system import COMP_LABELS, LabeledBasis

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class QubitAmplitudes:
    """Complex amplitudes of the four dressed computational states."""

    c: np.ndarray      # shape (4,), ordered |00>, |01>, |10>, |11>
    leakage: float     # population outside the computational subspace

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.c) ** 2

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.c)


def project_amplitudes(state: np.ndarray, basis: LabeledBasis):
    """Computational-subspace content of a state.

    Pure states give QubitAmplitudes; density matrices give the reduced
    4x4 block together with its leakage.
    """
    v = basis.vectors
    if state.ndim == 1:
        c = v.conj().T @ state
        leakage = float(np.linalg.norm(state) ** 2 - np.linalg.norm(c) ** 2)
        return QubitAmplitudes(c=c, leakage=leakage)
    block = v.conj().T @ state @ v
    leakage = float(np.trace(state).real - np.trace(block).real)
    return block, leakage


def amplitude_moduli(state: np.ndarray, basis: LabeledBasis) -> np.ndarray:
    """|c_k| for pure states; sqrt of populations for density matrices."""
    if state.ndim == 1:
        return project_amplitudes(state, basis).moduli
    block, _ = project_amplitudes(state, basis)
    return np.sqrt(np.clip(np.diag(block).real, 0.0, None))


def concurrence_pair(amps: QubitAmplitudes | np.ndarray, branch: str) -> float:
    """2|c00||c01| (branch 'zero') or 2|c10||c11| (branch 'one')."""
    m = amps.moduli if isinstance(amps, QubitAmplitudes) else np.asarray(amps)
    if branch == "zero":
        return float(2.0 * m[0] * m[1])
    if branch == "one":
        return float(2.0 * m[2] * m[3])
    raise ValueError(f"unknown branch {branch!r}")


def concurrence_plus(amps: QubitAmplitudes | np.ndarray) -> float:
    """16 |c00||c01||c10||c11|: unity exactly at the ideal entangled output."""
    m = amps.moduli if isinstance(amps, QubitAmplitudes) else np.asarray(amps)
    return float(16.0 * np.prod(m[:4]))


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def zx90() -> np.ndarray:
    """The ideal half-ZX cross-resonance gate."""
    return np.array([[1, -1j, 0, 0],
                     [-1j, 1, 0, 0],
                     [0, 0, 1, 1j],
                     [0, 0, 1j, 1]], dtype=complex) / SQRT2


def cnot_from_zx90() -> np.ndarray:
    """CNOT as rz(-pi/2) x I, then half-ZX, then I x rx(-pi/2)."""
    pre = np.kron(np.eye(2), rx(-math.pi / 2))
    post = np.kron(rz(-math.pi / 2), np.eye(2))
    return post @ zx90() @ pre


SINGLE_QUBIT_STATES = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / SQRT2,
    "-": np.array([1.0, 1j], dtype=complex) / SQRT2,
}


def sixteen_initial_states() -> list[np.ndarray]:
    """{|0>,|1>,|+>,|->}x{...} product states as 4-vectors, A x B order."""
    out = []
    for ka, kb in itertools.product("01+-", repeat=2):
        out.append(np.kron(SINGLE_QUBIT_STATES[ka], SINGLE_QUBIT_STATES[kb]))
    return out


def state_fidelity(target: np.ndarray, actual) -> float:
    """|<t|a>|^2 for pure states, <t|rho|t> for density blocks."""
    actual = np.asarray(actual)
    if actual.ndim == 1:
        return float(np.abs(np.vdot(target, actual)) ** 2)
    return float(np.real(np.vdot(target, actual @ target)))


def gate_block(run: Callable[[np.ndarray], np.ndarray],
               basis: LabeledBasis) -> np.ndarray:
    """4x4 computational block of a linear protocol.

    Evolves the four dressed basis states once; any computational initial
    state then follows by linearity.
    """
    cols = []
    for label in COMP_LABELS:
        final = run(basis.vector(label).astype(complex))
        cols.append(basis.vectors.conj().T @ final)
    return np.column_stack(cols)


def average_gate_fidelity(run: Callable[[np.ndarray], np.ndarray],
                          basis: LabeledBasis,
                          grid_points: int = 16) -> tuple[float, dict]:
    """Mean fidelity of a protocol against the ideal half-ZX gate.

    Averages over the sixteen single-qubit product initial states, maximized
    over the drive phase and final Z-rotation angles on both qubits (coarse
    grid then derivative-free refinement).  Returns (fbar, info).
    """
    block = gate_block(run, basis)
    target_gate = zx90()
    initials = sixteen_initial_states()
    targets = [target_gate @ s for s in initials]

    phi_qa = np.array([0, 0, 1, 1])
    phi_qb = np.array([0, 1, 0, 1])

    def fbar(params: np.ndarray) -> float:
        theta_a, theta_b, phi = params
        # drive-phase frame change: conjugate the block by sector phases
        zphi = np.exp(1j * phi * (phi_qa + phi_qb))
        phases = np.exp(1j * (theta_a * phi_qa + theta_b * phi_qb)) * zphi.conj()
        total = 0.0
        for init, tgt in zip(initials, targets):
            vec = phases * (block @ (zphi * init))
            total += np.abs(np.vdot(tgt, vec)) ** 2
        return total / 16.0

    grid = np.linspace(0.0, 2.0 * math.pi, grid_points, endpoint=False)
    best_val, best_params = -1.0, None
    for ta in grid:
        for tb in grid:
            for ph in grid:
                val = fbar(np.array([ta, tb, ph]))
                if val > best_val:
                    best_val, best_params = val, np.array([ta, tb, ph])
    res = minimize(lambda p: -fbar(p), best_params, method="Nelder-Mead",
                   options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 2000})
    converged = bool(res.success)
    info = {"theta_a": res.x[0], "theta_b": res.x[1], "phi": res.x[2],
            "converged": converged, "grid_best": best_val}
    return float(max(best_val, -res.fun)), info
