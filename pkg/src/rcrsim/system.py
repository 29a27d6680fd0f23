"""Truncated Hilbert space, static Hamiltonian, dressed basis, collapse ops.

Basis ordering is qubit A, qubit B, then cable modes ascending in m.  Each
basis state is the tuple ``(n_A, n_B, n_m1, n_m2, ...)``; states are sorted
lexicographically and the ordering is part of the module contract so state
dumps stay comparable between runs.

Besides the per-mode photon cap ``n_max``, an optional cap on the total
excitation number ``n_total`` can be set.  Protocols in this package start
from at most two excitations and the drive adds or removes one quantum at a
time against detunings much larger than the drive amplitude, so a moderate
total cap leaves results unchanged (regression-tested) while shrinking the
space by orders of magnitude.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .path import PathGeometry, ModeDissipation, TWO_PI

OVERLAP_THRESHOLD = 1.0 / math.sqrt(2.0)

COMP_LABELS = ("00", "01", "10", "11")


class IllDefinedBasisError(ValueError):
    """A dressed computational state cannot be labeled unambiguously."""


def default_window(M: int, delta_a: float, delta_b: float) -> tuple[int, int]:
    """Mode window with two cable modes beyond each qubit frequency.

    Qubit A sits ``delta_a`` free spectral ranges above mode M and qubit B
    ``delta_b`` below, so the window must grow with the detunings.
    """
    return (M - int(math.floor(delta_b)) - 2, M + int(math.floor(delta_a)) + 2)


@dataclass(frozen=True)
class SystemSpec:
    """Two qubits coupled to a window of cable standing-wave modes."""

    geometry: PathGeometry
    delta_A: float  # signed qubit-A detuning from omega_M (rad/s)
    delta_B: float  # signed qubit-B detuning from omega_M (rad/s)
    g_A: float      # qubit A <-> anchor-mode coupling (rad/s)
    g_B: float      # qubit B <-> anchor-mode coupling (rad/s)
    M_min: int
    M_max: int
    n_max: int = 3          # photon cap per cable mode
    n_total: int | None = 5  # optional total-excitation cap (None = no cap)

    def __post_init__(self) -> None:
        if not (self.M_min <= self.geometry.M <= self.M_max):
            raise ValueError("mode window must contain the anchor mode M")
        if self.M_max - self.M_min < 2:
            raise ValueError("mode window must span at least three modes")
        if self.M_min < 1:
            raise ValueError("mode indices must be positive")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.n_total is not None and self.n_total < 2:
            raise ValueError("n_total must be >= 2 (computational states reach 2)")
        fsr = self.geometry.omega_fsr
        for name, value in (("delta_A", self.delta_A), ("delta_B", self.delta_B)):
            frac = abs(value) / fsr
            if abs(frac - round(frac)) < 1e-9:
                raise ValueError(
                    f"{name} sits on a cable-mode resonance; the qubit state "
                    "is not well defined there")

    @classmethod
    def from_fractional(cls, geometry: PathGeometry, delta_a: float,
                        delta_b: float, g_ghz: float,
                        window: tuple[int, int] | None = None,
                        n_max: int = 3, n_total: int | None = 5) -> "SystemSpec":
        """Spec from the dimensionless detunings used throughout the protocols.

        ``delta_a`` and ``delta_b`` are |detuning|/omega_fsr; qubit A sits
        above the anchor mode and qubit B below it.  The default mode
        window keeps two cable modes above the upper qubit and two below
        the lower one.
        """
        fsr = geometry.omega_fsr
        if window is None:
            window = default_window(geometry.M, delta_a, delta_b)
        g = TWO_PI * g_ghz * 1e9
        return cls(geometry=geometry, delta_A=delta_a * fsr, delta_B=-delta_b * fsr,
                   g_A=g, g_B=g, M_min=window[0], M_max=window[1],
                   n_max=n_max, n_total=n_total)

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(range(self.M_min, self.M_max + 1))

    @property
    def n_modes(self) -> int:
        return self.M_max - self.M_min + 1


@dataclass(frozen=True)
class LabeledBasis:
    """Dressed computational basis: four labeled eigenvectors of H0."""

    labels: tuple[str, ...]          # ("00", "01", "10", "11")
    vectors: np.ndarray              # (dim, 4), columns ordered as labels
    energies: np.ndarray             # (4,) eigenvalues in the rotating frame
    overlaps: np.ndarray             # (4,) |<bare state x vacuum | dressed>|
    eigenvalues: np.ndarray          # full spectrum of H0
    eigenvectors: np.ndarray         # full eigenvector matrix

    def vector(self, label: str) -> np.ndarray:
        return self.vectors[:, self.labels.index(label)]

    def energy(self, label: str) -> float:
        return float(self.energies[self.labels.index(label)])

    def dressed_frequency(self, qubit: str, omega_M: float) -> float:
        """Absolute dressed qubit frequency (rad/s); qubit is 'A' or 'B'."""
        label = "10" if qubit == "A" else "01"
        return self.energy(label) + omega_M


def basis_states(spec: SystemSpec) -> list[tuple[int, ...]]:
    """All occupation tuples (n_A, n_B, modes...) within the truncations."""
    cap = spec.n_total if spec.n_total is not None else 2 + spec.n_modes * spec.n_max
    states = []
    for qa, qb in itertools.product((0, 1), (0, 1)):
        for ns in itertools.product(range(spec.n_max + 1), repeat=spec.n_modes):
            if qa + qb + sum(ns) <= cap:
                states.append((qa, qb) + ns)
    states.sort()
    return states


@dataclass(frozen=True)
class Operators:
    """Sparse operator set on the truncated space for one SystemSpec."""

    states: tuple[tuple[int, ...], ...]
    lower_A: sp.csr_matrix
    lower_B: sp.csr_matrix
    lower_modes: tuple[sp.csr_matrix, ...]  # ascending m
    number_diag: np.ndarray                 # total excitation per basis state

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def number_op(self) -> sp.csr_matrix:
        return sp.diags(self.number_diag.astype(float)).tocsr()


def _lowering(states: list[tuple[int, ...]], index: dict, site: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for s in states:
        n = s[site]
        if n > 0:
            target = s[:site] + (n - 1,) + s[site + 1:]
            if target in index:
                rows.append(index[target])
                cols.append(index[s])
                vals.append(math.sqrt(n))
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(states), len(states)))


@lru_cache(maxsize=32)
def build_operators(spec: SystemSpec) -> Operators:
    states = basis_states(spec)
    index = {s: i for i, s in enumerate(states)}
    ops = [_lowering(states, index, site) for site in range(2 + spec.n_modes)]
    return Operators(
        states=tuple(states),
        lower_A=ops[0],
        lower_B=ops[1],
        lower_modes=tuple(ops[2:]),
        number_diag=np.array([sum(s) for s in states]),
    )


@lru_cache(maxsize=32)
def build_h0(spec: SystemSpec) -> sp.csr_matrix:
    """Static Hamiltonian in the frame rotating at the anchor mode.

    Couplings carry the multimode sqrt(omega_m / omega_M) scaling and the
    alternating (-1)^m sign on the B side set by the standing-wave parity at
    the two ends of the path.
    """
    ops = build_operators(spec)
    sA, sB = ops.lower_A, ops.lower_B
    fsr = spec.geometry.omega_fsr
    M = spec.geometry.M
    h = spec.delta_A * (sA.T @ sA) + spec.delta_B * (sB.T @ sB)
    for k, m in enumerate(spec.modes):
        sm = ops.lower_modes[k]
        scale = math.sqrt(m * fsr / spec.geometry.omega_M)
        h = h + (m - M) * fsr * (sm.T @ sm)
        # Order each hop so the intermediate state sits below the total
        # excitation cap: the product then keeps every matrix element that
        # connects two retained states, and hop + hop.T is exactly Hermitian.
        hop_a = sA.T @ sm
        hop_b = sB.T @ sm
        h = h + spec.g_A * scale * (hop_a + hop_a.T)
        h = h + (-1) ** m * spec.g_B * scale * (hop_b + hop_b.T)
    return h.tocsr()


def hermiticity_defect(op: sp.spmatrix) -> float:
    diff = (op - op.T.conj()).tocsr()
    norm = sp.linalg.norm(op)
    return sp.linalg.norm(diff) / norm if norm else 0.0


@lru_cache(maxsize=32)
def dressed_basis(spec: SystemSpec) -> LabeledBasis:
    """Label the four computational eigenstates of H0 by maximum bare overlap."""
    ops = build_operators(spec)
    h0 = build_h0(spec)
    evals, evecs = np.linalg.eigh(h0.toarray())
    index = {s: i for i, s in enumerate(ops.states)}
    vacuum = (0,) * spec.n_modes
    vectors, energies, overlaps = [], [], []
    for label in COMP_LABELS:
        bare = index[(int(label[0]), int(label[1])) + vacuum]
        row = np.abs(evecs[bare, :])
        k = int(np.argmax(row))
        if row[k] <= OVERLAP_THRESHOLD:
            raise IllDefinedBasisError(
                f"dressed |{label}> is ill-defined: best bare overlap "
                f"{row[k]:.4f} <= {OVERLAP_THRESHOLD:.4f}")
        vec = evecs[:, k] * np.sign(evecs[bare, k].real)  # fix gauge
        vectors.append(vec)
        energies.append(evals[k])
        overlaps.append(row[k])
    return LabeledBasis(
        labels=COMP_LABELS,
        vectors=np.column_stack(vectors),
        energies=np.array(energies),
        overlaps=np.array(overlaps),
        eigenvalues=evals,
        eigenvectors=evecs,
    )


def collapse_operators(spec: SystemSpec,
                       dissipation: list[ModeDissipation]) -> list[sp.csr_matrix]:
    """Amplitude-damping collapse operator sqrt(1/T_m) sigma_m per cable mode.

    Qubit decoherence is deliberately absent: only the path dissipates.
    Infinite relaxation times contribute no operator.
    """
    by_mode = {d.m: d for d in dissipation}
    missing = [m for m in spec.modes if m not in by_mode]
    if missing:
        raise ValueError(f"missing dissipation entries for modes {missing}")
    ops = build_operators(spec)
    out = []
    for k, m in enumerate(spec.modes):
        t_m = by_mode[m].T_m
        if math.isinf(t_m):
            continue
        out.append((math.sqrt(1.0 / t_m) * ops.lower_modes[k]).tocsr())
    return out
