"""Time evolution under the pulsed Hamiltonian, unitary and Lindblad.

Integration happens in the frame co-rotating with the drive: because the
static Hamiltonian commutes with the total excitation number, shifting it by
the drive detuning times the number operator removes the explicit drive
oscillation exactly (no additional approximation), leaving only the slow
envelope as time dependence.  Sampled states are transformed back to the
anchor-mode rotating frame before being returned.

Echo pi rotations act on the dressed computational subspace in the
interaction picture of H0: the swapped amplitudes are rephased by the free
dressed-state evolution at the event time.  A bare-basis X would leak several
percent of the population per pulse at these coupling strengths and could not
reproduce ideal-gate concurrences; see apply_pi_x_A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .pulses import (ECHOED, LAB_FULL_COSINE, PulseProgram, drive_operator,
                     envelope)
from .system import COMP_LABELS, LabeledBasis, SystemSpec, build_h0, build_operators, dressed_basis

DEFAULT_SAMPLE_PERIOD = 0.1e-9
UNITARY_RTOL = 1e-9
LINDBLAD_RTOL = 1e-8


class IntegrationError(RuntimeError):
    """The step controller could not meet the requested tolerance."""


@dataclass
class Trajectory:
    """Ordered state samples over [0, tau] in the anchor-mode frame."""

    times: np.ndarray
    states: np.ndarray         # (nt, dim) pure amplitudes or (nt, dim, dim) density
    kind: str                  # "pure" | "density"

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _gershgorin_bound(h: sp.csr_matrix) -> float:
    h = h.tocsr()
    return float(np.max(np.abs(h).sum(axis=1)))


def _max_step(h_static: sp.csr_matrix, omega_0: float) -> float:
    """Step cap: half a period of the fastest frequency scale.

    The adaptive controller resolves the dynamics on its own; the cap only
    keeps the first trial steps from skipping over a pulse ramp.  Tighter
    caps (a twentieth of a period) were tried and only accumulate more
    roundoff and local truncation error over the ~1e4 extra steps.
    """
    omega_max = _gershgorin_bound(h_static) + omega_0
    return 2.0 * math.pi / (2.0 * omega_max)


def pi_x_matrix(basis: LabeledBasis, t: float) -> np.ndarray:
    """Dressed-subspace pi_x on qubit A in the H0 interaction picture.

    Swaps the |0b> and |1b> dressed amplitudes with the relative phase the
    free evolution has accumulated by time t; identity on the leakage
    complement.  Unitary, norm preserving.
    """
    dim = basis.vectors.shape[0]
    x = np.eye(dim, dtype=complex)
    for a, b in (("00", "10"), ("01", "11")):
        va, vb = basis.vector(a), basis.vector(b)
        ea, eb = basis.energy(a), basis.energy(b)
        x -= np.outer(va, va.conj()) + np.outer(vb, vb.conj())
        x += np.exp(-1j * (ea - eb) * t) * np.outer(va, vb.conj())
        x += np.exp(-1j * (eb - ea) * t) * np.outer(vb, va.conj())
    return x


def apply_pi_x_A(state: np.ndarray, basis: LabeledBasis, t: float = 0.0) -> np.ndarray:
    """Ideal pi rotation about x of qubit A, for pure or density states."""
    x = pi_x_matrix(basis, t)
    if state.ndim == 1:
        return x @ state
    return x @ state @ x.conj().T


def bare_pi_x_matrix(spec: SystemSpec) -> sp.csr_matrix:
    """X on qubit A's bare tensor factor (retained for comparison tests)."""
    ops = build_operators(spec)
    return (ops.lower_A + ops.lower_A.T).tocsr()


def _frame_phases(spec: SystemSpec, detuning: float, t: float) -> np.ndarray:
    """Diagonal of the drive-frame -> anchor-frame transformation at time t."""
    ndiag = build_operators(spec).number_diag
    return np.exp(-1j * detuning * t * ndiag)


def _sample_times(t0: float, t1: float, sample_period: float | None) -> np.ndarray:
    if sample_period is None:
        return np.array([t0, t1])
    n = max(int(math.floor((t1 - t0) / sample_period)), 1)
    ts = t0 + sample_period * np.arange(n + 1)
    if ts[-1] < t1 - 1e-15:
        ts = np.append(ts, t1)
    else:
        ts[-1] = t1
    return ts


def evolve_unitary(spec: SystemSpec, program: PulseProgram, psi0: np.ndarray,
                   sample_period: float | None = None,
                   rtol: float = UNITARY_RTOL,
                   basis: LabeledBasis | None = None) -> Trajectory:
    """Integrate the Schroedinger equation over one pulse program.

    ``psi0`` is given in the anchor-mode rotating frame; so are the returned
    samples.  Echo events are applied as exact gates at their times.
    """
    norm0 = np.linalg.norm(psi0)
    if abs(norm0 - 1.0) > 1e-8:
        raise ValueError("psi0 must be normalized")
    if program.frame == LAB_FULL_COSINE:
        return _evolve_lab_frame(spec, program, psi0, sample_period, rtol, basis)
    if basis is None and program.shape == ECHOED:
        basis = dressed_basis(spec)

    h0 = build_h0(spec)
    ops = build_operators(spec)
    detuning = program.drive_freq - spec.geometry.omega_M
    h_static = (h0 - detuning * ops.number_op).tocsr()
    v = (0.5 * drive_operator(spec)).tocsr()
    phase = complex(np.exp(1j * program.drive_phase))
    v_re = (0.5 * (phase * ops.lower_A + np.conj(phase) * ops.lower_A.T)).tocsr()
    max_step = _max_step(h_static, program.omega_0)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        amp = envelope(t, program)
        out = h_static @ y
        if amp:
            out = out + amp * (v_re @ y)
        return -1j * out

    times_all, states_all = [], []
    psi = psi0.astype(complex) / norm0  # drive frame == anchor frame at t=0
    for k, (t0, t1) in enumerate(program.segments):
        ts = _sample_times(t0, t1, sample_period)
        sol = solve_ivp(rhs, (t0, t1), psi, t_eval=ts, method="DOP853",
                        rtol=rtol, atol=rtol * 1e-3, max_step=max_step)
        if not sol.success:
            raise IntegrationError(f"unitary integration failed: {sol.message}")
        seg_states = sol.y.T
        phases = np.exp(-1j * detuning
                        * np.outer(ts, ops.number_diag))
        back = seg_states * phases
        start = 1 if times_all else 0
        times_all.extend(ts[start:])
        states_all.extend(back[start:])
        psi = seg_states[-1]
        for event in program.echo_events:
            if abs(event.time - t1) < 1e-15:
                # apply in the anchor frame, then return to the drive frame
                ph = _frame_phases(spec, detuning, t1)
                psi = apply_pi_x_A(ph * psi, basis, t1) / ph
                states_all[-1] = ph * psi
    norms = np.linalg.norm(states_all, axis=1)
    drift_tol = max(1e-7, 1e5 * rtol)  # local error accumulates over steps
    if np.max(np.abs(norms - 1.0)) > drift_tol:
        raise IntegrationError(
            f"norm drift {np.max(np.abs(norms - 1.0)):.2e} exceeds tolerance")
    return Trajectory(times=np.asarray(times_all),
                      states=np.asarray(states_all), kind="pure")


def _evolve_lab_frame(spec: SystemSpec, program: PulseProgram, psi0: np.ndarray,
                      sample_period: float | None, rtol: float,
                      basis: LabeledBasis | None) -> Trajectory:
    """Validation mode: full-cosine drive on H0 + omega_M N, no RWA."""
    if basis is None and program.shape == ECHOED:
        basis = dressed_basis(spec)
    h0 = build_h0(spec)
    ops = build_operators(spec)
    omega_M = spec.geometry.omega_M
    h_lab = (h0 + omega_M * ops.number_op).tocsr()
    x_op = drive_operator(spec)
    max_step = _max_step(h_lab, program.omega_0)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        amp = envelope(t, program) * math.cos(program.drive_freq * t
                                              + program.drive_phase)
        out = h_lab @ y
        if amp:
            out = out + amp * (x_op @ y)
        return -1j * out

    times_all, states_all = [], []
    psi = psi0.astype(complex)
    for t0, t1 in program.segments:
        ts = _sample_times(t0, t1, sample_period)
        sol = solve_ivp(rhs, (t0, t1), psi, t_eval=ts, method="DOP853",
                        rtol=rtol, atol=rtol * 1e-3, max_step=max_step)
        if not sol.success:
            raise IntegrationError(f"lab-frame integration failed: {sol.message}")
        seg_states = sol.y.T
        # back to the anchor-mode rotating frame
        phases = np.exp(1j * omega_M * np.outer(ts, ops.number_diag))
        back = seg_states * phases
        start = 1 if times_all else 0
        times_all.extend(ts[start:])
        states_all.extend(back[start:])
        psi = seg_states[-1]
        for event in program.echo_events:
            if abs(event.time - t1) < 1e-15:
                ph = np.exp(1j * omega_M * t1 * ops.number_diag)
                psi_rot = apply_pi_x_A(ph * psi, basis, t1)
                psi = psi_rot / ph
                states_all[-1] = psi_rot
    return Trajectory(times=np.asarray(times_all),
                      states=np.asarray(states_all), kind="pure")


def evolve_lindblad(spec: SystemSpec, program: PulseProgram,
                    collapse: list[sp.csr_matrix], rho0: np.ndarray,
                    sample_period: float | None = None,
                    rtol: float = LINDBLAD_RTOL,
                    basis: LabeledBasis | None = None) -> Trajectory:
    """Integrate the Lindblad master equation over one pulse program.

    The collapse operators are invariant (up to an irrelevant phase) under
    the drive-frame transformation, so the same stiffness-free frame is used
    as for unitary evolution.
    """
    _check_density(rho0)
    if program.frame == LAB_FULL_COSINE:
        raise ValueError("lab-frame validation is only provided for pure states")
    if basis is None and program.shape == ECHOED:
        basis = dressed_basis(spec)
    h0 = build_h0(spec)
    ops = build_operators(spec)
    dim = ops.dim
    detuning = program.drive_freq - spec.geometry.omega_M
    h_static = (h0 - detuning * ops.number_op).tocsr()
    phase = complex(np.exp(1j * program.drive_phase))
    v_re = (0.5 * (phase * ops.lower_A + np.conj(phase) * ops.lower_A.T)).tocsr()
    ls = [l.tocsr() for l in collapse]
    l_dags = [l.conj().T.tocsr() for l in ls]
    ldl_half = sum((0.5 * (ld @ l) for l, ld in zip(ls, l_dags)),
                   sp.csr_matrix((dim, dim))).tocsr()
    max_step = _max_step(h_static, program.omega_0)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        rho = y.reshape(dim, dim)
        amp = envelope(t, program)
        h = h_static if not amp else (h_static + amp * v_re)
        out = -1j * (h @ rho - (h @ rho.conj().T).conj().T)
        for l, ld in zip(ls, l_dags):
            out = out + l @ (rho @ ld)
        anti = ldl_half @ rho
        out = out - anti - anti.conj().T
        return out.ravel()

    times_all, states_all = [], []
    rho = rho0.astype(complex)
    for t0, t1 in program.segments:
        ts = _sample_times(t0, t1, sample_period)
        sol = solve_ivp(rhs, (t0, t1), rho.ravel(), t_eval=ts, method="DOP853",
                        rtol=rtol, atol=rtol * 1e-3, max_step=max_step)
        if not sol.success:
            raise IntegrationError(f"Lindblad integration failed: {sol.message}")
        seg = sol.y.T.reshape(len(ts), dim, dim)
        phases = np.exp(-1j * detuning * np.outer(ts, ops.number_diag))
        back = phases[:, :, None] * seg * phases[:, None, :].conj()
        start = 1 if times_all else 0
        times_all.extend(ts[start:])
        states_all.extend(back[start:])
        rho = seg[-1]
        for event in program.echo_events:
            if abs(event.time - t1) < 1e-15:
                ph = _frame_phases(spec, detuning, t1)
                rho_rot = apply_pi_x_A(np.outer(ph, ph.conj()) * rho, basis, t1)
                rho = rho_rot * np.outer(ph.conj(), ph)
                states_all[-1] = rho_rot
    traces = np.array([np.trace(r).real for r in states_all])
    drift_tol = max(1e-6, 1e5 * rtol)
    if np.max(np.abs(traces - 1.0)) > drift_tol:
        raise IntegrationError(
            f"trace drift {np.max(np.abs(traces - 1.0)):.2e} exceeds tolerance")
    return Trajectory(times=np.asarray(times_all),
                      states=np.asarray(states_all), kind="density")


def _check_density(rho: np.ndarray) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("rho0 must be a square matrix")
    if abs(np.trace(rho) - 1.0) > 1e-8:
        raise ValueError("rho0 must have unit trace")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError("rho0 must be Hermitian")
