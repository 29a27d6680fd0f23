"""Drive envelopes and drive operators for cross-resonance pulses.

Three envelope shapes: flat, raised-cosine, and echoed.  An echoed pulse is
two identical raised-cosine segments of duration tau/2 with an ideal pi
rotation of the control qubit after each segment; the rotations flip the
sign of the conditional part of the drive so the entangling rotation
accumulates across segments while single-qubit errors cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .system import SystemSpec, build_operators

FLAT = "flat"
RAISED_COSINE = "raised_cosine"
ECHOED = "echoed"

ROTATING_RWA = "rotating_rwa"
LAB_FULL_COSINE = "lab_full_cosine"


@dataclass(frozen=True)
class EchoEvent:
    """Instantaneous pi rotation about x on the control qubit."""

    time: float


@dataclass(frozen=True)
class PulseProgram:
    """One cross-resonance drive pulse on qubit A."""

    shape: str           # flat | raised_cosine | echoed
    omega_0: float       # flat-part amplitude (rad/s)
    tau_0: float         # rise/fall time (s)
    tau: float           # total duration (s), ramps included
    drive_freq: float    # absolute drive frequency (rad/s)
    drive_phase: float = 0.0
    frame: str = ROTATING_RWA

    def __post_init__(self) -> None:
        if self.shape not in (FLAT, RAISED_COSINE, ECHOED):
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if self.frame not in (ROTATING_RWA, LAB_FULL_COSINE):
            raise ValueError(f"unknown frame {self.frame!r}")
        if self.tau <= 0 or self.omega_0 < 0:
            raise ValueError("tau must be positive and omega_0 non-negative")
        if self.shape == RAISED_COSINE and self.tau < 2 * self.tau_0:
            raise ValueError("raised-cosine pulse needs tau >= 2 tau_0")
        if self.shape == ECHOED and self.tau < 4 * self.tau_0:
            raise ValueError("echoed pulse needs tau >= 4 tau_0")
        if self.shape in (RAISED_COSINE, ECHOED) and self.tau_0 <= 0:
            raise ValueError("ramped shapes need tau_0 > 0")

    @property
    def echo_events(self) -> tuple[EchoEvent, ...]:
        if self.shape != ECHOED:
            return ()
        return (EchoEvent(self.tau / 2), EchoEvent(self.tau))

    @property
    def segments(self) -> tuple[tuple[float, float], ...]:
        """(start, end) integration intervals between echo events."""
        if self.shape != ECHOED:
            return ((0.0, self.tau),)
        return ((0.0, self.tau / 2), (self.tau / 2, self.tau))


def _raised_cosine(t: float, omega_0: float, tau_0: float, tau: float) -> float:
    if t < 0.0 or t > tau:
        return 0.0
    if t < tau_0:
        return 0.5 * omega_0 * (1.0 - math.cos(math.pi * t / tau_0))
    if t > tau - tau_0:
        return 0.5 * omega_0 * (1.0 - math.cos(math.pi * (tau - t) / tau_0))
    return omega_0


def envelope(t: float, program: PulseProgram) -> float:
    """Drive amplitude at time t (rad/s); zero outside [0, tau]."""
    if t < 0.0 or t > program.tau:
        return 0.0
    if program.shape == FLAT:
        return program.omega_0
    if program.shape == RAISED_COSINE:
        return _raised_cosine(t, program.omega_0, program.tau_0, program.tau)
    seg = program.tau / 2
    if t <= seg:
        return _raised_cosine(t, program.omega_0, program.tau_0, seg)
    # second echo segment: drive phase shifted by pi, i.e. amplitude sign
    # flipped, so the wanted conditional rotation adds up across the echo
    return -_raised_cosine(t - seg, program.omega_0, program.tau_0, seg)


def drive_operator(spec: SystemSpec) -> sp.csr_matrix:
    """sigma_x on qubit A (the bare drive coupling operator)."""
    ops = build_operators(spec)
    return (ops.lower_A + ops.lower_A.T).tocsr()


def drive_term(t: float, program: PulseProgram, spec: SystemSpec) -> sp.csr_matrix:
    """Drive Hamiltonian contribution at time t.

    In the default rotating frame this is the co-rotating half of the cosine
    drive with the drive detuning measured from the anchor mode; in the lab
    validation frame it is the full cosine times sigma_x^A (the caller must
    then also add omega_M times the excitation number to H0).
    """
    ops = build_operators(spec)
    amp = envelope(t, program)
    if program.frame == LAB_FULL_COSINE:
        return (amp * math.cos(program.drive_freq * t + program.drive_phase)
                * (ops.lower_A + ops.lower_A.T)).tocsr()
    detuning = program.drive_freq - spec.geometry.omega_M
    phase = np.exp(1j * (detuning * t + program.drive_phase))
    return (0.5 * amp * (phase * ops.lower_A
                         + np.conj(phase) * ops.lower_A.T)).tocsr()


def default_cr_amplitude() -> float:
    """Flat-part amplitude used by the cross-resonance protocols (rad/s)."""
    return 2.0 * math.pi * 0.1e9


def default_ramp_time(dressed_freq: float) -> float:
    """Rise/fall time: one hundred periods of the dressed target frequency."""
    return 100.0 * 2.0 * math.pi / dressed_freq


def cr_program(shape: str, tau: float, dressed_freq_B: float,
               omega_0: float | None = None, drive_phase: float = 0.0,
               frame: str = ROTATING_RWA) -> PulseProgram:
    """Standard cross-resonance program driving A at the dressed B frequency."""
    return PulseProgram(
        shape=shape,
        omega_0=default_cr_amplitude() if omega_0 is None else omega_0,
        tau_0=default_ramp_time(dressed_freq_B),
        tau=tau,
        drive_freq=dressed_freq_B,
        drive_phase=drive_phase,
        frame=frame,
    )
