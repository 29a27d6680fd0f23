"""Transmission-path geometry and per-mode dissipation.

A cable of length ``l_cable`` joined to quarter-wave coplanar waveguides at
both ends supports standing-wave modes spaced by the free spectral range
``omega_fsr``; the anchor mode ``M`` sits at ``omega_M``.  All frequencies in
this package are angular (rad/s); conversion to/from cyclic GHz for user-facing
tables happens here and only here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def ghz_to_rad(f_ghz: float) -> float:
    """Cyclic GHz -> angular rad/s."""
    return TWO_PI * f_ghz * 1e9


def rad_to_ghz(omega: float) -> float:
    """Angular rad/s -> cyclic GHz."""
    return omega / (TWO_PI * 1e9)


@dataclass(frozen=True)
class PathConstants:
    """Material and junction constants of the cable + waveguide path.

    The junction resistance is an effective fitted parameter, stored in ohms.
    """

    v_cable: float = 2.472e8       # microwave speed in the cable (m/s)
    v_cpw: float = 1.157e8         # microwave speed in the waveguide (m/s)
    Q_cable: float = 1.2e6         # intrinsic cable quality factor
    L_cpw_per_m: float = 402e-9    # waveguide specific inductance (H/m)
    L_cable_per_m: float = 216e-9  # cable specific inductance (H/m)
    R_junction: float = 0.0749     # junction resistance (ohm)

    def __post_init__(self) -> None:
        for name in ("v_cable", "v_cpw", "Q_cable", "L_cpw_per_m",
                     "L_cable_per_m", "R_junction"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class PathGeometry:
    """Resolved path geometry for one target cable length."""

    l_cable: float    # cable length (m)
    l_cpw: float      # waveguide length (m)
    M: int            # index of the anchor standing-wave mode (odd)
    omega_fsr: float  # free spectral range (rad/s)
    omega_M: float    # anchor mode angular frequency (rad/s)

    def __post_init__(self) -> None:
        if self.M < 3 or self.M % 2 == 0:
            raise ValueError("M must be an odd integer >= 3")
        if not math.isclose(self.omega_fsr * self.M, self.omega_M, rel_tol=1e-12):
            raise ValueError("omega_fsr must equal omega_M / M")

    def mode_frequency(self, m: int) -> float:
        """Angular frequency of the m-th standing-wave mode."""
        return m * self.omega_fsr


@dataclass(frozen=True)
class ModeDissipation:
    """Quality factor and relaxation time of one standing-wave mode."""

    m: int
    Q_m: float
    T_m: float


def design_path(target_length: float, omega_M: float = ghz_to_rad(5.0),
                constants: PathConstants = PathConstants()) -> PathGeometry:
    """Choose the cable geometry for a target length.

    The anchor mode index M is the smallest odd integer whose half-wave cable
    length reaches the target; this rounds the cable length up, reproducing
    the published geometries for 0.25/0.5/1 m targets.
    """
    if target_length <= 0:
        raise ValueError("target_length must be strictly positive")
    if omega_M <= 0:
        raise ValueError("omega_M must be strictly positive")
    f_M = omega_M / TWO_PI
    lam_cable = constants.v_cable / f_M
    M = 3
    while (M - 1) / 2 * lam_cable < target_length:
        M += 2
    return PathGeometry(
        l_cable=(M - 1) / 2 * lam_cable,
        l_cpw=0.25 * constants.v_cpw / f_M,
        M=M,
        omega_fsr=omega_M / M,
        omega_M=omega_M,
    )


def mode_dissipation(m: int, geometry: PathGeometry,
                     constants: PathConstants = PathConstants()) -> ModeDissipation:
    """Q value and relaxation time of the m-th mode.

    Junction loss scales with cos^2 of the waveguide's electrical length at
    the mode frequency; at the anchor mode the waveguide is exactly a quarter
    wave, the cosine vanishes and only the intrinsic cable loss remains.
    """
    if m < 1:
        raise ValueError("mode index must be >= 1")
    omega_m = geometry.mode_frequency(m)
    lam_cpw = TWO_PI * constants.v_cpw / omega_m
    cos2 = math.cos(TWO_PI * geometry.l_cpw / lam_cpw) ** 2
    inductance = 0.5 * (2 * constants.L_cpw_per_m * geometry.l_cpw
                        + constants.L_cable_per_m * geometry.l_cable)
    inv_q = 1.0 / constants.Q_cable
    if cos2 > 0.0:
        inv_q += cos2 * constants.R_junction / (omega_m * inductance)
    q_m = 1.0 / inv_q
    return ModeDissipation(m=m, Q_m=q_m, T_m=q_m / omega_m)


def dissipation_table(geometry: PathGeometry, modes: list[int],
                      constants: PathConstants = PathConstants()) -> list[ModeDissipation]:
    return [mode_dissipation(m, geometry, constants) for m in modes]


def write_dissipation_csv(path: str, geometry: PathGeometry, modes: list[int],
                          constants: PathConstants = PathConstants()) -> None:
    """Dissipation table as CSV with columns (m, omega_GHz, Q, T_s)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "omega_GHz", "Q", "T_s"])
        for entry in dissipation_table(geometry, modes, constants):
            writer.writerow([entry.m,
                             f"{rad_to_ghz(geometry.mode_frequency(entry.m)):.6g}",
                             f"{entry.Q_m:.6g}", f"{entry.T_m:.6g}"])
