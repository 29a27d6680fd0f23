"""End-to-end physics acceptance gates at full system size.

Each test asserts one headline target and prints one pass/fail line via
the usual pytest report.  These run the real protocols (no reduced
truncation), so the whole file takes hours on a single desktop core.

Known honest failures, left red deliberately (see the test docstrings):
with bosonic cable modes (n_max=3) a real three-photon leakage channel
depresses the peak entangling concurrence on some 0.5-m and 1-m
configurations by ~2e-3..5e-3 relative to two-level-mode reference
values, and the same channel makes the n_max 2->3 change exceed 1e-4.
Renormalizing the computational amplitudes recovers C+ = 1.0000, so the
deficit is pure leakage, not coherent error; the reference values are
reproduced to <=1.4e-3 when the modes are truncated to two levels.
"""

import functools
import math
import time

import numpy as np
import pytest

from rcrsim import experiments
from rcrsim.dynamics import evolve_unitary, evolve_lindblad
from rcrsim.experiments import (METRIC_C0, METRIC_C1, classify_band,
                                leakage_test, run_cr, single_qubit_gate_test,
                                state_transfer, transfer_spec, tune_cr)
from rcrsim.metrics import (amplitude_moduli, average_gate_fidelity,
                            concurrence_pair, concurrence_plus)
from rcrsim.path import (TWO_PI, ModeDissipation, design_path,
                         dissipation_table, rad_to_ghz)
from rcrsim.pulses import ECHOED, FLAT, PulseProgram, cr_program
from rcrsim.system import (SystemSpec, build_h0, build_operators,
                           collapse_operators, dressed_basis,
                           hermiticity_defect)

pytestmark = pytest.mark.acceptance

# Tabulated gate benchmarks:
# (length m, delta_a, delta_b, g GHz, tau ns, C+, Fbar, C+_dissipative)
ROWS = (
    (0.25, 0.70, 0.30, 0.03, 169.3, 1.0000, 0.9999, 0.9999),
    (0.50, 1.25, 0.75, 0.03, 152.4, 0.9998, 0.9998, 0.9997),
    (0.50, 0.35, 0.65, 0.02, 147.3, 0.9998, 0.9998, 0.9996),
    (1.00, 2.55, 1.25, 0.02, 201.9, 0.9928, 0.9964, 0.9859),
    (1.00, 2.50, 1.20, 0.01, 385.9, 0.9964, 0.9976, 0.9943),
    (1.00, 1.55, 1.35, 0.01, 400.3, 0.9984, 0.9989, 0.9975),
)

GEOMETRY_TABLE = (
    (0.25, 0.2966, 0.0058, 13, 0.3846),
    (0.50, 0.5438, 0.0058, 23, 0.2174),
    (1.00, 1.0382, 0.0058, 43, 0.1163),
)

# Frozen regression anchors for the state-transfer peaks (computed by the
# eigenbasis propagation at 0.5-ns sampling; see test_criterion_09).
TRANSFER_ANCHORS = {0.0: 0.999751, 2.0: 0.859958, 5.0: 0.497717,
                    10.0: 0.170185}


@functools.lru_cache(maxsize=None)
def row_spec(idx: int, n_max: int = 3) -> SystemSpec:
    length, da, db, g = ROWS[idx][:4]
    return SystemSpec.from_fractional(design_path(length), da, db, g,
                                      n_max=n_max)


@functools.lru_cache(maxsize=None)
def row_tune(idx: int):
    """Tuned echoed gate for one tabulated row, bracketing the first peak.

    The scan bracket is [0.8, 1.25] x (nominal tau): the concurrence
    revives periodically, and the unrestricted default range would report
    a later revival instead of the tabulated first peak.
    """
    tau_ref = ROWS[idx][4] * 1e-9
    start = time.monotonic()
    result = tune_cr(row_spec(idx), tau_range=(0.8 * tau_ref, 1.25 * tau_ref))
    return result, time.monotonic() - start


def _fmt_rows(lines):
    return "\n".join(lines)


def test_criterion_01_geometry_table_exact():
    """Path design reproduces all tabulated geometry entries exactly."""
    for length, l_cable, l_cpw, M, fsr_ghz in GEOMETRY_TABLE:
        geom = design_path(length)
        assert geom.M == M, f"{length} m: M={geom.M}, expected {M}"
        assert round(geom.l_cable, 4) == l_cable, \
            f"{length} m: l_cable={geom.l_cable:.6f}, expected {l_cable}"
        assert round(geom.l_cpw, 4) == l_cpw, \
            f"{length} m: l_cpw={geom.l_cpw:.6f}, expected {l_cpw}"
        assert round(rad_to_ghz(geom.omega_fsr), 4) == fsr_ghz, \
            f"{length} m: FSR={rad_to_ghz(geom.omega_fsr):.6f} GHz"


def test_criterion_02_gate_table_concurrence_and_tau():
    """Tuned C+ within +-0.003 and tau within +-10% for all six rows.

    Honest red: rows 2 and 4 (0-based 1 and 3) cannot reach the reference
    C+ with bosonic cable modes; the peak over the full bracket falls
    short by ~1.3e-3 and ~4.4e-3 because of a real three-photon leakage
    channel absent in a two-level-mode model (renormalized C+ = 1.0000).
    """
    failures = []
    for idx, row in enumerate(ROWS):
        length, da, db, g, tau_ns, cplus_ref = row[:6]
        result, elapsed = row_tune(idx)
        tau_err = abs(result.tau * 1e9 - tau_ns) / tau_ns
        line = (f"row {idx} ({length} m, dA={da}, dB={db}, g={g}): "
                f"C+={result.value:.4f} (ref {cplus_ref:.4f}), "
                f"tau={result.tau * 1e9:.1f} ns (ref {tau_ns}), "
                f"tune {elapsed / 60:.1f} min")
        if abs(result.value - cplus_ref) > 0.003 or tau_err > 0.10:
            failures.append(line)
    assert not failures, "out of tolerance:\n" + _fmt_rows(failures)


def test_criterion_03_gate_table_average_fidelity():
    """Average gate fidelity within +-0.003 (0.25/0.5 m) or +-0.005 (1 m)."""
    failures = []
    for idx, row in enumerate(ROWS):
        length, fbar_ref = row[0], row[6]
        tol = 0.003 if length < 1.0 else 0.005
        spec = row_spec(idx)
        basis = dressed_basis(spec)
        freq_b = basis.dressed_frequency("B", spec.geometry.omega_M)
        tau = row_tune(idx)[0].tau

        def run(psi0, _tau=tau, _fb=freq_b, _spec=spec, _basis=basis):
            program = cr_program(ECHOED, _tau, _fb)
            return evolve_unitary(_spec, program, psi0, basis=_basis).final

        fbar, _ = average_gate_fidelity(run, basis)
        if abs(fbar - fbar_ref) > tol:
            failures.append(f"row {idx}: Fbar={fbar:.4f} "
                            f"(ref {fbar_ref:.4f}, tol {tol})")
    assert not failures, "out of tolerance:\n" + _fmt_rows(failures)


def test_criterion_04_gate_table_dissipative_concurrence():
    """Dissipation penalties: <=0.0005 degradation for 0.25/0.5-m rows,
    C'+(g=0.02) < C'+(g=0.01) for the 1-m rows, each within +-0.003."""
    cprime = {}
    failures = []
    for idx, row in enumerate(ROWS):
        length, cprime_ref = row[0], row[7]
        spec = row_spec(idx)
        tune = row_tune(idx)[0]
        dissipation = dissipation_table(spec.geometry, list(spec.modes))
        value = experiments.evaluate_cr(spec, ECHOED, tune.tau,
                                        dissipation=dissipation)
        cprime[idx] = value
        if abs(value - cprime_ref) > 0.003:
            failures.append(f"row {idx}: C'+={value:.4f} "
                            f"(ref {cprime_ref:.4f})")
        if length < 1.0 and tune.value - value > 0.0005:
            failures.append(f"row {idx}: degradation "
                            f"{tune.value - value:.5f} > 0.0005")
    if not cprime[3] < min(cprime[4], cprime[5]):
        failures.append(f"1-m ordering violated: C'+(g=0.02)={cprime[3]:.4f} "
                        f"vs g=0.01 rows {cprime[4]:.4f}, {cprime[5]:.4f}")
    assert not failures, "out of tolerance:\n" + _fmt_rows(failures)


def test_criterion_05_flat_pulse_landmarks():
    """Flat-pulse concurrence peaks: C0 96.82+-0.5% at 120.1+-5 ns and
    C1 96.86+-0.5% at 139.4+-5 ns for the 0.25-m configuration."""
    spec = row_spec(0)
    basis = dressed_basis(spec)
    freq_b = basis.dressed_frequency("B", spec.geometry.omega_M)
    program = cr_program(FLAT, 200e-9, freq_b)
    targets = {("00", "zero"): (0.9682, 120.1), ("10", "one"): (0.9686, 139.4)}
    for (label, branch), (c_ref, t_ref) in targets.items():
        psi0 = basis.vector(label).astype(complex)
        traj = evolve_unitary(spec, program, psi0, sample_period=0.1e-9,
                              basis=basis)
        values = np.array([concurrence_pair(amplitude_moduli(s, basis),
                                            branch) for s in traj.states])
        k = int(np.argmax(values))
        peak, t_peak_ns = values[k], traj.times[k] * 1e9
        assert abs(peak - c_ref) <= 0.005, \
            f"{branch}: peak {peak:.4f} vs {c_ref} +- 0.005"
        assert abs(t_peak_ns - t_ref) <= 5.0, \
            f"{branch}: peak at {t_peak_ns:.1f} ns vs {t_ref} +- 5 ns"


def test_criterion_06_grid_block_band_and_diagonal():
    """0.25-m 3x3 detuning block classifies gt999 and each diagonal
    cell's C+ is strictly below the maximum of its row."""
    geometry = design_path(0.25)
    da_values, db_values = (0.1, 0.2, 0.3), (0.6, 0.7, 0.8)
    grid = experiments.sweep_grid(geometry, da_values, db_values, 0.03,
                                  tau_range=(120e-9, 260e-9),
                                  coarse_step=4e-9)
    failures = []
    for i, da in enumerate(da_values):
        for j, db in enumerate(db_values):
            cell = grid.cell(i, j)
            if cell.error or cell.ill_defined:
                failures.append(f"({da},{db}): {cell.error or 'ill-defined'}")
            elif cell.band != "gt999":
                failures.append(f"({da},{db}): C+={cell.cplus:.4f} "
                                f"band {cell.band}")
    for i in range(3):
        row_vals = [grid.cell(i, j).cplus for j in range(3)]
        if not grid.cell(i, i).cplus < max(row_vals):
            failures.append(f"diagonal ({da_values[i]},{db_values[i]}) not "
                            f"depressed: {row_vals}")
    assert not failures, _fmt_rows(failures)


def test_criterion_07_leakage_retention():
    """Undriven retention: 100% +- 1e-6 without dissipation everywhere;
    with dissipation |00> stays at 100% +- 1e-6 and the 1-m excited-state
    retentions fall in [0.995, 0.999]."""
    failures = []
    for length, g in ((0.25, 0.03), (0.5, 0.02), (1.0, 0.01)):
        geometry = design_path(length)
        spec = SystemSpec.from_fractional(geometry, 0.7, 0.3, g)
        dissipation = dissipation_table(geometry, list(spec.modes))
        for label in ("00", "01", "10", "11"):
            unitary = leakage_test(spec, label)
            if abs(unitary - 1.0) > 1e-6:
                failures.append(f"{length} m |{label}> unitary: {unitary}")
        lossy = {label: leakage_test(spec, label, dissipation=dissipation)
                 for label in ("00", "01", "10", "11")}
        if abs(lossy["00"] - 1.0) > 1e-6:
            failures.append(f"{length} m |00> dissipative: {lossy['00']}")
        if length == 1.0:
            for label in ("01", "10", "11"):
                if not 0.995 <= lossy[label] <= 0.999:
                    failures.append(f"1 m |{label}> dissipative: "
                                    f"{lossy[label]:.5f} not in [0.995,0.999]")
    assert not failures, _fmt_rows(failures)


def test_criterion_08_single_qubit_gate():
    """Resonant pi rotation: >=0.9995 average fidelity for the 0.5-m
    configuration; 1-m optimum in [0.985, 0.995]."""
    spec_05 = SystemSpec.from_fractional(design_path(0.5), 0.35, 0.65, 0.02)
    result_05 = single_qubit_gate_test(spec_05, coarse_step=1e-9)
    assert result_05.value >= 0.9995, \
        f"0.5 m: avg fidelity {result_05.value:.5f} < 0.9995"
    spec_1 = SystemSpec.from_fractional(design_path(1.0), 1.55, 1.35, 0.01)
    result_1 = single_qubit_gate_test(spec_1, coarse_step=1e-9)
    assert 0.985 <= result_1.value <= 0.995, \
        f"1 m: avg fidelity {result_1.value:.5f} not in [0.985, 0.995]"


def test_criterion_09_state_transfer_sensitivity():
    """Direct transfer peaks: >0.95 on resonance, >=0.25 lower at 5 MHz,
    and all four detunings match the frozen regression anchors."""
    peaks = {}
    for delta_mhz, anchor in TRANSFER_ANCHORS.items():
        result = state_transfer(transfer_spec(TWO_PI * delta_mhz * 1e6))
        assert result.found, f"{delta_mhz} MHz: no interior peak"
        peaks[delta_mhz] = result.peak
        assert result.peak == pytest.approx(anchor, abs=1e-4), \
            f"{delta_mhz} MHz: peak {result.peak:.6f} vs anchor {anchor}"
    assert peaks[0.0] > 0.95
    assert peaks[0.0] - peaks[5.0] >= 0.25


def test_criterion_10_property_suite():
    """Always-on physics properties at full size: Hermiticity, number
    conservation, norm/trace conservation, the matrix-exponential and
    analytic (Rabi, damped cavity) oracles, and concurrence bounds with
    phase invariance on 1000 random states."""
    # Hermiticity + excitation-number commutation for every tabulated row
    for idx in range(len(ROWS)):
        spec = row_spec(idx)
        h0 = build_h0(spec)
        assert hermiticity_defect(h0) == 0.0
        n_op = build_operators(spec).number_op
        comm = h0 @ n_op - n_op @ h0
        assert abs(comm).max() < 1e-6 * abs(h0).max()

    # norm conservation through a full echoed gate (row 0)
    spec = row_spec(0)
    basis = dressed_basis(spec)
    freq_b = basis.dressed_frequency("B", spec.geometry.omega_M)
    psi0 = (basis.vector("00") + basis.vector("10")) / math.sqrt(2.0)
    traj = evolve_unitary(spec, cr_program(ECHOED, 169.3e-9, freq_b),
                          psi0.astype(complex), basis=basis)
    norms = np.linalg.norm(traj.states, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-5

    # matrix-exponential oracle: short flat pulse against expm propagation
    from scipy.linalg import expm
    tau = 5e-9
    program = PulseProgram(shape=FLAT, omega_0=TWO_PI * 0.1e9, tau_0=0.0,
                           tau=tau, drive_freq=freq_b)
    traj = evolve_unitary(spec, program, psi0.astype(complex), rtol=1e-10)
    ops = build_operators(spec)
    det = program.drive_freq - spec.geometry.omega_M
    h_drive = (build_h0(spec) - det * ops.number_op
               + 0.5 * program.omega_0
               * (ops.lower_A + ops.lower_A.T)).toarray()
    psi_ref = expm(-1j * h_drive * tau) @ psi0
    psi_ref = np.exp(-1j * det * tau * ops.number_diag) * psi_ref
    assert np.linalg.norm(traj.final - psi_ref) < 1e-6

    # analytic Rabi oracle: decoupled qubit, resonant flat drive
    geom = design_path(0.25)
    spec_free = SystemSpec(geometry=geom, delta_A=TWO_PI * 0.27e9,
                           delta_B=-TWO_PI * 0.115e9, g_A=0.0, g_B=0.0,
                           M_min=12, M_max=14, n_max=1, n_total=2)
    basis_free = dressed_basis(spec_free)
    omega_0 = TWO_PI * 0.1e9
    t_pi = math.pi / omega_0
    freq_a = basis_free.dressed_frequency("A", geom.omega_M)
    prog = PulseProgram(shape=FLAT, omega_0=omega_0, tau_0=0.0, tau=t_pi,
                        drive_freq=freq_a)
    final = evolve_unitary(spec_free, prog,
                           basis_free.vector("00").astype(complex),
                           basis=basis_free, rtol=1e-11).final
    p_flip = abs(np.vdot(basis_free.vector("10"), final)) ** 2
    assert abs(p_flip - 1.0) < 1e-6

    # damped-cavity oracle: excited decoupled mode decays as exp(-t/T)
    t_relax, duration = 200e-9, 100e-9
    collapse = collapse_operators(
        spec_free, [ModeDissipation(m=m, Q_m=0.0, T_m=t_relax)
                    for m in (12, 13, 14)])
    ops = build_operators(spec_free)
    one_photon = np.zeros(ops.dim, dtype=complex)
    one_photon[ops.states.index((0, 0, 0, 1, 0))] = 1.0
    rho0 = np.outer(one_photon, one_photon.conj())
    idle = experiments.idle_program(duration, geom.omega_M)
    rho = evolve_lindblad(spec_free, idle, collapse, rho0,
                          rtol=1e-10).final
    population = float(np.real(rho[ops.states.index((0, 0, 0, 1, 0)),
                                   ops.states.index((0, 0, 0, 1, 0))]))
    assert abs(population - math.exp(-duration / t_relax)) < 1e-6

    # concurrence bounds + drive-phase invariance on 1000 random states
    rng = np.random.default_rng(20260826)
    for _ in range(1000):
        amps = rng.normal(size=4) + 1j * rng.normal(size=4)
        amps /= np.linalg.norm(amps) / rng.uniform(0.3, 1.0)
        moduli = np.abs(amps)
        for value in (concurrence_plus(moduli),
                      concurrence_pair(moduli, "zero"),
                      concurrence_pair(moduli, "one")):
            assert -1e-12 <= value <= 1.0 + 1e-12
        phases = np.exp(1j * rng.uniform(0, TWO_PI, size=4))
        assert concurrence_plus(np.abs(amps * phases)) == \
            pytest.approx(concurrence_plus(moduli), abs=1e-12)


def test_criterion_11_mode_truncation_convergence():
    """n_max 2 -> 3 changes C+ by < 1e-4, one row per cable length.

    Honest red for the 0.25-m and 0.5-m rows: the change is 1.3e-4 and
    1.1e-3 because genuine three-photon leakage channels open between
    n_max=2 and n_max=3; only the 1-m row converges below 1e-4.  This
    criterion's premise (truncation converged at n_max=3) is inconsistent
    with the reference values being reproducible at n_max=3 at all.
    """
    failures = []
    for idx in (0, 2, 4):   # one row per cable length
        tau = ROWS[idx][4] * 1e-9
        values = {}
        for n_max in (2, 3):
            spec = row_spec(idx, n_max=n_max)
            basis = dressed_basis(spec)
            final = run_cr(spec, ECHOED, tau)
            values[n_max] = concurrence_plus(amplitude_moduli(final, basis))
        diff = abs(values[3] - values[2])
        if diff >= 1e-4:
            failures.append(f"row {idx}: |C+(3) - C+(2)| = {diff:.2e}")
    assert not failures, _fmt_rows(failures)
