"""Remote cross-resonance gates through a multimode cable.

Two fixed-frequency transmon-like qubits sit at the ends of a coaxial
cable whose standing-wave modes mediate an effective qubit-qubit coupling.
This package models the path geometry and dissipation, builds the
truncated multimode Hamiltonian, integrates driven (and lossy) dynamics,
and runs the gate-level protocols: cross-resonance tuning, detuning
sweeps, leakage checks, single-qubit benchmarks, and single-excitation
state transfer.
"""

from .path import (PathConstants, PathGeometry, ModeDissipation, design_path,
                   mode_dissipation, dissipation_table, ghz_to_rad,
                   rad_to_ghz, TWO_PI)
from .system import (SystemSpec, LabeledBasis, IllDefinedBasisError,
                     default_window, basis_states, build_operators, build_h0,
                     dressed_basis, collapse_operators, COMP_LABELS)
from .pulses import (PulseProgram, EchoEvent, envelope, drive_term,
                     cr_program, default_cr_amplitude, default_ramp_time,
                     FLAT, RAISED_COSINE, ECHOED, ROTATING_RWA,
                     LAB_FULL_COSINE)
from .dynamics import (Trajectory, IntegrationError, evolve_unitary,
                       evolve_lindblad, apply_pi_x_A)
from .metrics import (QubitAmplitudes, project_amplitudes, amplitude_moduli,
                      concurrence_pair, concurrence_plus, zx90,
                      cnot_from_zx90, state_fidelity, average_gate_fidelity,
                      sixteen_initial_states)
from .experiments import (TuneResult, SweepGrid, CellResult, TransferResult,
                          tune_cr, evaluate_cr, run_cr, sweep_grid,
                          leakage_test, single_qubit_gate_test,
                          state_transfer, transfer_spec, classify_band,
                          golden_section_max, PHI_PLUS, METRIC_C0, METRIC_C1,
                          METRIC_CPLUS, METRIC_STATE_FIDELITY)

__version__ = "0.1.0"
