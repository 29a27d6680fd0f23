"""Path geometry and dissipation model."""

import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rcrsim.path import (PathConstants, design_path, dissipation_table,
                         ghz_to_rad, mode_dissipation, rad_to_ghz,
                         write_dissipation_csv, TWO_PI)

# Published design table: length (m) -> (M, l_cable m, l_cpw m, FSR GHz).
DESIGN_TABLE = {
    0.25: (13, 0.2966, 0.0058, 0.3846),
    0.50: (23, 0.5438, 0.0058, 0.2174),
    1.00: (43, 1.0382, 0.0058, 0.1163),
}


@pytest.mark.parametrize("length", sorted(DESIGN_TABLE))
def test_design_table(length):
    M, l_cable, l_cpw, fsr = DESIGN_TABLE[length]
    geo = design_path(length)
    assert geo.M == M
    assert round(geo.l_cable, 4) == l_cable
    assert round(geo.l_cpw, 4) == l_cpw
    assert round(rad_to_ghz(geo.omega_fsr), 4) == fsr


def test_geometry_relations():
    geo = design_path(0.25)
    # half-wave cable resonator with (M-1)/2 wavelengths at the anchor freq
    lam_cable = PathConstants().v_cable / 5.0e9
    assert geo.l_cable == pytest.approx((geo.M - 1) / 2 * lam_cable)
    # quarter-wave waveguide stubs
    lam_cpw = PathConstants().v_cpw / 5.0e9
    assert geo.l_cpw == pytest.approx(lam_cpw / 4)
    assert geo.omega_fsr == pytest.approx(geo.omega_M / geo.M)


def test_mode_frequency_linear():
    geo = design_path(0.5)
    for m in range(geo.M - 2, geo.M + 3):
        assert geo.mode_frequency(m) == pytest.approx(m * geo.omega_fsr)
    assert geo.mode_frequency(geo.M) == pytest.approx(geo.omega_M)


@given(st.floats(min_value=0.05, max_value=3.0,
                 allow_nan=False, allow_infinity=False))
def test_design_invariants(length):
    geo = design_path(length)
    assert geo.M % 2 == 1
    assert geo.l_cable >= length - 1e-12
    # one mode spacing less cable would undershoot the target
    lam_cable = PathConstants().v_cable / 5.0e9
    assert geo.l_cable - lam_cable < length


def test_quality_factor_bands():
    """Near-node modes keep the cable Q; near-antinode modes drop decades."""
    geo = design_path(0.25)
    qs = {m: mode_dissipation(m, geo).Q_m for m in range(geo.M - 6, geo.M + 7)}
    assert all(1e3 < q <= 1.2e6 for q in qs.values())
    assert max(qs.values()) > 1e5
    assert min(qs.values()) < 1e5
    # the anchor mode sees a current node at the junction: best Q of window
    assert qs[geo.M] == max(qs.values())


def test_junction_loss_formula():
    geo = design_path(0.25)
    c = PathConstants()
    m = geo.M + 1
    omega_m = geo.mode_frequency(m)
    lam_cpw_m = TWO_PI * c.v_cpw / omega_m
    inductance = 0.5 * (2 * c.L_cpw_per_m * geo.l_cpw
                        + c.L_cable_per_m * geo.l_cable)
    q_loss = (omega_m * inductance
              / (math.cos(TWO_PI * geo.l_cpw / lam_cpw_m) ** 2
                 * c.R_junction))
    expected = 1.0 / (1.0 / c.Q_cable + 1.0 / q_loss)
    assert mode_dissipation(m, geo).Q_m == pytest.approx(expected)


def test_lifetime_consistency():
    geo = design_path(0.5)
    d = mode_dissipation(geo.M, geo)
    assert d.T_m == pytest.approx(d.Q_m / geo.mode_frequency(geo.M))
    assert d.T_m > 0


def test_dissipation_table_and_csv(tmp_path):
    geo = design_path(0.25)
    modes = list(range(geo.M - 2, geo.M + 3))
    table = dissipation_table(geo, modes)
    assert [d.m for d in table] == modes
    out = tmp_path / "dissipation.csv"
    write_dissipation_csv(str(out), geo, modes)
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["m", "omega_GHz", "Q", "T_s"]
    assert len(rows) == len(modes) + 1
    for row, d in zip(rows[1:], table):
        assert int(row[0]) == d.m
        assert float(row[2]) == pytest.approx(d.Q_m, rel=1e-5)


def test_constants_validation():
    with pytest.raises(ValueError):
        PathConstants(v_cable=-1.0)
    with pytest.raises(ValueError):
        design_path(0.0)


def test_unit_conversions():
    assert ghz_to_rad(5.0) == pytest.approx(TWO_PI * 5e9)
    assert rad_to_ghz(ghz_to_rad(1.234)) == pytest.approx(1.234)
