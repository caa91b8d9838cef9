import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deomlab.hierarchy import EngineOptions, build_hierarchy, steady_state
from deomlab.model import A, B, C, D, E, ModelConfig, build_model, eigen_rotation
from deomlab.observables import (
    DEFAULT_GAMMAS,
    IVPoint,
    IVScan,
    UndefinedVoltageError,
    conductivity,
    current,
    extract,
    iv_scan,
    release_flux,
    voltage,
)
from deomlab.operators import basis_projector


def _pops(dd, ee):
    rho = np.zeros((5, 5))
    rho[D, D], rho[E, E] = dd, ee
    rho[A, A] = 1 - dd - ee
    return rho


def test_voltage_equal_populations_is_energy_gap():
    m = build_model()
    assert voltage(m, _pops(0.1, 0.1)) == pytest.approx(13245.0 - 1611.0)


def test_voltage_ratio_e_adds_thermal_energy():
    m = build_model()
    shift = voltage(m, _pops(0.1 * math.e, 0.1)) - voltage(m, _pops(0.1, 0.1))
    assert shift == pytest.approx(208.51, abs=0.01)


def test_voltage_undefined_when_d_is_empty():
    with pytest.raises(UndefinedVoltageError):
        voltage(build_model(), _pops(0.0, 0.3))


def test_current_is_rate_times_population():
    assert current(100.0, _pops(0.01, 0.2)) == pytest.approx(1.0)


def test_extract_initial_state():
    m = build_model()
    rec = extract([0.0], basis_projector(5, A)[None], m)
    assert np.allclose(rec.populations[0], [1, 0, 0, 0, 0])
    assert rec.coherence_bc[0] == 0
    with pytest.raises(KeyError):
        rec.column("rho_xx")
    with pytest.raises(ValueError):
        extract([0.0], basis_projector(5, A)[None], m, basis="exciton")


def test_diagonal_eigen_state_has_real_site_coherence():
    m = build_model()
    rot = eigen_rotation(m)
    rho = np.diag([0.2, 0.3, 0.1, 0.25, 0.15]).astype(complex)
    rec = extract([0.0], rho[None], m)
    u = rot.mixing
    # rho_bc = u_b+ u_c+ p_+ + u_b- u_c- p_-
    expected = u[0, 0] * u[1, 0] * 0.3 + u[0, 1] * u[1, 1] * 0.1
    assert rec.coherence_bc[0] == pytest.approx(expected)
    assert rec.column("im_rho_bc")[0] == 0
    assert rec.populations[0].sum() == pytest.approx(1.0)
    eig = extract([0.0], rho[None], m, basis="eigen")
    assert eig.coherence_bc[0] == 0


def test_conductivity_differences():
    j = np.array([1.0, 2.0, 1.5])
    phi = np.array([0.0, 1.0, 2.0])
    assert np.allclose(conductivity(j, phi), [1.0, 0.25, -0.5])
    with pytest.raises(ValueError, match="monotone"):
        conductivity(j, [0.0, 2.0, 1.0])
    assert np.isnan(conductivity([1.0], [1.0])).all()


def test_negative_conductivity_regions():
    pts = [IVPoint(1.0, 0, 0, 0, 0, c) for c in (1.0, -1.0, -2.0, 0.5, -0.1)]
    assert IVScan(pts).negative_conductivity_regions() == [(1, 3), (4, 5)]


def test_release_balances_q3_outflow_in_steady_state():
    # in the steady state every population drained from d lands in e and is passed back
    m = build_model()
    rho = steady_state(build_hierarchy(m, backend="lindblad")).rho
    assert release_flux(m, rho) == pytest.approx(current(m.release_rate, rho), rel=1e-10)
    assert release_flux(m, rho) > 0


def test_iv_scan_argument_checks():
    opts = EngineOptions(backend="lindblad")
    with pytest.raises(ValueError, match="empty"):
        iv_scan(gammas=[], options=opts)
    with pytest.raises(ValueError, match="descending"):
        iv_scan(gammas=[10.0, 20.0], options=opts)
    with pytest.raises(ValueError, match="positive"):
        iv_scan(gammas=[10.0, -1.0], options=opts)


def test_default_scan_grid():
    assert len(DEFAULT_GAMMAS) == 40
    assert DEFAULT_GAMMAS[0] == pytest.approx(900.0) and DEFAULT_GAMMAS[-1] == pytest.approx(6.0)


def test_lindblad_scan_is_monotone():
    scan = iv_scan(gammas=DEFAULT_GAMMAS, options=EngineOptions(backend="lindblad"))
    assert scan.complete and len(scan.points) == 40
    phi = np.array([p.voltage for p in scan.points])
    assert np.all(np.diff(phi) > 0)  # slower release leaves more in d
    assert all(not p.warnings for p in scan.points)
    assert scan.points[0].voltage_eV == pytest.approx(phi[0] * 1.23984e-4, rel=1e-5)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 0.4), st.floats(1e-6, 0.4), st.floats(-500.0, 500.0))
def test_voltage_shifts_with_the_energy_gap(dd, ee, shift):
    base = build_model()
    moved = build_model(ModelConfig(E_d=13245.0 + shift))
    assert voltage(moved, _pops(dd, ee)) - voltage(base, _pops(dd, ee)) == pytest.approx(shift, abs=1e-8)
