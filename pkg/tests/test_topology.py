"""Topological diagnostics: winding, edge pair, Chern numbers, windows."""

import numpy as np
import pytest

from qxpsim.domain import DomainParameters, build_domain_hamiltonian, ssh_couplings
from qxpsim.errors import ParameterError, WindowError
from qxpsim.pump import AahSchedule, PumpProgram
from qxpsim.topology import (
    band_chern_numbers,
    com_displacement,
    edge_pair_splitting,
    edge_state_report,
    identify_occupied_band,
    localization_length,
    oscillation_period,
    winding_number,
)


def test_localization_length():
    xi = localization_length(1.0, 10.0)
    assert xi == pytest.approx(1.0 / np.log(10.0))
    assert localization_length(1.0, 0.1) < 0
    assert localization_length(2.0, 2.0) == np.inf
    with pytest.raises(ParameterError):
        localization_length(0.0, 1.0)


def test_winding_number_phases():
    assert winding_number(1.0, 10.0) == 1
    assert winding_number(1.0, 0.1) == 0
    with pytest.raises(ParameterError):
        winding_number(1.0, 1.0)
    with pytest.raises(ParameterError):
        winding_number(1.0, 2.0, k_samples=32)


def test_edge_report_closed_form():
    r = edge_state_report(1.0, 10.0, 8)
    assert r.topological
    # one factor of 1/10 per bulk unit cell beyond the first
    assert r.energy_plus == pytest.approx(1e-3)
    assert r.splitting == pytest.approx(2e-3)
    assert r.hybridization_period == pytest.approx(np.pi / 1e-3)
    trivial = edge_state_report(1.0, 0.1, 8)
    assert not trivial.topological
    assert np.isnan(trivial.energy_plus)
    with pytest.raises(ParameterError):
        edge_state_report(1.0, 10.0, 7)


def _ed_midgap(n, lam_v=1.0, lam_w=10.0):
    h = build_domain_hamiltonian(
        DomainParameters(n, ssh_couplings(lam_v, lam_w, n)))
    return edge_pair_splitting(h)


def test_edge_pair_exact_diagonalization():
    # frozen midgap energies of the staggered chain at hop ratio 10
    lo, hi = _ed_midgap(4)
    assert hi == pytest.approx(0.09901951, abs=1e-7)
    assert lo == pytest.approx(-hi, abs=1e-12)
    lo, hi = _ed_midgap(6)
    assert hi == pytest.approx(9.900029e-3, rel=1e-5)
    lo, hi = _ed_midgap(8)
    # closed form 1e-3 is good to about a percent here
    assert hi == pytest.approx(1e-3, rel=0.02)
    assert abs(hi / edge_state_report(1.0, 10.0, 8).energy_plus - 1.0) < 0.02


def _pump_bloch(lam0=1.0, eta0=-10.0):
    return AahSchedule(lam0, eta0, PumpProgram.single(0.02, 100.0), 12).bloch_hamiltonian


def test_chern_numbers_three_band_pump():
    bloch = _pump_bloch()
    c = band_chern_numbers(bloch)
    np.testing.assert_array_equal(c, [1, -2, 1])
    assert c.sum() == 0


def test_chern_numbers_grid_stable():
    bloch = _pump_bloch()
    c24 = band_chern_numbers(bloch, n_k=24, n_phi=24)
    c36 = band_chern_numbers(bloch, n_k=36, n_phi=36)
    np.testing.assert_array_equal(c24, c36)
    with pytest.raises(ParameterError):
        band_chern_numbers(bloch, n_k=8, n_phi=8)


def test_identify_occupied_band():
    bloch = _pump_bloch()
    phi = np.pi / 3
    ks = np.linspace(-np.pi, np.pi, 64, endpoint=False)
    means = np.mean([np.linalg.eigvalsh(bloch(k, phi)) for k in ks], axis=0)
    assert means[0] < means[1] < means[2]
    # a wall parked on its plateau sits at the +|eta0| sublattice energy,
    # which is the top band here
    assert identify_occupied_band(bloch, phi, 10.0) == 2
    assert identify_occupied_band(bloch, phi, means[0] - 0.5) == 0
    assert identify_occupied_band(bloch, phi, means[1]) == 1


def test_oscillation_period_recovers_sine():
    period = 37.0
    ts = np.linspace(0.0, 5 * period, 2001)
    series = np.sin(np.pi * ts / period) ** 2
    got = oscillation_period(ts, series, expected_period=period)
    assert got == pytest.approx(period, rel=1e-4)
    # too short a record: no two peaks
    assert np.isnan(oscillation_period(ts[:20], series[:20]))


def test_com_displacement_window_checks():
    ts = np.linspace(0.0, 10.0, 101)
    com = 1.0 + 0.3 * ts
    assert com_displacement(ts, com, 2.0, 5.0) == pytest.approx(1.5)
    with pytest.raises(WindowError):
        com_displacement(ts, com, 8.0, 5.0)
    # nan gaps are bridged by interpolation
    com2 = com.copy()
    com2[40:45] = np.nan
    assert com_displacement(ts, com2, 2.0, 5.0) == pytest.approx(1.5)
    # sector weight dropping below threshold at an endpoint invalidates it
    weight = np.ones_like(ts)
    weight[60:] = 0.5  # t >= 6, so the t = 7 endpoint is depleted
    with pytest.raises(WindowError):
        com_displacement(ts, com, 2.0, 5.0, sector_weight=weight)
