"""Domain-wall chain: reduced model, projections, parameter plumbing."""

import numpy as np
import pytest

from qxpsim.basis import QuantumState, prefix_domain_bits
from qxpsim.domain import (
    DomainParameters,
    DomainScheduleHamiltonian,
    build_domain_hamiltonian,
    detunings_from_eta,
    domain_center_of_mass,
    domain_populations,
    eta_from_detunings,
    project_to_domain,
    ssh_couplings,
)
from qxpsim.errors import ParameterError
from qxpsim.hamiltonians import QxpParameters, build_qxp_hamiltonian


def test_ssh_coupling_pattern():
    lam = ssh_couplings(1.0, 10.0, 8)
    # lam[m-1] hops m-1 -> m: even m gets lam_v, odd m >= 3 gets lam_w
    np.testing.assert_array_equal(lam, [0.0, 1.0, 10.0, 1.0, 10.0, 1.0, 10.0, 1.0])


def test_ssh_couplings_warns_on_odd_chain():
    with pytest.warns(UserWarning):
        ssh_couplings(1.0, 10.0, 7)


def test_eta_delta_roundtrip():
    rng = np.random.default_rng(11)
    delta = rng.normal(size=6)
    delta[0] = 0.0
    eta = eta_from_detunings(delta)
    np.testing.assert_allclose(eta, np.cumsum(delta), atol=0)
    np.testing.assert_allclose(detunings_from_eta(eta), delta, atol=1e-15)
    with pytest.raises(ParameterError):
        eta_from_detunings(np.ones(4))  # delta_1 must vanish


def test_domain_hamiltonian_tridiagonal():
    lam = np.array([0.0, 2.0, 3.0, 4.0])
    eta = np.array([0.0, 0.5, 1.5, -1.0])
    h = build_domain_hamiltonian(DomainParameters(4, lam, eta))
    expect = np.diag(eta) + np.diag(lam[1:], 1) + np.diag(lam[1:], -1)
    np.testing.assert_allclose(h, expect, atol=0)


def test_block_equals_reduced_model():
    # The prefix-domain block of the constrained spin model is exactly the
    # N x N tridiagonal chain when lam_1 = delta_1 = 0.
    n = 7
    rng = np.random.default_rng(5)
    lam = rng.uniform(0.3, 2.0, n)
    lam[0] = 0.0
    delta = rng.normal(size=n)
    delta[0] = 0.0
    hq = build_qxp_hamiltonian(QxpParameters(n, lam, delta)).toarray()
    idx = [prefix_domain_bits(m) for m in range(1, n + 1)]
    block = hq[np.ix_(idx, idx)]
    hd = build_domain_hamiltonian(
        DomainParameters.from_site_detunings(n, lam, delta))
    np.testing.assert_allclose(block, hd, atol=1e-14)
    # and the block does not couple out of the sector at all
    mask = np.ones(2**n, dtype=bool)
    mask[idx] = False
    assert np.abs(hq[np.ix_(mask, idx)]).max() == 0.0


def test_project_to_domain():
    n = 4
    amps = np.zeros(16, dtype=complex)
    amps[prefix_domain_bits(2)] = np.sqrt(0.6)
    amps[0b0100] = np.sqrt(0.4)  # detached excitation, pure leakage
    s = QuantumState(amps, "spin", n)
    dom, leak = project_to_domain(s)
    assert dom[1] == pytest.approx(np.sqrt(0.6))
    assert leak == pytest.approx(0.4)
    pops = domain_populations(s)
    assert pops[1] == pytest.approx(0.6)
    assert pops.sum() == pytest.approx(0.6)


def test_center_of_mass_floor():
    pops = np.array([0.0, 0.25, 0.75])
    assert domain_center_of_mass(pops) == pytest.approx((2 * 0.25 + 3 * 0.75))
    assert np.isnan(domain_center_of_mass(np.full(3, 1e-9)))


def test_domain_schedule_combo_matches_matrix():
    n = 6
    lam = lambda t: ssh_couplings(1.0, 2.0 + np.sin(t), n)
    eta = lambda t: np.cos(t) * np.arange(n, dtype=float)
    params = DomainParameters(n, lam, eta)
    sched = DomainScheduleHamiltonian(params, (0.0, 5.0))
    rng = np.random.default_rng(2)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    pairs = [(0.5, 0.3), (0.5, 4.7)]
    ref = sum(c * (build_domain_hamiltonian(params, t) @ v) for c, t in pairs)
    np.testing.assert_allclose(sched.combo(pairs)(v), ref, atol=1e-12)
    assert sched.full_norm_bound() > 0
