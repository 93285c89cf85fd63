"""Basis enumeration, domain indexing, and state containers."""

import numpy as np
import pytest

from qxpsim.basis import (
    N_SITE_LIMIT,
    QuantumState,
    SpinConfiguration,
    bit_table,
    domain_index,
    enumerate_basis,
    prefix_domain_bits,
)
from qxpsim.errors import CapacityError, NormalizationError, ParameterError


def test_enumerate_basis_counts():
    for n in (1, 2, 5):
        states = enumerate_basis(n)
        assert len(states) == 2**n
        assert states[0].bits == 0
        assert states[-1].bits == 2**n - 1


def test_spin_configuration_occupations():
    c = SpinConfiguration(0b1011, 4)
    assert c.is_excited(1)
    assert c.is_excited(2)
    assert not c.is_excited(3)
    assert c.is_excited(4)
    assert c.excitation_count() == 3
    assert c.label() == "1101"
    with pytest.raises(ParameterError):
        c.is_excited(0)


def test_prefix_domain_bits():
    # m contiguous excitations anchored at site 1
    assert prefix_domain_bits(1) == 0b1
    assert prefix_domain_bits(3) == 0b111
    assert domain_index(SpinConfiguration(0b111, 6)) == 3
    # hole inside the block or detached excitation is not a domain state
    assert domain_index(SpinConfiguration(0b101, 6)) is None
    assert domain_index(SpinConfiguration(0b110, 6)) is None
    assert domain_index(SpinConfiguration(0, 6)) is None


def test_bit_table_matches_enumeration():
    bt = bit_table(4)
    assert bt.shape == (16, 4)
    for s in enumerate_basis(4):
        occ = [float(s.is_excited(j)) for j in range(1, 5)]
        np.testing.assert_array_equal(bt[s.bits], occ)
    # cache returns a read-only view
    with pytest.raises(ValueError):
        bt[0, 0] = 7.0


def test_site_limit_enforced():
    with pytest.raises(CapacityError):
        enumerate_basis(N_SITE_LIMIT + 1)


def test_quantum_state_normalization_guard():
    v = np.zeros(4)
    v[0] = 0.5
    with pytest.raises(NormalizationError):
        QuantumState(v, "domain", 4)
    ok = QuantumState(np.array([1.0, 0, 0, 0]), "domain", 4)
    assert ok.dim == 4


def test_quantum_state_basis_validation():
    with pytest.raises(ParameterError):
        QuantumState(np.array([1.0, 0]), "momentum", 1)
    # wrong length for the declared basis
    with pytest.raises(ParameterError):
        QuantumState(np.array([1.0, 0, 0]), "spin", 2)


def test_seed_states():
    spin = QuantumState.seed(3, "spin")
    assert spin.amplitudes[prefix_domain_bits(1)] == 1.0
    dom = QuantumState.seed(3, "domain")
    assert dom.amplitudes[0] == 1.0
    assert dom.dim == 3


def test_fock_states():
    s = QuantumState.fock(4, 2, "domain")
    assert s.amplitudes[1] == 1.0
    joint = QuantumState.fock(4, 2, "spin")
    assert joint.amplitudes[prefix_domain_bits(2)] == 1.0


def test_raw_bypasses_norm_check():
    v = np.array([1.0 + 5e-9, 0, 0, 0])
    s = QuantumState.raw(v, "domain", 4)
    assert abs(np.linalg.norm(s.amplitudes) - 1.0) > QuantumState.NORM_TOL
