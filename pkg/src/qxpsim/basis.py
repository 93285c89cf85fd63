"""Computational basis for open chains of two-level sites.

Sites are labeled j = 1..N. A configuration is stored as an integer bit
pattern with site 1 on the least significant bit, so the basis index of a
configuration equals its bit pattern. N is capped at 30 to keep the
enumeration (2^N states) addressable; dynamics enforces a much smaller
soft limit (see evolution.DEFAULT_MAX_DIM).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, NormalizationError, ParameterError

N_SITE_LIMIT = 30


def _check_n_sites(n_sites: int) -> None:
    if not isinstance(n_sites, (int, np.integer)) or isinstance(n_sites, bool):
        raise ParameterError(f"n_sites must be an integer, got {n_sites!r}")
    if n_sites < 1:
        raise CapacityError(f"n_sites must be >= 1, got {n_sites}")
    if n_sites > N_SITE_LIMIT:
        raise CapacityError(
            f"n_sites={n_sites} exceeds the hard limit of {N_SITE_LIMIT} sites"
        )


@dataclass(frozen=True)
class SpinConfiguration:
    """One classical configuration of an N-site chain."""

    bits: int
    n_sites: int

    def __post_init__(self):
        _check_n_sites(self.n_sites)
        if not 0 <= self.bits < (1 << self.n_sites):
            raise ParameterError(
                f"bit pattern {self.bits} out of range for {self.n_sites} sites"
            )

    def is_excited(self, j: int) -> bool:
        """Occupation of site j (1-based)."""
        if not 1 <= j <= self.n_sites:
            raise ParameterError(f"site index {j} outside 1..{self.n_sites}")
        return bool((self.bits >> (j - 1)) & 1)

    def excitation_count(self) -> int:
        return bin(self.bits).count("1")

    def label(self) -> str:
        """Left-to-right site string, excited sites rendered as '1'."""
        return "".join(
            "1" if self.is_excited(j) else "0" for j in range(1, self.n_sites + 1)
        )

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return f"|{self.label()}>"


def enumerate_basis(n_sites: int) -> list[SpinConfiguration]:
    """All 2^N configurations, ordered by bit pattern (index == bits)."""
    _check_n_sites(n_sites)
    return [SpinConfiguration(b, n_sites) for b in range(1 << n_sites)]


def prefix_domain_bits(m: int) -> int:
    """Bit pattern of the domain state with sites 1..m excited."""
    if m < 1:
        raise ParameterError(f"domain size must be >= 1, got {m}")
    return (1 << m) - 1


def domain_index(config: SpinConfiguration) -> int | None:
    """Domain size m if `config` is a prefix domain |1..1 0..0>, else None.

    The vacuum is not a domain state (m >= 1 by construction).
    """
    bits = config.bits
    if bits == 0:
        return None
    m = bits.bit_length()
    return m if bits == (1 << m) - 1 else None


_BIT_TABLE_CACHE: dict[int, np.ndarray] = {}


def bit_table(n_sites: int) -> np.ndarray:
    """(2^N, N) float array; column j-1 holds the occupation of site j."""
    _check_n_sites(n_sites)
    tbl = _BIT_TABLE_CACHE.get(n_sites)
    if tbl is None:
        states = np.arange(1 << n_sites, dtype=np.int64)
        tbl = ((states[:, None] >> np.arange(n_sites)[None, :]) & 1).astype(float)
        tbl.setflags(write=False)
        _BIT_TABLE_CACHE[n_sites] = tbl
    return tbl


@dataclass
class QuantumState:
    """State vector tagged with its basis.

    basis = "spin"   : amplitudes over the 2^N configurations of basis.py
    basis = "domain" : amplitudes over the N prefix-domain states m = 1..N
    """

    amplitudes: np.ndarray
    basis: str
    n_sites: int

    NORM_TOL = 1e-10

    def __post_init__(self):
        _check_n_sites(self.n_sites)
        if self.basis not in ("spin", "domain"):
            raise ParameterError(f"unknown basis {self.basis!r}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        expected = (1 << self.n_sites) if self.basis == "spin" else self.n_sites
        if amps.shape != (expected,):
            raise ParameterError(
                f"amplitude vector has shape {amps.shape}, expected ({expected},)"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise NormalizationError("amplitudes contain non-finite entries")
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > self.NORM_TOL:
            raise NormalizationError(
                f"state norm {nrm!r} deviates from 1 by more than {self.NORM_TOL}"
            )
        self.amplitudes = amps

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def raw(cls, amplitudes: np.ndarray, basis: str, n_sites: int) -> "QuantumState":
        """Wrap evolved amplitudes without the unit-norm check.

        Integrators accumulate harmless norm drift below NORM_TOL limits;
        they report the drift instead of failing validation.
        """
        obj = object.__new__(cls)
        obj.amplitudes = np.asarray(amplitudes, dtype=complex)
        obj.basis = basis
        obj.n_sites = n_sites
        if basis not in ("spin", "domain"):
            raise ParameterError(f"unknown basis {basis!r}")
        return obj

    @classmethod
    def fock(cls, n_sites: int, m: int, basis: str = "spin") -> "QuantumState":
        """Prefix-domain state of size m, in either basis."""
        _check_n_sites(n_sites)
        if not 1 <= m <= n_sites:
            raise ParameterError(f"domain size {m} outside 1..{n_sites}")
        if basis == "spin":
            amps = np.zeros(1 << n_sites, dtype=complex)
            amps[prefix_domain_bits(m)] = 1.0
        else:
            amps = np.zeros(n_sites, dtype=complex)
            amps[m - 1] = 1.0
        return cls(amps, basis, n_sites)

    @classmethod
    def seed(cls, n_sites: int, basis: str = "spin") -> "QuantumState":
        """Single excitation on site 1 (domain of size one)."""
        return cls.fock(n_sites, 1, basis)
