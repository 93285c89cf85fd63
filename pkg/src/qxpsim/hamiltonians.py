"""Spin-basis Hamiltonians for the constrained chain.

Two models act on the same 2^N configuration basis:

* the constrained flip model: site j flips with rate lam[j] only when
  exactly one of its neighbors is excited, plus on-site detunings
  delta[j] on excited sites.  Virtual sites 0 and N+1 are permanently in
  the ground state, so site 1 (site N) can only flip when site 2
  (site N-1) is excited.

* the Rydberg facilitation model: unconstrained drive lam[j] sigma^x_j,
  detunings (delta_offset + delta_mod[j]) n_j, and nearest-neighbor
  interaction v_nn n_j n_{j+1} on the N-1 open-chain bonds.  With
  v_nn + delta_offset = 0 an excited neighbor shifts a site into
  resonance, which reproduces the constrained model at large
  |delta_offset|.

Matrices are scipy CSR with deterministic (sorted-index) layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .basis import bit_table, _check_n_sites
from .errors import ParameterError

HERMITICITY_TOL = 1e-12


def _as_site_array(values, n_sites: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (n_sites,):
        raise ParameterError(
            f"{name} must have one entry per site, got shape {arr.shape} for N={n_sites}"
        )
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite entries")
    return arr


@dataclass
class QxpParameters:
    """Site-resolved rates of the constrained flip model."""

    n_sites: int
    lam: np.ndarray
    delta: np.ndarray | None = None

    def __post_init__(self):
        _check_n_sites(self.n_sites)
        self.lam = _as_site_array(self.lam, self.n_sites, "lam")
        if self.delta is None:
            self.delta = np.zeros(self.n_sites)
        self.delta = _as_site_array(self.delta, self.n_sites, "delta")

    @property
    def is_seed_boundary(self) -> bool:
        """True when lam_1 = delta_1 = 0, which pins the left domain edge."""
        return self.lam[0] == 0.0 and self.delta[0] == 0.0


@dataclass
class RydbergParameters:
    """Drive, detuning and interaction of the facilitation chain.

    `lam` and `delta_mod` may be per-site arrays (static) or callables
    t -> array (schedules).  `delta_mod` holds the site-dependent part on
    top of the uniform `delta_offset`; site 1 carries neither drive nor
    detuning when `seed_boundary` is set.
    """

    n_sites: int
    lam: np.ndarray | Callable[[float], np.ndarray]
    delta_offset: float
    v_nn: float
    delta_mod: np.ndarray | Callable[[float], np.ndarray] | None = None
    facilitation_mode: bool = True
    seed_boundary: bool = True

    def __post_init__(self):
        _check_n_sites(self.n_sites)
        self.delta_offset = float(self.delta_offset)
        self.v_nn = float(self.v_nn)
        if not np.isfinite(self.delta_offset) or not np.isfinite(self.v_nn):
            raise ParameterError("delta_offset and v_nn must be finite")
        if self.facilitation_mode and abs(self.v_nn + self.delta_offset) > 1e-9:
            raise ParameterError(
                "facilitation_mode requires v_nn = -delta_offset "
                f"(got v_nn={self.v_nn}, delta_offset={self.delta_offset})"
            )
        if not callable(self.lam):
            self.lam = _as_site_array(self.lam, self.n_sites, "lam")
            if self.seed_boundary and self.lam[0] != 0.0:
                raise ParameterError("seed_boundary requires lam_1 = 0")
        if self.delta_mod is None:
            self.delta_mod = np.zeros(self.n_sites)
        if not callable(self.delta_mod):
            self.delta_mod = _as_site_array(self.delta_mod, self.n_sites, "delta_mod")
            if self.seed_boundary and self.delta_mod[0] != 0.0:
                raise ParameterError("seed_boundary requires delta_mod_1 = 0")

    @property
    def is_static(self) -> bool:
        return not callable(self.lam) and not callable(self.delta_mod)

    def lam_at(self, t: float) -> np.ndarray:
        lam = self.lam(t) if callable(self.lam) else self.lam
        lam = np.asarray(lam, dtype=float)
        if self.seed_boundary and lam[0] != 0.0:
            lam = lam.copy()
            lam[0] = 0.0  # the seed site is never driven in this mode
        return lam

    def delta_mod_at(self, t: float) -> np.ndarray:
        dm = self.delta_mod(t) if callable(self.delta_mod) else self.delta_mod
        dm = np.asarray(dm, dtype=float)
        if self.seed_boundary and dm[0] != 0.0:
            dm = dm.copy()
            dm[0] = 0.0
        return dm

    def site_detunings(self, t: float = 0.0) -> np.ndarray:
        """Delta_j = delta_offset + delta_mod_j, with Delta_1 = 0 for a seed edge."""
        d = self.delta_offset + self.delta_mod_at(t)
        if self.seed_boundary:
            d[0] = 0.0
        return d


def _flip_structure(n_sites: int, constrained: bool):
    """CSR flip matrix with data = site index of each entry (1-based).

    For the constrained model an entry (s^bit_j, s) exists only when
    exactly one neighbor of j is excited in s; neighbors outside the
    chain count as ground.
    """
    dim = 1 << n_sites
    states = np.arange(dim, dtype=np.int64)
    rows, cols, sites = [], [], []
    for j in range(1, n_sites + 1):
        left = (states >> (j - 2)) & 1 if j >= 2 else np.zeros(dim, dtype=np.int64)
        right = (states >> j) & 1 if j <= n_sites - 1 else np.zeros(dim, dtype=np.int64)
        if constrained:
            mask = (left ^ right).astype(bool)
            src = states[mask]
        else:
            src = states
        rows.append(src ^ (1 << (j - 1)))
        cols.append(src)
        sites.append(np.full(src.shape, j, dtype=np.int64))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    sites = np.concatenate(sites).astype(float)
    m = sp.coo_matrix((sites, (rows, cols)), shape=(dim, dim)).tocsr()
    m.sort_indices()
    site_map = m.data.astype(np.int64) - 1  # 0-based site of each stored entry
    return m, site_map


def build_qxp_hamiltonian(params: QxpParameters) -> sp.csr_matrix:
    """Constrained-chain Hamiltonian on the full 2^N basis."""
    n = params.n_sites
    flips, site_map = _flip_structure(n, constrained=True)
    h = flips.copy()
    h.data = params.lam[site_map]
    diag = bit_table(n) @ params.delta
    h = (h + sp.diags(diag)).tocsr()
    h.sort_indices()
    return h


def _interaction_diagonal(n_sites: int, v_nn: float) -> np.ndarray:
    states = np.arange(1 << n_sites, dtype=np.int64)
    bonds = np.zeros(states.shape, dtype=float)
    for j in range(1, n_sites):  # bonds (j, j+1), j = 1..N-1
        bonds += ((states >> (j - 1)) & (states >> j) & 1).astype(float)
    return v_nn * bonds


def build_rydberg_hamiltonian(params: RydbergParameters, t: float = 0.0) -> sp.csr_matrix:
    """Facilitation-chain Hamiltonian at time t on the full 2^N basis."""
    n = params.n_sites
    flips, site_map = _flip_structure(n, constrained=False)
    h = flips.copy()
    h.data = params.lam_at(t)[site_map]
    diag = bit_table(n) @ params.site_detunings(t)
    diag += _interaction_diagonal(n, params.v_nn)
    h = (h + sp.diags(diag)).tocsr()
    h.sort_indices()
    return h


def hermiticity_defect(h) -> float:
    """max |H - H^dagger| over all entries."""
    if sp.issparse(h):
        d = (h - h.conj().T).tocoo()
        return float(np.max(np.abs(d.data))) if d.nnz else 0.0
    h = np.asarray(h)
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def assert_hermitian(h, tol: float = HERMITICITY_TOL) -> None:
    defect = hermiticity_defect(h)
    if defect >= tol:
        raise ParameterError(f"operator is not Hermitian: defect {defect:.3e} >= {tol}")


class RydbergScheduleHamiltonian:
    """Time-dependent facilitation Hamiltonian with a fixed sparsity pattern.

    H(t) is linear in (lam(t), delta_mod(t)), so any weighted combination
    sum_k c_k H(t_k) is again a chain Hamiltonian with effective
    parameters; `combo` exploits that to return a cheap matvec closure.
    """

    def __init__(self, params: RydbergParameters, t_span: tuple[float, float],
                 modulation_period: float | None = None):
        self.params = params
        self.n_sites = params.n_sites
        self.dim = 1 << params.n_sites
        self.t_span = (float(t_span[0]), float(t_span[1]))
        self.modulation_period = modulation_period
        self._flips, self._site_map = _flip_structure(params.n_sites, constrained=False)
        self._bits = bit_table(params.n_sites)
        base = np.full(params.n_sites, params.delta_offset)
        if params.seed_boundary:
            base[0] = 0.0
        self._static_diag = self._bits @ base
        self._static_diag += _interaction_diagonal(params.n_sites, params.v_nn)

    is_static = False

    def combo(self, pairs: list[tuple[float, float]]):
        """Matvec closure for A = sum over (c, t) pairs of c * H(t)."""
        lam_eff = np.zeros(self.n_sites)
        dmod_eff = np.zeros(self.n_sites)
        scale = 0.0
        for c, t in pairs:
            lam_eff += c * self.params.lam_at(t)
            dmod_eff += c * self.params.delta_mod_at(t)
            scale += c
        if self.params.seed_boundary:
            dmod_eff[0] = 0.0
        flips = self._flips
        data = lam_eff[self._site_map]
        diag = scale * self._static_diag + self._bits @ dmod_eff
        indptr, indices = flips.indptr, flips.indices
        offdiag = sp.csr_matrix((data, indices, indptr), shape=flips.shape)

        def apply(v):
            return offdiag @ v + diag * v

        return apply

    def matrix(self, t: float) -> sp.csr_matrix:
        return build_rydberg_hamiltonian(self.params, t)

    def mod_norm_bound(self, n_samples: int = 128) -> float:
        """Sampled row-sum norm bound of the time-modulated part of H."""
        t0, t1 = self.t_span
        ts = np.linspace(t0, t1, n_samples)
        worst = 0.0
        for t in ts:
            lam = self.params.lam_at(t)
            dmod = self.params.delta_mod_at(t)
            diag_mag = np.abs(self._bits @ dmod).max() if np.any(dmod) else 0.0
            worst = max(worst, diag_mag + np.abs(lam).sum())
        return worst

    def full_norm_bound(self, n_samples: int = 128) -> float:
        """Sampled row-sum norm bound of the complete H(t)."""
        t0, t1 = self.t_span
        worst = 0.0
        for t in np.linspace(t0, t1, n_samples):
            lam = self.params.lam_at(t)
            dmod = self.params.delta_mod_at(t)
            diag = self._static_diag + self._bits @ dmod
            worst = max(worst, np.abs(diag).max() + np.abs(lam).sum())
        return worst
