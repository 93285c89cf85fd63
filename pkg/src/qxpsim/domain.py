"""Single-domain sector of the constrained chain.

With a seeded left edge (lam_1 = delta_1 = 0) the constrained dynamics
never leaves the span of the prefix-domain states |m> = |1...10...0>,
m = 1..N.  On that block the Hamiltonian is the N x N tridiagonal matrix

    <m|H|m-1> = lam_m           (hop: flip of site m, m = 2..N)
    <m|H|m>   = eta_m = sum_{j<=m} delta_j    (delta_1 = 0)

i.e. a single-particle chain for the domain-wall position.  Staggered
hops make it an SSH chain; modulated (lam_m(t), eta_m(t)) make it a
Thouless pump.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import QuantumState, prefix_domain_bits, _check_n_sites
from .errors import ParameterError
from .hamiltonians import _as_site_array


def ssh_couplings(lam_v: float, lam_w: float, n_sites: int) -> np.ndarray:
    """Per-site rates giving alternating domain hops (lam_v, lam_w, lam_v, ...).

    Even sites m carry lam_v, odd sites m >= 3 carry lam_w; site 1 is the
    seed and carries no rate.  The first hop (m=2) is therefore lam_v and
    hops alternate from there.
    """
    _check_n_sites(n_sites)
    if not np.isfinite(lam_v) or not np.isfinite(lam_w):
        raise ParameterError("lam_v and lam_w must be finite")
    if n_sites % 2:
        warnings.warn(
            f"N={n_sites} is odd: the last dimer is incomplete and the "
            "edge-state pair is not symmetric", stacklevel=2)
    lam = np.zeros(n_sites)
    for m in range(2, n_sites + 1):
        lam[m - 1] = lam_v if m % 2 == 0 else lam_w
    return lam


def eta_from_detunings(delta) -> np.ndarray:
    """Domain energies eta_m = sum_{j<=m} delta_j."""
    delta = np.asarray(delta, dtype=float)
    if delta.size and delta[0] != 0.0:
        raise ParameterError("delta_1 must be 0 (seed site carries no detuning)")
    return np.cumsum(delta)


def detunings_from_eta(eta) -> np.ndarray:
    """Site detunings delta_j = eta_j - eta_{j-1} (delta_1 = 0 by convention)."""
    eta = np.asarray(eta, dtype=float)
    delta = np.empty_like(eta)
    if eta.size:
        delta[0] = 0.0
        delta[1:] = np.diff(eta)
    return delta


@dataclass
class DomainParameters:
    """Hops and on-site energies of the domain-sector chain.

    `lam` and `eta` are site-indexed arrays of length N (or callables
    t -> array for schedules); lam[0] belongs to the seed site and never
    enters the matrix.
    """

    n_sites: int
    lam: np.ndarray | Callable[[float], np.ndarray]
    eta: np.ndarray | Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        _check_n_sites(self.n_sites)
        if not callable(self.lam):
            self.lam = _as_site_array(self.lam, self.n_sites, "lam")
        if self.eta is None:
            self.eta = np.zeros(self.n_sites)
        if not callable(self.eta):
            self.eta = _as_site_array(self.eta, self.n_sites, "eta")

    @classmethod
    def from_site_detunings(cls, n_sites: int, lam, delta) -> "DomainParameters":
        return cls(n_sites, lam, eta_from_detunings(delta))

    @property
    def is_static(self) -> bool:
        return not callable(self.lam) and not callable(self.eta)

    def lam_at(self, t: float) -> np.ndarray:
        return np.asarray(self.lam(t) if callable(self.lam) else self.lam, dtype=float)

    def eta_at(self, t: float) -> np.ndarray:
        return np.asarray(self.eta(t) if callable(self.eta) else self.eta, dtype=float)


def build_domain_hamiltonian(params: DomainParameters, t: float = 0.0) -> np.ndarray:
    """Dense tridiagonal domain Hamiltonian at time t."""
    lam = params.lam_at(t)
    eta = params.eta_at(t)
    hops = lam[1:]
    return np.diag(eta) + np.diag(hops, 1) + np.diag(hops, -1)


def project_to_domain(state: QuantumState) -> tuple[np.ndarray, float]:
    """Amplitudes on the prefix-domain states and the leaked weight.

    Returns (a, leakage) with a[m-1] = <m|psi> for m = 1..N and
    leakage = 1 - sum |a|^2, the population outside the domain sector.
    """
    if state.basis == "domain":
        a = state.amplitudes.copy()
        return a, float(max(0.0, 1.0 - np.vdot(a, a).real))
    idx = np.array([prefix_domain_bits(m) for m in range(1, state.n_sites + 1)])
    a = state.amplitudes[idx].copy()
    return a, float(max(0.0, 1.0 - np.vdot(a, a).real))


def domain_populations(state: QuantumState) -> np.ndarray:
    a, _ = project_to_domain(state)
    return np.abs(a) ** 2


def domain_center_of_mass(populations: np.ndarray, floor: float = 1e-6) -> float:
    """Mean domain length sum_m m P_m / sum_m P_m; nan below the floor."""
    total = populations.sum()
    if total < floor:
        return float("nan")
    m = np.arange(1, populations.size + 1)
    return float((m * populations).sum() / total)


class DomainScheduleHamiltonian:
    """Time-dependent domain chain exposing weighted-combination matvecs.

    H(t) is linear in (lam(t), eta(t)), so sum_k c_k H(t_k) is the
    tridiagonal matrix built from the correspondingly combined arrays.
    """

    is_static = False

    def __init__(self, params: DomainParameters, t_span: tuple[float, float],
                 modulation_period: float | None = None):
        self.params = params
        self.n_sites = params.n_sites
        self.dim = params.n_sites
        self.t_span = (float(t_span[0]), float(t_span[1]))
        self.modulation_period = modulation_period

    def combo(self, pairs: list[tuple[float, float]]):
        lam_eff = np.zeros(self.n_sites)
        eta_eff = np.zeros(self.n_sites)
        for c, t in pairs:
            lam_eff += c * self.params.lam_at(t)
            eta_eff += c * self.params.eta_at(t)
        h = build_domain_hamiltonian(DomainParameters(self.n_sites, lam_eff, eta_eff))

        def apply(v):
            return h @ v

        return apply

    def matrix(self, t: float) -> np.ndarray:
        return build_domain_hamiltonian(self.params, t)

    def mod_norm_bound(self, n_samples: int = 128) -> float:
        t0, t1 = self.t_span
        worst = 0.0
        for t in np.linspace(t0, t1, n_samples):
            h = self.matrix(t)
            worst = max(worst, float(np.abs(h).sum(axis=1).max()))
        return worst

    # every term is modulated, so the full bound coincides
    full_norm_bound = mod_norm_bound
