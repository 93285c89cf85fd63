"""Quasiperiodic pump schedules for the domain-wall chain.

The three-site-period modulation

    lam_m(t) = lam0 * sin(phi(t) + 4 pi (m+1) / 3)
    eta_m(t) = eta0 * cos(phi(t) + 4 pi (m+1) / 3)

turns the domain chain into a charge pump: per 2 pi of phase the wall is
carried three sites, one site per avoided crossing of adjacent on-site
energies.  Crossings sit at phi = 2 pi k / 3 and the quiet plateaus
between them are centered at phi = pi/3 + 2 pi k / 3.

The same schedule is realized on the Rydberg chain through site
detunings delta_j = eta_j - eta_{j-1}, which reduce to the closed form
-sqrt(3) eta0 sin(phi + 4 pi j / 3 + 2 pi / 3).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

PLATEAU_RATIO_MIN = 5.0  # |eta0| below this multiple of lam0 blurs plateaus
ADIABATIC_RATIO_MAX = 0.1


@dataclass
class PumpSegment:
    """Linear phase ramp: phi advances by omega * duration."""

    duration: float
    omega: float

    def __post_init__(self):
        self.duration = float(self.duration)
        self.omega = float(self.omega)
        if not np.isfinite(self.duration) or self.duration < 0:
            raise ParameterError(f"segment duration must be >= 0, got {self.duration}")
        if not np.isfinite(self.omega):
            raise ParameterError("segment omega must be finite")


@dataclass
class PumpProgram:
    """Piecewise-linear pump phase phi(t) starting at t = 0."""

    segments: list[PumpSegment]
    phi0: float = 0.0

    def __post_init__(self):
        if not self.segments:
            raise ParameterError("a pump program needs at least one segment")
        self.phi0 = float(self.phi0)
        edges = [0.0]
        phis = [self.phi0]
        for seg in self.segments:
            edges.append(edges[-1] + seg.duration)
            phis.append(phis[-1] + seg.omega * seg.duration)
        self._edges = np.array(edges)
        self._phis = np.array(phis)

    @classmethod
    def single(cls, omega: float, duration: float, phi0: float = 0.0) -> "PumpProgram":
        return cls([PumpSegment(duration, omega)], phi0)

    @property
    def total_duration(self) -> float:
        return float(self._edges[-1])

    @property
    def breakpoints(self) -> np.ndarray:
        return self._edges.copy()

    def phase(self, t):
        """phi(t); clamps outside [0, total_duration]."""
        return np.interp(t, self._edges, self._phis)

    def omega_at(self, t: float) -> float:
        idx = int(np.searchsorted(self._edges, t, side="right")) - 1
        idx = min(max(idx, 0), len(self.segments) - 1)
        return self.segments[idx].omega

    def max_omega(self) -> float:
        return max(abs(s.omega) for s in self.segments)


def _site_phases(n_sites: int) -> np.ndarray:
    m = np.arange(1, n_sites + 1)
    return 4.0 * np.pi * (m + 1) / 3.0


@dataclass
class AahSchedule:
    """Three-periodic hop/energy modulation bound to a phase program."""

    lam0: float
    eta0: float
    program: PumpProgram
    n_sites: int

    def __post_init__(self):
        self.lam0 = float(self.lam0)
        self.eta0 = float(self.eta0)
        if not np.isfinite(self.lam0) or self.lam0 <= 0:
            raise ParameterError(f"lam0 must be positive, got {self.lam0}")
        if not np.isfinite(self.eta0):
            raise ParameterError("eta0 must be finite")
        if abs(self.eta0) < PLATEAU_RATIO_MIN * self.lam0:
            warnings.warn(
                f"|eta0| = {abs(self.eta0)} below {PLATEAU_RATIO_MIN} * lam0: "
                "plateaus are weakly resolved and the pumped wall will smear",
                stacklevel=2)
        self._phases = _site_phases(self.n_sites)

    def lam(self, t) -> np.ndarray:
        out = self.lam0 * np.sin(self.program.phase(t) + self._phases)
        out[0] = 0.0  # seed site carries no rate
        return out

    def eta(self, t) -> np.ndarray:
        return self.eta0 * np.cos(self.program.phase(t) + self._phases)

    def site_detunings(self, t) -> np.ndarray:
        """delta_j = eta_j - eta_{j-1} in closed form (delta_1 = 0)."""
        j = np.arange(1, self.n_sites + 1)
        out = -np.sqrt(3.0) * self.eta0 * np.sin(
            self.program.phase(t) + 4.0 * np.pi * j / 3.0 + 2.0 * np.pi / 3.0)
        out[0] = 0.0
        return out

    @property
    def delta_max(self) -> float:
        """Largest site detuning over a cycle, sqrt(3) |eta0|."""
        return np.sqrt(3.0) * abs(self.eta0)

    def recommended_delta_offset(self) -> float:
        """Facilitation offset large enough to keep the pump in-sector."""
        return -10.0 * self.delta_max

    def bloch_hamiltonian(self, k: float, phi: float) -> np.ndarray:
        """3x3 bulk Hamiltonian of one unit cell at crystal momentum k."""
        s = np.arange(3)
        eps = self.eta0 * np.cos(phi + 4.0 * np.pi * (s + 2) / 3.0)
        h = np.diag(eps).astype(complex)
        h[1, 0] = self.lam0 * np.sin(phi)
        h[2, 1] = self.lam0 * np.sin(phi + 4.0 * np.pi / 3.0)
        h[0, 2] = self.lam0 * np.sin(phi + 2.0 * np.pi / 3.0) * np.exp(1j * k)
        h[0, 1] = np.conj(h[1, 0])
        h[1, 2] = np.conj(h[2, 1])
        h[2, 0] = np.conj(h[0, 2])
        return h


@dataclass
class PumpMarkers:
    """Characteristic times of a constant-rate pump run."""

    period: float
    com_start: float
    com_end: float
    plateau_times: np.ndarray
    transfer_times: np.ndarray


def pump_markers(omega: float, n_periods: float = 1.0) -> PumpMarkers:
    """Measurement window and plateau/transfer times for phi = omega t.

    The wall-position reading is taken one full period apart, starting at
    the first plateau center t = T/6; at t = 0 and t = T the phase sits
    on a crossing and the wall position is ill-defined.
    """
    if omega == 0:
        raise ParameterError("pump markers need a nonzero omega")
    period = 2.0 * np.pi / abs(omega)
    start = period / 6.0
    end = start + n_periods * period
    k_max = int(np.floor((end - start) / (period / 3.0) + 1e-9))
    plateaus = start + (period / 3.0) * np.arange(k_max + 1)
    transfers = (period / 3.0) * np.arange(1, int(3 * n_periods) + 1)
    return PumpMarkers(period=period, com_start=start, com_end=end,
                       plateau_times=plateaus, transfer_times=transfers)


@dataclass
class AdiabaticityReport:
    min_gap: float
    max_omega: float
    ratio: float

    @property
    def adiabatic(self) -> bool:
        return self.ratio < ADIABATIC_RATIO_MAX


def adiabaticity_check(schedule: AahSchedule, n_k: int = 32,
                       n_phi: int = 96) -> AdiabaticityReport:
    """Smallest interband gap of the bulk bands versus the drive rate."""
    gaps = np.inf
    for phi in np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False):
        for k in np.linspace(-np.pi, np.pi, n_k, endpoint=False):
            w = np.linalg.eigvalsh(schedule.bloch_hamiltonian(k, phi))
            gaps = min(gaps, float(np.min(np.diff(w))))
    max_omega = schedule.program.max_omega()
    ratio = max_omega / gaps if gaps > 0 else np.inf
    return AdiabaticityReport(min_gap=float(gaps), max_omega=max_omega,
                              ratio=float(ratio))


def composite_program(omega: float, grow_cycles: float, hold: float,
                      shrink_cycles: float, final_hold: float,
                      phi0: float = 0.0) -> PumpProgram:
    """Grow / hold / shrink / hold sequence of a reversible pump.

    Growth runs to a plateau phase (an extra sixth of a cycle past the
    whole cycles) so the wall is parked between crossings before the
    holds; the shrink segment runs the same rate backwards.
    """
    if omega <= 0:
        raise ParameterError("composite programs are defined for omega > 0")
    period = 2.0 * np.pi / omega
    grow = PumpSegment((grow_cycles + 1.0 / 6.0) * period, omega)
    segs = [grow]
    if hold > 0:
        segs.append(PumpSegment(hold, 0.0))
    if shrink_cycles > 0:
        segs.append(PumpSegment(shrink_cycles * period, -omega))
    if final_hold > 0:
        segs.append(PumpSegment(final_hold, 0.0))
    return PumpProgram(segs, phi0)
