"""Topological diagnostics of the domain-wall chain.

Static staggered hops realize a two-band chain whose zero-energy edge
pair hybridizes across the bulk; modulated hops and energies realize a
three-band pump whose band Chern numbers fix the wall displacement per
cycle (3 C sites, one unit cell per crossing).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, WindowError


def localization_length(lam_v: float, lam_w: float) -> float:
    """Edge-state decay length 1 / ln|lam_w / lam_v| in unit cells.

    Positive in the topological phase (|lam_w| > |lam_v|), negative in
    the trivial phase, infinite at the transition.
    """
    if lam_v == 0 or lam_w == 0:
        raise ParameterError("localization length needs nonzero hops")
    denom = np.log(abs(lam_w)) - np.log(abs(lam_v))
    if denom == 0.0:
        return np.inf
    return 1.0 / denom


def winding_number(lam_v: float, lam_w: float, k_samples: int = 256) -> int:
    """Winding of the off-diagonal bulk amplitude around the origin.

    Computed from the unwrapped phase of h(k) = lam_v + lam_w e^{ik}; the
    gap closes for |lam_v| = |lam_w| and the winding is undefined there.
    """
    if k_samples < 64:
        raise ParameterError("k_samples must be at least 64")
    if abs(abs(lam_v) - abs(lam_w)) < 1e-12 * max(abs(lam_v), abs(lam_w), 1.0):
        raise ParameterError(
            "winding number undefined at the gap closing |lam_v| = |lam_w|")
    k = np.linspace(0.0, 2.0 * np.pi, k_samples + 1)
    h = lam_v + lam_w * np.exp(1j * k)
    theta = np.unwrap(np.angle(h))
    return int(np.rint((theta[-1] - theta[0]) / (2.0 * np.pi)))


@dataclass
class EdgeStateReport:
    """Hybridized edge pair of a finite staggered chain."""

    n_sites: int
    lam_v: float
    lam_w: float
    topological: bool
    localization_length: float
    energy_plus: float
    energy_minus: float
    hybridization_period: float

    @property
    def splitting(self) -> float:
        return self.energy_plus - self.energy_minus


def edge_state_report(lam_v: float, lam_w: float, n_sites: int) -> EdgeStateReport:
    """Closed-form edge-pair energies of the N-site staggered chain.

    The pair splits as 2 |lam_v| exp(-(N/2 - 1)/xi), i.e. the weak hop
    scaled down once per bulk unit cell, and the left-right oscillation
    period is 2 pi over the splitting.  In the trivial phase there is no
    midgap pair and the report carries nan energies.
    """
    if n_sites < 2 or n_sites % 2:
        raise ParameterError("edge-state analysis needs an even chain of >= 2 sites")
    xi = localization_length(lam_v, lam_w)
    topological = abs(lam_w) > abs(lam_v)
    if not topological:
        return EdgeStateReport(n_sites, lam_v, lam_w, False, xi,
                               np.nan, np.nan, np.nan)
    cells = n_sites / 2.0 - 1.0
    energy = abs(lam_v) * np.exp(-cells / xi)
    period = np.pi / energy if energy > 0 else np.inf
    return EdgeStateReport(n_sites, lam_v, lam_w, True, xi,
                           energy, -energy, period)


def edge_pair_splitting(h_domain: np.ndarray) -> tuple[float, float]:
    """Numerically exact midgap pair (E-, E+) of a domain Hamiltonian."""
    h = np.asarray(h_domain, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ParameterError("expected a square matrix")
    n = h.shape[0]
    if n % 2:
        raise ParameterError("midgap pair defined for even chains only")
    w = np.linalg.eigvalsh(h)
    return float(w[n // 2 - 1]), float(w[n // 2])


def band_chern_numbers(bloch, n_k: int = 24, n_phi: int = 24) -> np.ndarray:
    """Chern numbers of all bands of bloch(k, phi), bottom to top.

    Plaquette field-strength method on a (k, phi) torus grid.  Sign
    convention: a filled band of Chern number C transports the wall by
    3 C sites per 2 pi of forward (omega > 0) phase advance.  Raises if
    any adjacent-band gap collapses on the grid.
    """
    if n_k < 24 or n_phi < 24:
        raise ParameterError("Chern grid must be at least 24 x 24")
    ks = np.linspace(-np.pi, np.pi, n_k, endpoint=False)
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    sample = np.asarray(bloch(ks[0], phis[0]))
    n_band = sample.shape[0]
    vecs = np.empty((n_k, n_phi, n_band, n_band), dtype=complex)
    scale = 0.0
    min_gap = np.inf
    for i, k in enumerate(ks):
        for j, phi in enumerate(phis):
            w, v = np.linalg.eigh(bloch(k, phi))
            vecs[i, j] = v
            scale = max(scale, float(np.max(np.abs(w))))
            min_gap = min(min_gap, float(np.min(np.diff(w))))
    if min_gap < 1e-9 * max(scale, 1.0):
        raise ParameterError(
            f"bands touch on the sampling grid (gap {min_gap:.3e}); "
            "Chern numbers are undefined")
    # U(1) links along +phi and +k; plaquette curvature counts phi x k
    # circulation, which matches the displacement convention above.
    chern = np.zeros(n_band)
    for n in range(n_band):
        u = vecs[:, :, :, n]
        link_phi = np.einsum("ijb,ijb->ij", u.conj(), np.roll(u, -1, axis=1))
        link_k = np.einsum("ijb,ijb->ij", u.conj(), np.roll(u, -1, axis=0))
        plaq = (link_phi * np.roll(link_k, -1, axis=1)
                * np.conj(np.roll(link_phi, -1, axis=0)) * np.conj(link_k))
        chern[n] = np.angle(plaq).sum() / (2.0 * np.pi)
    rounded = np.rint(chern)
    if np.max(np.abs(chern - rounded)) > 1e-6:
        raise ParameterError(
            f"Chern sums did not converge to integers: {chern}")
    return rounded.astype(int)


def identify_occupied_band(bloch, phi: float, energy: float,
                           n_k: int = 64) -> int:
    """Index (bottom to top) of the band closest to `energy` at phase phi."""
    ks = np.linspace(-np.pi, np.pi, n_k, endpoint=False)
    means = np.mean([np.linalg.eigvalsh(bloch(k, phi)) for k in ks], axis=0)
    return int(np.argmin(np.abs(means - energy)))


def oscillation_period(times, series, expected_period: float | None = None,
                       height_frac: float = 0.7,
                       distance_frac: float = 0.3) -> float:
    """Mean peak-to-peak spacing of a sampled oscillation.

    Peaks above height_frac of the series maximum are located with a
    minimum separation of distance_frac of the expected period (when
    given), then each is refined by a parabola through its three
    samples.  Returns nan when fewer than two peaks are found.
    Assumes a (near-)uniform time grid.
    """
    from scipy.signal import find_peaks

    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    if times.size < 3:
        return np.nan
    dt = float(np.median(np.diff(times)))
    distance = 1
    if expected_period is not None and expected_period > 0 and dt > 0:
        distance = max(1, int(distance_frac * expected_period / dt))
    peaks, _ = find_peaks(series, height=height_frac * float(series.max()),
                          distance=distance)
    peaks = peaks[(peaks > 0) & (peaks < times.size - 1)]
    if peaks.size < 2:
        return np.nan
    refined = []
    for i in peaks:
        y0, y1, y2 = series[i - 1], series[i], series[i + 1]
        denom = y0 - 2.0 * y1 + y2
        shift = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
        shift = float(np.clip(shift, -1.0, 1.0))
        refined.append(times[i] + shift * dt)
    return float(np.mean(np.diff(refined)))


def com_displacement(times, com, t_start: float, duration: float,
                     sector_weight=None, min_weight: float = 0.99) -> float:
    """Wall displacement com(t_start + duration) - com(t_start).

    Endpoint values are linearly interpolated from the sampled series.
    If `sector_weight` (total domain-sector population per sample) is
    given, both endpoints must retain at least `min_weight`; outside
    the sampled range or on nan endpoints the window is unusable.
    """
    times = np.asarray(times, dtype=float)
    com = np.asarray(com, dtype=float)
    t_end = t_start + duration
    if t_start < times[0] - 1e-9 or t_end > times[-1] + 1e-9:
        raise WindowError(
            f"window [{t_start}, {t_end}] not covered by samples "
            f"[{times[0]}, {times[-1]}]")
    good = np.isfinite(com)
    if not np.all(good):
        com = np.interp(times, times[good], com[good])
    x0 = float(np.interp(t_start, times, com))
    x1 = float(np.interp(t_end, times, com))
    if sector_weight is not None:
        weight = np.asarray(sector_weight, dtype=float)
        w0 = float(np.interp(t_start, times, weight))
        w1 = float(np.interp(t_end, times, weight))
        if min(w0, w1) < min_weight:
            raise WindowError(
                f"domain-sector population {min(w0, w1):.4f} below "
                f"{min_weight} at a window endpoint; displacement unreliable")
    return x1 - x0
