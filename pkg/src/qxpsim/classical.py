"""Mean-field rate equations for the dissipative facilitation chain.

In the strongly dephased limit the site occupations p_j obey

    dp_j/dt = Gamma_j (1 - 2 p_j) - gamma p_j
    Gamma_j = gamma_f0 [ p_{j-1} (1 - p_{j+1}) + (1 - p_{j-1}) p_{j+1} ]

i.e. flips happen at rate gamma_f0 when exactly one neighbor is excited
(mean-field XOR), and gamma is the single-site decay rate.  Virtual
neighbors p_0 = p_{N+1} = 0 terminate the chain.  Without decay the
facilitated dynamics relaxes every reachable site to p = 1/2.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import _check_n_sites
from .errors import NumericalError, ParameterError

CLAMP_WARN = 1e-9
CLAMP_FAIL = 1e-6
STEP_FRACTION = 0.01


@dataclass
class ClassicalParameters:
    """Rates of the classical facilitation chain."""

    n_sites: int
    gamma_f0: float
    gamma: float = 0.0

    def __post_init__(self):
        _check_n_sites(self.n_sites)
        self.gamma_f0 = float(self.gamma_f0)
        self.gamma = float(self.gamma)
        if not np.isfinite(self.gamma_f0) or self.gamma_f0 < 0:
            raise ParameterError(f"gamma_f0 must be finite and >= 0, got {self.gamma_f0}")
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ParameterError(f"gamma must be finite and >= 0, got {self.gamma}")

    @classmethod
    def from_drive(cls, n_sites: int, omega: float, gamma_perp: float,
                   gamma: float = 0.0) -> "ClassicalParameters":
        """Facilitated rate 2 omega^2 / gamma_perp of an overdamped drive."""
        if gamma_perp <= 0:
            raise ParameterError("gamma_perp must be positive")
        return cls(n_sites, 2.0 * omega**2 / gamma_perp, gamma)


@dataclass
class ClassicalResult:
    times: np.ndarray
    populations: np.ndarray  # (n_times, n_sites)
    step_size: float

    @property
    def total(self) -> np.ndarray:
        return self.populations.sum(axis=1)


def rate_derivative(p: np.ndarray, params: ClassicalParameters) -> np.ndarray:
    left = np.concatenate(([0.0], p[:-1]))
    right = np.concatenate((p[1:], [0.0]))
    gamma_fac = params.gamma_f0 * (left * (1.0 - right) + (1.0 - left) * right)
    return gamma_fac * (1.0 - 2.0 * p) - params.gamma * p


def seed_populations(n_sites: int) -> np.ndarray:
    p = np.zeros(n_sites)
    p[0] = 1.0
    return p


def classical_evolve(params: ClassicalParameters, p0, sample_times,
                     max_step: float | None = None) -> ClassicalResult:
    """Fixed-step RK4 integration sampled at the given times."""
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(np.diff(times) < 0):
        raise ParameterError("sample_times must be a non-decreasing 1-d array")
    p = np.asarray(p0, dtype=float).copy()
    if p.shape != (params.n_sites,):
        raise ParameterError(
            f"p0 must have shape ({params.n_sites},), got {p.shape}")
    if np.any(p < 0) or np.any(p > 1):
        raise ParameterError("initial populations must lie in [0, 1]")
    fastest = max(params.gamma_f0, params.gamma)
    if fastest <= 0:
        h_target = np.inf
    else:
        h_target = STEP_FRACTION / fastest
    if max_step is not None:
        h_target = min(h_target, max_step)
    if not np.isfinite(h_target):
        h_target = max(times[-1] - times[0], 1.0)

    out = np.empty((times.size, params.n_sites))
    worst_violation = 0.0
    for k, t in enumerate(times):
        if k > 0:
            gap = t - times[k - 1]
            if gap > 0:
                n_steps = max(1, int(np.ceil(gap / h_target)))
                h = gap / n_steps
                for _ in range(n_steps):
                    k1 = rate_derivative(p, params)
                    k2 = rate_derivative(p + 0.5 * h * k1, params)
                    k3 = rate_derivative(p + 0.5 * h * k2, params)
                    k4 = rate_derivative(p + h * k3, params)
                    p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                    violation = max(float(-p.min(initial=0.0)),
                                    float(p.max(initial=1.0) - 1.0))
                    if violation > 0.0:
                        worst_violation = max(worst_violation, violation)
                        if violation > CLAMP_FAIL:
                            raise NumericalError(
                                f"populations left [0,1] by {violation:.3e}; "
                                "reduce the step size")
                        np.clip(p, 0.0, 1.0, out=p)
        out[k] = p
    if worst_violation > CLAMP_WARN:
        warnings.warn(
            f"populations were clamped to [0,1] (worst overshoot "
            f"{worst_violation:.2e})", stacklevel=2)
    return ClassicalResult(times=times, populations=out, step_size=float(h_target))
