"""Canned experiment configurations.

Each preset is a raw config mapping (the same shape a file parse
produces), so presets and user files travel through identical
validation.  Durations of the modulated runs are expressed with `pi`
so the phase grids land exactly on plateau and crossing times.
"""
from __future__ import annotations

import copy

from .config import ExperimentConfig, resolve
from .errors import ConfigError

# one pump period at omega = 0.02 is 100 pi; the growth segment of the
# composite program runs 2 cycles plus 1/6 to park on a plateau
_PRESETS: dict[str, dict[str, dict[str, str]]] = {
    "fig1c": {
        "model": {"kind": "classical", "n_sites": "4"},
        "rates": {"gamma_f0": "1", "gamma": "0"},
        "time": {"t_max": "200", "n_samples": "801"},
    },
    "fig1d": {
        "model": {"kind": "rydberg", "n_sites": "4"},
        "couplings": {"type": "ssh", "lam_v": "1", "lam_w": "10"},
        "detuning": {"delta_offset": "-500"},
        "time": {"t_max": "1.5", "unit": "t_hyb", "n_samples": "601"},
    },
    "fig2-trivial": {
        "model": {"kind": "domain", "n_sites": "8"},
        "couplings": {"type": "ssh", "lam_v": "1", "lam_w": "0.1"},
        "time": {"t_max": "500", "n_samples": "2001"},
    },
    "fig2-topological": {
        "model": {"kind": "domain", "n_sites": "8"},
        "couplings": {"type": "ssh", "lam_v": "1", "lam_w": "10"},
        "time": {"t_max": "1.5", "unit": "t_hyb", "n_samples": "2001"},
    },
    "fig3-sweep": {
        "model": {"kind": "domain", "n_sites": "4"},
        "couplings": {"type": "ssh", "lam_v": "1", "lam_w": "10"},
        "time": {"t_max": "2.5", "unit": "t_hyb", "n_samples": "2001"},
        "sweep": {"field": "couplings.lam_w", "values": "2, 5, 10, 20",
                  "labels": "ratio2, ratio5, ratio10, ratio20"},
    },
    "fig4-pump": {
        "model": {"kind": "rydberg", "n_sites": "10"},
        "couplings": {"type": "aah", "lam0": "1"},
        "detuning": {"type": "aah", "eta0": "-10", "delta_offset": "-500"},
        "schedule": {
            "omega": "0.02",
            "phi0": "0",
            # grow 2 cycles + 1/6, hold, shrink 1 cycle, hold
            "segments": "1: (13/6)*100*pi; 0: 20; -1: 100*pi; 0: 20",
        },
        "time": {"t_max": "(19/6)*100*pi + 40", "n_samples": "601"},
        "numerics": {"tol": "1e-6"},
    },
    "fig5-sweep": {
        "model": {"kind": "rydberg", "n_sites": "8"},
        "couplings": {"type": "aah", "lam0": "1"},
        "detuning": {"type": "aah", "eta0": "-10", "delta_offset": "-500"},
        "schedule": {"omega": "0.02", "phi0": "0"},
        "time": {"t_max": "(7/6)*100*pi", "n_samples": "421"},
        "numerics": {"tol": "1e-6"},
        "sweep": {"field": "detuning.delta_offset",
                  "values": "-22, -50, -100, -500",
                  "labels": "offset22, offset50, offset100, offset500"},
    },
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset_raw(name: str) -> dict[str, dict[str, str]]:
    """Raw config mapping of a named preset."""
    if name not in _PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return copy.deepcopy(_PRESETS[name])


def preset(name: str) -> ExperimentConfig:
    """Fully resolved config of a named preset."""
    return resolve(preset_raw(name), label=name)
