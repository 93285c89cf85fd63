"""Experiment runner: configs in, CSV + JSON (+ figures) out.

`run_experiment` builds the model named by a config, propagates it,
and writes into the output directory:

* trajectory.csv      long form, header t,observable,index,value
* <observable>.csv    one wide file per observable
* meta.json           resolved config, derived quantities, run record
* *.png               rendered figures (unless disabled)

Identical configs give byte-identical CSV files.  `run_sweep` expands a
[sweep] config into labeled subdirectories plus a summary table.
"""
from __future__ import annotations

import concurrent.futures
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .basis import QuantumState, bit_table
from .classical import ClassicalParameters, ClassicalResult, classical_evolve, seed_populations
from .config import ExperimentConfig, expand_sweep, resolve
from .domain import (DomainParameters, DomainScheduleHamiltonian,
                     build_domain_hamiltonian, domain_center_of_mass,
                     eta_from_detunings, project_to_domain, ssh_couplings)
from .errors import CapacityError, ConfigError
from .evolution import EvolutionResult, HalvingReport, evolve, verify_by_halving
from .hamiltonians import (QxpParameters, RydbergParameters,
                           RydbergScheduleHamiltonian, build_qxp_hamiltonian,
                           build_rydberg_hamiltonian)
from .pump import AahSchedule, PumpProgram, PumpSegment, pump_markers
from .topology import (band_chern_numbers, edge_pair_splitting,
                       edge_state_report, identify_occupied_band,
                       winding_number)

OBSERVABLE_ORDER = ("n_site", "p_domain", "fidelity_L", "fidelity_R", "com",
                    "norm", "energy", "p_classical")
VECTOR_OBSERVABLES = ("n_site", "p_domain", "p_classical")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


@dataclass
class RunProducts:
    label: str
    out_dir: Path
    config: ExperimentConfig
    times: np.ndarray
    observables: dict[str, np.ndarray]
    meta: dict


# ---------------------------------------------------------------- model build

def _static_couplings(cfg: ExperimentConfig) -> np.ndarray:
    c = cfg.couplings
    if c.type == "ssh":
        return ssh_couplings(c.lam_v, c.lam_w, cfg.n_sites)
    if c.type == "uniform":
        return np.full(cfg.n_sites, c.lam0)
    if c.type == "explicit":
        return np.asarray(c.values, dtype=float)
    raise ConfigError("aah couplings define a schedule, not static hops",
                      "couplings.type")


def _static_detunings(cfg: ExperimentConfig) -> np.ndarray:
    d = cfg.detuning
    if d.type == "none":
        return np.zeros(cfg.n_sites)
    if d.type == "explicit":
        return np.asarray(d.values, dtype=float)
    raise ConfigError("aah detunings define a schedule", "detuning.type")


def _resolve_t_max(cfg: ExperimentConfig) -> float:
    if cfg.t_unit == "raw":
        return cfg.t_max
    rep = edge_state_report(cfg.couplings.lam_v, cfg.couplings.lam_w,
                            cfg.n_sites)
    if not rep.topological or not np.isfinite(rep.hybridization_period):
        raise ConfigError("t_hyb time unit is undefined in the trivial phase",
                          "time.unit")
    return cfg.t_max * rep.hybridization_period


def _build_program(cfg: ExperimentConfig, t_max: float) -> PumpProgram:
    s = cfg.schedule
    if s.segments:
        segments = [PumpSegment(duration, factor * s.omega)
                    for factor, duration in s.segments]
    else:
        segments = [PumpSegment(t_max, s.omega)]
    return PumpProgram(segments, phi0=s.phi0)


def _sample_times(cfg: ExperimentConfig, t_max: float,
                  program: PumpProgram | None) -> np.ndarray:
    times = np.linspace(0.0, t_max, cfg.n_samples)
    extra = []
    if program is not None:
        extra.extend(b for b in program.breakpoints if 0.0 < b < t_max)
        if not cfg.schedule.segments and cfg.schedule.omega != 0:
            mk = pump_markers(cfg.schedule.omega)
            for t in [mk.com_start, mk.com_end, *mk.plateau_times]:
                if 0.0 <= t <= t_max:
                    extra.append(t)
    if extra:
        times = np.unique(np.concatenate([times, np.asarray(extra, float)]))
    return times


def _quantum_observer(n_sites: int, basis: str):
    bt = bit_table(n_sites) if basis == "spin" else None

    def observer(t: float, state: QuantumState) -> dict:
        amps = state.amplitudes
        if basis == "spin":
            p = np.abs(amps) ** 2
            n_site = bt.T @ p
            a, _ = project_to_domain(state)
            pd = np.abs(a) ** 2
        else:
            pd = np.abs(amps) ** 2
            n_site = np.cumsum(pd[::-1])[::-1]
        return {
            "n_site": n_site,
            "p_domain": pd,
            "fidelity_L": float(pd[0]),
            "fidelity_R": float(pd[-1]),
            "com": domain_center_of_mass(pd),
            "norm": float(np.linalg.norm(amps)),
        }

    return observer


def _build_quantum(cfg: ExperimentConfig, t_max: float, max_dim: int):
    """Hamiltonian (static or schedule), initial state and aah schedule."""
    n = cfg.n_sites
    scheduled = cfg.schedule is not None
    if cfg.kind in ("qxp", "rydberg"):
        dim = 1 << n
        if dim > max_dim:
            raise CapacityError(
                f"spin basis dimension 2^{n} = {dim} exceeds the limit "
                f"{max_dim}; raise --max-dim or shrink the chain")
    program = _build_program(cfg, t_max) if scheduled else None
    aah = None
    if scheduled:
        aah = AahSchedule(cfg.couplings.lam0, cfg.detuning.eta0, program, n)
        period = 2.0 * np.pi / abs(cfg.schedule.omega)

    if cfg.kind == "domain":
        if scheduled:
            params = DomainParameters(n, aah.lam, aah.eta)
            h = DomainScheduleHamiltonian(params, (0.0, t_max),
                                          modulation_period=period)
        else:
            params = DomainParameters.from_site_detunings(
                n, _static_couplings(cfg), _static_detunings(cfg))
            h = build_domain_hamiltonian(params)
        psi0 = QuantumState.fock(n, cfg.initial_m, basis="domain")
        return h, psi0, aah, program

    if cfg.kind == "qxp":
        if scheduled:
            raise ConfigError("modulated schedules run on the rydberg or "
                              "domain model", "model.kind")
        params = QxpParameters(n, _static_couplings(cfg),
                               _static_detunings(cfg))
        h = build_qxp_hamiltonian(params)
        psi0 = QuantumState.fock(n, cfg.initial_m, basis="spin")
        return h, psi0, None, None

    # rydberg
    if scheduled:
        rparams = RydbergParameters(
            n, aah.lam, delta_offset=cfg.detuning.delta_offset,
            v_nn=cfg.detuning.v_nn, delta_mod=aah.site_detunings)
        h = RydbergScheduleHamiltonian(rparams, (0.0, t_max),
                                       modulation_period=period)
    else:
        lam = _static_couplings(cfg)
        dmod = _static_detunings(cfg)
        seed_edge = lam[0] == 0.0 and dmod[0] == 0.0
        rparams = RydbergParameters(
            n, lam, delta_offset=cfg.detuning.delta_offset,
            v_nn=cfg.detuning.v_nn, delta_mod=dmod, seed_boundary=seed_edge)
        h = build_rydberg_hamiltonian(rparams)
    psi0 = QuantumState.fock(n, cfg.initial_m, basis="spin")
    return h, psi0, aah, program


# ------------------------------------------------------------- derived values

def _sanitize(obj):
    """JSON-safe copy: numpy scalars/arrays to python, non-finite to None."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def derived_quantities(cfg: ExperimentConfig,
                       aah: AahSchedule | None) -> dict:
    out: dict = {}
    c = cfg.couplings
    if c is not None and c.type == "ssh":
        if abs(c.lam_v) != abs(c.lam_w):
            out["winding_number"] = winding_number(c.lam_v, c.lam_w)
        if cfg.n_sites % 2 == 0:
            rep = edge_state_report(c.lam_v, c.lam_w, cfg.n_sites)
            out["localization_length"] = rep.localization_length
            out["topological"] = rep.topological
            out["energy_plus"] = rep.energy_plus
            out["energy_minus"] = rep.energy_minus
            out["t_hyb"] = rep.hybridization_period
            h_dom = build_domain_hamiltonian(DomainParameters.from_site_detunings(
                cfg.n_sites, _static_couplings(cfg), _static_detunings(cfg)))
            lo, hi = edge_pair_splitting(h_dom)
            out["ed_energy_minus"] = lo
            out["ed_energy_plus"] = hi
            if rep.topological and rep.energy_plus > 0:
                out["ed_vs_closed_form_rel_err"] = (
                    abs(hi - rep.energy_plus) / rep.energy_plus)
    if aah is not None:
        from .pump import adiabaticity_check

        out["delta_max"] = aah.delta_max
        out["recommended_delta_offset"] = aah.recommended_delta_offset()
        adiab = adiabaticity_check(aah)
        out["adiabaticity"] = {**asdict(adiab), "adiabatic": adiab.adiabatic}
        chern = band_chern_numbers(aah.bloch_hamiltonian)
        out["chern_numbers"] = chern.tolist()
        # identify the carrier band at the first plateau phase reached:
        # at a plateau the wall energy coincides with exactly one band,
        # while start phases can sit on a crossing where it is ambiguous
        phi0 = aah.program.phi0
        forward = aah.program.segments[0].omega >= 0
        third = 2.0 * np.pi / 3.0
        k = (np.ceil if forward else np.floor)((phi0 - np.pi / 3.0) / third)
        phi_star = np.pi / 3.0 + third * k
        energy_star = aah.eta0 * np.cos(
            phi_star + 4.0 * np.pi * (cfg.initial_m + 1) / 3.0)
        band = identify_occupied_band(aah.bloch_hamiltonian, phi_star,
                                      energy_star)
        out["occupied_band"] = band
        out["chern_occupied"] = int(chern[band])
        out["displacement_per_cycle"] = 3 * int(chern[band])
    if cfg.kind == "rydberg":
        out["delta_offset"] = cfg.detuning.delta_offset
        out["v_nn"] = cfg.detuning.v_nn
    return out


# -------------------------------------------------------------------- writers

def write_trajectory_csv(path: Path, times: np.ndarray,
                         observables: dict[str, np.ndarray]) -> None:
    lines = ["t,observable,index,value"]
    names = [n for n in OBSERVABLE_ORDER if n in observables]
    for i, t in enumerate(times):
        ts = _fmt(t)
        for name in names:
            arr = observables[name]
            if arr.ndim == 2:
                for j in range(arr.shape[1]):
                    lines.append(f"{ts},{name},{j + 1},{_fmt(arr[i, j])}")
            else:
                v = arr[i]
                if name == "com" and not np.isfinite(v):
                    continue  # undefined wall position: row omitted
                lines.append(f"{ts},{name},0,{_fmt(v)}")
    path.write_text("\n".join(lines) + "\n")


def write_observable_csvs(out_dir: Path, times: np.ndarray,
                          observables: dict[str, np.ndarray]) -> list[Path]:
    paths = []
    for name in (n for n in OBSERVABLE_ORDER if n in observables):
        arr = observables[name]
        path = out_dir / f"{name}.csv"
        if arr.ndim == 2:
            header = "t," + ",".join(f"{name}_{j + 1}"
                                     for j in range(arr.shape[1]))
            lines = [header]
            for i, t in enumerate(times):
                lines.append(_fmt(t) + "," +
                             ",".join(_fmt(v) for v in arr[i]))
        else:
            lines = [f"t,{name}"]
            for i, t in enumerate(times):
                if name == "com" and not np.isfinite(arr[i]):
                    continue
                lines.append(f"{_fmt(t)},{_fmt(arr[i])}")
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def _write_meta(path: Path, cfg: ExperimentConfig, derived: dict,
                run_record: dict) -> dict:
    meta = _sanitize({
        "config": cfg.to_dict(),
        "derived": derived,
        "run": run_record,
        "versions": {
            "package": __version__,
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
        },
    })
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta


# ------------------------------------------------------------------- run core

def _run_classical(cfg: ExperimentConfig, times: np.ndarray, tol: float,
                   verify: bool):
    params = ClassicalParameters(cfg.n_sites, cfg.rates.gamma_f0,
                                 cfg.rates.gamma)
    p0 = np.zeros(cfg.n_sites)
    p0[:cfg.initial_m] = 1.0
    res = classical_evolve(params, p0, times)
    halving = None
    if verify:
        threshold = 10.0 * tol
        coarse = res
        step = res.step_size
        for halvings in range(1, 7):
            step = step / 2.0
            fine = classical_evolve(params, p0, times, max_step=step)
            deviation = float(np.max(np.abs(
                fine.populations - coarse.populations)))
            halving = HalvingReport(step_size=step, deviation=deviation,
                                    threshold=threshold, halvings=halvings)
            if deviation < threshold:
                res = fine
                break
            coarse = fine
        else:
            from .errors import NumericalError

            raise NumericalError(
                f"classical populations still moved by {deviation:.3e} "
                f"after repeated step halving")
    observables = {"p_classical": res.populations}
    record = {
        "method": "rk4",
        "step_size": res.step_size,
        "max_norm_drift": None,
        "max_energy_drift": None,
        "halving": asdict(halving) if halving else None,
    }
    return observables, record


def _run_quantum(cfg: ExperimentConfig, t_max: float, times: np.ndarray,
                 tol: float, max_dim: int):
    h, psi0, aah, program = _build_quantum(cfg, t_max, max_dim)
    observer = _quantum_observer(cfg.n_sites, psi0.basis)
    if hasattr(h, "combo"):
        def run_once(step_override):
            return evolve(h, psi0, times, method=cfg.numerics.method,
                          observer=observer, step_override=step_override)

        if cfg.numerics.verify:
            result = verify_by_halving(run_once, tol)
        else:
            result = run_once(None)
    else:
        result = evolve(h, psi0, times, observer=observer)
    record = {
        "method": result.method,
        "step_size": result.step_size,
        "max_norm_drift": result.max_norm_drift,
        "max_energy_drift": result.max_energy_drift,
        "h_max_abs": result.h_max_abs,
        "halving": asdict(result.halving) if result.halving else None,
    }
    return result.observables, record, aah


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path, *,
                   tol: float | None = None, max_dim: int | None = None,
                   figures: bool | None = None) -> RunProducts:
    """Run one experiment and write its artifacts into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tol = cfg.numerics.tol if tol is None else tol
    max_dim = cfg.numerics.max_dim if max_dim is None else max_dim
    make_figures = cfg.figures if figures is None else figures

    started = time.time()
    aah = None
    if cfg.kind == "classical":
        t_max = _resolve_t_max(cfg)
        times = _sample_times(cfg, t_max, None)
        observables, record = _run_classical(cfg, times, tol,
                                             cfg.numerics.verify)
    else:
        t_max = _resolve_t_max(cfg)
        program = _build_program(cfg, t_max) if cfg.schedule else None
        times = _sample_times(cfg, t_max, program)
        observables, record, aah = _run_quantum(cfg, t_max, times, tol,
                                                max_dim)
    record["tol"] = tol
    record["wall_time_s"] = round(time.time() - started, 3)

    derived = derived_quantities(cfg, aah)
    derived["t_max"] = t_max

    write_trajectory_csv(out_dir / "trajectory.csv", times, observables)
    write_observable_csvs(out_dir, times, observables)
    meta = _write_meta(out_dir / "meta.json", cfg, derived, record)
    if make_figures:
        from . import figures as figmod

        figmod.render_run(out_dir, cfg, times, observables, derived)
    return RunProducts(label=cfg.label, out_dir=out_dir, config=cfg,
                       times=times, observables=observables, meta=meta)


# --------------------------------------------------------------------- sweeps

def _variant_summary(products: RunProducts) -> dict:
    obs = products.observables
    summary: dict = {}
    if "p_classical" in obs:
        summary["final_total_excitation"] = float(obs["p_classical"][-1].sum())
        return summary
    pd = obs["p_domain"]
    sector = pd.sum(axis=1)
    summary["max_fidelity_R"] = float(obs["fidelity_R"].max())
    summary["final_com"] = float(obs["com"][-1])
    summary["min_sector_population"] = float(sector.min())
    summary["mean_sector_population"] = float(
        np.trapezoid(sector, products.times) /
        (products.times[-1] - products.times[0]))
    t_hyb = products.meta["derived"].get("t_hyb")
    if t_hyb:
        from .topology import oscillation_period

        period = oscillation_period(products.times, obs["fidelity_R"],
                                    expected_period=t_hyb)
        summary["measured_period"] = period
        if np.isfinite(period):
            summary["period_rel_err"] = abs(period - t_hyb) / t_hyb
    return summary


def run_sweep(raw: dict[str, dict[str, str]], out_dir: str | Path, *,
              label: str = "sweep", jobs: int = 1, tol: float | None = None,
              max_dim: int | None = None,
              figures: bool | None = None) -> list[RunProducts]:
    """Run every variant of a sweep config into labeled subdirectories."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    variants = expand_sweep(raw, base_label=label)
    results: list[RunProducts] = []
    if jobs > 1 and len(variants) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(run_experiment, cfg, out_dir / vlabel, tol=tol,
                            max_dim=max_dim, figures=figures)
                for vlabel, cfg in variants]
            results = [f.result() for f in futures]
    else:
        for vlabel, cfg in variants:
            results.append(run_experiment(cfg, out_dir / vlabel, tol=tol,
                                          max_dim=max_dim, figures=figures))
    if len(variants) > 1:
        rows = [(p.label, _variant_summary(p)) for p in results]
        _write_sweep_summary(out_dir / "sweep_summary.csv", rows)
        if figures or (figures is None and results[0].config.figures):
            from . import figures as figmod

            figmod.render_sweep_summary(out_dir, rows)
    return results


def _write_sweep_summary(path: Path, rows: list[tuple[str, dict]]) -> None:
    keys = sorted({k for _, summary in rows for k in summary})
    lines = ["label," + ",".join(keys)]
    for label, summary in rows:
        cells = [label]
        for key in keys:
            v = summary.get(key)
            cells.append("" if v is None or not np.isfinite(v) else _fmt(v))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


# ------------------------------------------------------------------ analyses

def analyze_ssh(lam_v: float, lam_w: float, n_sites: int) -> dict:
    """Edge-state diagnostics of a staggered chain, closed form vs exact."""
    rep = edge_state_report(lam_v, lam_w, n_sites)
    h = build_domain_hamiltonian(DomainParameters(
        n_sites, ssh_couplings(lam_v, lam_w, n_sites)))
    lo, hi = edge_pair_splitting(h)
    out = {
        "lam_v": lam_v,
        "lam_w": lam_w,
        "n_sites": n_sites,
        "topological": rep.topological,
        "localization_length": rep.localization_length,
        "energy_plus": rep.energy_plus,
        "energy_minus": rep.energy_minus,
        "t_hyb": rep.hybridization_period,
        "ed_energy_plus": hi,
        "ed_energy_minus": lo,
    }
    if abs(lam_v) != abs(lam_w):
        out["winding_number"] = winding_number(lam_v, lam_w)
    if rep.topological and rep.energy_plus > 0:
        out["ed_vs_closed_form_rel_err"] = abs(hi - rep.energy_plus) / rep.energy_plus
    return out


def analyze_pump(cfg: ExperimentConfig) -> dict:
    """Band and adiabaticity diagnostics of a modulated config."""
    if cfg.schedule is None or cfg.couplings is None \
            or cfg.couplings.type != "aah":
        raise ConfigError("pump analysis needs aah couplings and a schedule",
                          "couplings.type")
    t_max = cfg.t_max if cfg.t_unit == "raw" else _resolve_t_max(cfg)
    program = _build_program(cfg, t_max)
    aah = AahSchedule(cfg.couplings.lam0, cfg.detuning.eta0, program,
                      cfg.n_sites)
    out = derived_quantities(cfg, aah)
    out["t_max"] = t_max
    if cfg.kind == "rydberg":
        offset_ok = abs(cfg.detuning.delta_offset) >= abs(
            aah.recommended_delta_offset())
        out["delta_offset_sufficient"] = bool(offset_ok)
    return out
