"""Experiment configuration: typed INI sections with schema validation.

One file describes one experiment (model, couplings, detunings, drive
schedule, initial state, time grid, output and numerics).  Values are
plain numbers or small arithmetic expressions over `pi` ("2*pi/3").
An optional [sweep] section turns the file into a family of runs that
differ in a single dotted field, e.g. `detuning.delta_offset`.
"""
from __future__ import annotations

import ast
import configparser
import copy
import io
import math
import operator
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .errors import ConfigError

MODEL_KINDS = ("qxp", "rydberg", "domain", "classical")
COUPLING_TYPES = ("ssh", "aah", "uniform", "explicit")
DETUNING_TYPES = ("none", "aah", "explicit")
DEFAULT_MAX_DIM = 16384
DEFAULT_N_SAMPLES = 401

_BIN_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY_OPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def _eval_node(node, text: str, fieldname: str) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
        return _BIN_OPS[type(node.op)](
            _eval_node(node.left, text, fieldname),
            _eval_node(node.right, text, fieldname))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY_OPS:
        return _UNARY_OPS[type(node.op)](_eval_node(node.operand, text, fieldname))
    raise ConfigError(f"cannot evaluate number {text!r}", fieldname)


def parse_number(text: str, fieldname: str) -> float:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError:
        raise ConfigError(f"invalid number {text!r}", fieldname) from None
    value = _eval_node(tree.body, text, fieldname)
    if not math.isfinite(value):
        raise ConfigError(f"number {text!r} is not finite", fieldname)
    return value


def parse_number_list(text: str, fieldname: str) -> list[float]:
    items = [s for s in (part.strip() for part in text.split(",")) if s]
    if not items:
        raise ConfigError("empty list", fieldname)
    return [parse_number(s, fieldname) for s in items]


def _parse_bool(text: str, fieldname: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}", fieldname)


def _parse_int(text: str, fieldname: str) -> int:
    value = parse_number(text, fieldname)
    if value != int(value):
        raise ConfigError(f"expected an integer, got {text!r}", fieldname)
    return int(value)


@dataclass
class CouplingSpec:
    type: str
    lam_v: float | None = None
    lam_w: float | None = None
    lam0: float | None = None
    values: list[float] | None = None


@dataclass
class DetuningSpec:
    type: str = "none"
    eta0: float | None = None
    values: list[float] | None = None
    delta_offset: float | None = None
    v_nn: float | None = None


@dataclass
class ScheduleSpec:
    omega: float
    phi0: float = 0.0
    # (omega multiplier, duration) pairs; empty = one segment over t_max
    segments: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class RatesSpec:
    gamma_f0: float
    gamma: float = 0.0


@dataclass
class SweepSpec:
    field: str
    values: list[float]
    labels: list[str]


@dataclass
class NumericsSpec:
    tol: float = 1e-6
    method: str = "cf4"
    max_dim: int = DEFAULT_MAX_DIM
    verify: bool = True


@dataclass
class ExperimentConfig:
    """Fully resolved description of one experiment (or a sweep family)."""

    kind: str
    n_sites: int
    couplings: CouplingSpec | None
    detuning: DetuningSpec
    schedule: ScheduleSpec | None
    initial_m: int
    t_max: float
    t_unit: str
    n_samples: int
    figures: bool
    rates: RatesSpec | None
    numerics: NumericsSpec
    sweep: SweepSpec | None = None
    label: str = "run"

    def to_dict(self) -> dict:
        return asdict(self)


class _Reader:
    """Tracks consumed keys so unknown entries can be reported."""

    def __init__(self, raw: dict[str, dict[str, str]]):
        self.raw = raw
        self.seen: set[tuple[str, str]] = set()

    def get(self, section: str, key: str, default=None, required=False) -> str | None:
        sec = self.raw.get(section)
        if sec is None or key not in sec:
            if required:
                raise ConfigError("required field is missing", f"{section}.{key}")
            return default
        self.seen.add((section, key))
        return sec[key]

    def has_section(self, section: str) -> bool:
        return section in self.raw

    def check_unknown(self):
        for section, entries in self.raw.items():
            for key in entries:
                if (section, key) not in self.seen:
                    raise ConfigError("unknown field", f"{section}.{key}")


def read_raw(path: str | Path) -> dict[str, dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_raw(path.read_text())


def parse_raw(text: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return {s: dict(parser.items(s)) for s in parser.sections()}


def resolve(raw: dict[str, dict[str, str]], label: str = "run") -> ExperimentConfig:
    """Validate a raw section/key mapping into an ExperimentConfig."""
    r = _Reader(raw)

    kind = r.get("model", "kind", required=True).strip().lower()
    if kind not in MODEL_KINDS:
        raise ConfigError(f"unknown model kind {kind!r}; expected one of "
                          f"{MODEL_KINDS}", "model.kind")
    n_sites = _parse_int(r.get("model", "n_sites", required=True), "model.n_sites")
    if n_sites < 1:
        raise ConfigError("n_sites must be >= 1", "model.n_sites")

    couplings = None
    detuning = DetuningSpec()
    schedule = None
    rates = None

    if kind == "classical":
        gamma_f0 = parse_number(r.get("rates", "gamma_f0", required=True),
                                "rates.gamma_f0")
        gamma = parse_number(r.get("rates", "gamma", "0"), "rates.gamma")
        if gamma_f0 < 0 or gamma < 0:
            raise ConfigError("rates must be >= 0", "rates.gamma_f0")
        rates = RatesSpec(gamma_f0=gamma_f0, gamma=gamma)
    else:
        couplings = _resolve_couplings(r, n_sites)
        detuning = _resolve_detuning(r, kind, n_sites, couplings)
        needs_schedule = couplings.type == "aah" or detuning.type == "aah"
        if needs_schedule:
            omega = parse_number(r.get("schedule", "omega", required=True),
                                 "schedule.omega")
            phi0 = parse_number(r.get("schedule", "phi0", "0"), "schedule.phi0")
            segments = _resolve_segments(r.get("schedule", "segments"))
            if omega == 0 and not segments:
                raise ConfigError("omega must be nonzero for a single-segment "
                                  "schedule", "schedule.omega")
            schedule = ScheduleSpec(omega=omega, phi0=phi0, segments=segments)
        elif r.has_section("schedule"):
            raise ConfigError("a [schedule] section needs aah couplings or "
                              "detunings", "schedule.omega")

    initial_m = _resolve_initial(r, n_sites)

    t_max = parse_number(r.get("time", "t_max", required=True), "time.t_max")
    if t_max <= 0:
        raise ConfigError("t_max must be positive", "time.t_max")
    t_unit = (r.get("time", "unit", "raw") or "raw").strip().lower()
    if t_unit not in ("raw", "t_hyb"):
        raise ConfigError(f"unknown time unit {t_unit!r}", "time.unit")
    if t_unit == "t_hyb" and (couplings is None or couplings.type != "ssh"):
        raise ConfigError("time unit t_hyb needs ssh couplings", "time.unit")
    n_samples = _parse_int(r.get("time", "n_samples", str(DEFAULT_N_SAMPLES)),
                           "time.n_samples")
    if n_samples < 2:
        raise ConfigError("n_samples must be >= 2", "time.n_samples")

    figures = _parse_bool(r.get("output", "figures", "true"), "output.figures")

    numerics = NumericsSpec(
        tol=parse_number(r.get("numerics", "tol", "1e-6"), "numerics.tol"),
        method=(r.get("numerics", "method", "cf4") or "cf4").strip().lower(),
        max_dim=_parse_int(r.get("numerics", "max_dim", str(DEFAULT_MAX_DIM)),
                           "numerics.max_dim"),
        verify=_parse_bool(r.get("numerics", "verify", "true"),
                           "numerics.verify"),
    )
    if numerics.tol <= 0:
        raise ConfigError("tol must be positive", "numerics.tol")
    if numerics.method not in ("cf4", "midpoint"):
        raise ConfigError(f"unknown method {numerics.method!r}",
                          "numerics.method")

    sweep = _resolve_sweep(r, raw)
    r.check_unknown()

    return ExperimentConfig(
        kind=kind, n_sites=n_sites, couplings=couplings, detuning=detuning,
        schedule=schedule, initial_m=initial_m, t_max=t_max, t_unit=t_unit,
        n_samples=n_samples, figures=figures, rates=rates, numerics=numerics,
        sweep=sweep, label=label)


def _resolve_couplings(r: _Reader, n_sites: int) -> CouplingSpec:
    ctype = (r.get("couplings", "type", required=True) or "").strip().lower()
    if ctype not in COUPLING_TYPES:
        raise ConfigError(f"unknown coupling type {ctype!r}; expected one of "
                          f"{COUPLING_TYPES}", "couplings.type")
    spec = CouplingSpec(type=ctype)
    if ctype == "ssh":
        spec.lam_v = parse_number(r.get("couplings", "lam_v", required=True),
                                  "couplings.lam_v")
        spec.lam_w = parse_number(r.get("couplings", "lam_w", required=True),
                                  "couplings.lam_w")
        if spec.lam_v == 0 or spec.lam_w == 0:
            raise ConfigError("ssh hops must be nonzero", "couplings.lam_v")
    elif ctype in ("aah", "uniform"):
        spec.lam0 = parse_number(r.get("couplings", "lam0", required=True),
                                 "couplings.lam0")
        if spec.lam0 <= 0:
            raise ConfigError("lam0 must be positive", "couplings.lam0")
    else:  # explicit
        spec.values = parse_number_list(
            r.get("couplings", "values", required=True), "couplings.values")
        if len(spec.values) != n_sites:
            raise ConfigError(
                f"expected {n_sites} values, got {len(spec.values)}",
                "couplings.values")
    return spec


def _resolve_detuning(r: _Reader, kind: str, n_sites: int,
                      couplings: CouplingSpec) -> DetuningSpec:
    dtype = (r.get("detuning", "type", "none") or "none").strip().lower()
    if dtype not in DETUNING_TYPES:
        raise ConfigError(f"unknown detuning type {dtype!r}; expected one of "
                          f"{DETUNING_TYPES}", "detuning.type")
    spec = DetuningSpec(type=dtype)
    if dtype == "aah":
        spec.eta0 = parse_number(r.get("detuning", "eta0", required=True),
                                 "detuning.eta0")
        if couplings.type != "aah":
            raise ConfigError("aah detunings need aah couplings",
                              "detuning.type")
    elif dtype == "explicit":
        spec.values = parse_number_list(
            r.get("detuning", "values", required=True), "detuning.values")
        if len(spec.values) != n_sites:
            raise ConfigError(
                f"expected {n_sites} values, got {len(spec.values)}",
                "detuning.values")
        if spec.values[0] != 0.0:
            raise ConfigError("delta_1 must be 0 (seeded edge)",
                              "detuning.values")
    if couplings.type == "aah" and dtype != "aah":
        raise ConfigError("aah couplings need aah detunings", "detuning.type")

    if kind == "rydberg":
        text = r.get("detuning", "delta_offset")
        if text is None:
            raise ConfigError("rydberg model needs a facilitation offset",
                              "detuning.delta_offset")
        spec.delta_offset = parse_number(text, "detuning.delta_offset")
        if spec.delta_offset == 0:
            raise ConfigError("delta_offset must be nonzero",
                              "detuning.delta_offset")
        v_text = r.get("detuning", "v_nn")
        spec.v_nn = (parse_number(v_text, "detuning.v_nn")
                     if v_text is not None else -spec.delta_offset)
        if abs(spec.v_nn + spec.delta_offset) > 1e-9 * max(1.0, abs(spec.v_nn)):
            raise ConfigError(
                "facilitation requires v_nn = -delta_offset", "detuning.v_nn")
    else:
        for key in ("delta_offset", "v_nn"):
            if r.get("detuning", key) is not None:
                raise ConfigError(f"{key} applies to the rydberg model only",
                                  f"detuning.{key}")
    return spec


def _resolve_segments(text: str | None) -> list[tuple[float, float]]:
    if text is None or not text.strip():
        return []
    segments = []
    for i, chunk in enumerate(text.split(";")):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 2:
            raise ConfigError(
                f"segment {chunk!r} must be factor:duration",
                "schedule.segments")
        factor = parse_number(parts[0], "schedule.segments")
        duration = parse_number(parts[1], "schedule.segments")
        if duration < 0:
            raise ConfigError("segment durations must be >= 0",
                              "schedule.segments")
        segments.append((factor, duration))
    if not segments:
        raise ConfigError("empty segment list", "schedule.segments")
    return segments


def _resolve_initial(r: _Reader, n_sites: int) -> int:
    text = (r.get("initial", "state", "seed") or "seed").strip().lower()
    if text == "seed":
        return 1
    if text.startswith("domain:"):
        m = _parse_int(text.split(":", 1)[1], "initial.state")
        if not 1 <= m <= n_sites:
            raise ConfigError(f"domain size {m} outside 1..{n_sites}",
                              "initial.state")
        return m
    raise ConfigError(f"unknown initial state {text!r} (seed or domain:<m>)",
                      "initial.state")


def _resolve_sweep(r: _Reader, raw: dict) -> SweepSpec | None:
    if not r.has_section("sweep"):
        return None
    fieldname = r.get("sweep", "field", required=True).strip()
    if fieldname.count(".") != 1:
        raise ConfigError("sweep field must be section.key", "sweep.field")
    section, key = fieldname.split(".")
    if section == "sweep":
        raise ConfigError("cannot sweep the sweep section", "sweep.field")
    values = parse_number_list(r.get("sweep", "values", required=True),
                               "sweep.values")
    labels_text = r.get("sweep", "labels")
    if labels_text is not None:
        labels = [s.strip() for s in labels_text.split(",") if s.strip()]
        if len(labels) != len(values):
            raise ConfigError("labels and values differ in length",
                              "sweep.labels")
    else:
        labels = [f"{key}={_fmt_value(v)}" for v in values]
    if len(set(labels)) != len(labels):
        raise ConfigError("sweep labels must be unique", "sweep.labels")
    return SweepSpec(field=fieldname, values=values, labels=labels)


def _fmt_value(v: float) -> str:
    return f"{v:g}".replace("-", "m").replace(".", "p")


def load_config(path: str | Path) -> ExperimentConfig:
    raw = read_raw(path)
    return resolve(raw, label=Path(path).stem)


def expand_sweep(raw: dict[str, dict[str, str]],
                 base_label: str = "run") -> list[tuple[str, ExperimentConfig]]:
    """All (label, config) variants of a raw config with a [sweep] section.

    Without [sweep] this is the single resolved config.  Each variant is
    re-resolved from scratch so derived defaults (facilitation v_nn,
    t_hyb-scaled windows) follow the swept value.
    """
    base = resolve(raw, label=base_label)
    if base.sweep is None:
        return [(base_label, base)]
    section, key = base.sweep.field.split(".")
    variants = []
    for value, label in zip(base.sweep.values, base.sweep.labels):
        sub = copy.deepcopy(raw)
        sub.pop("sweep", None)
        sub.setdefault(section, {})[key] = repr(value)
        cfg = resolve(sub, label=label)
        variants.append((label, cfg))
    return variants


def dump_config(raw: dict[str, dict[str, str]]) -> str:
    """Render a raw mapping back to INI text (stable key order)."""
    parser = configparser.ConfigParser(interpolation=None)
    for section, entries in raw.items():
        parser[section] = dict(entries)
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()
